//! Polynomials `U_k` of the four-term recurrence and the translation series
//! `U(ξ; T) = Σ ξᵏ U_k(T) / k!`.
//!
//! For `λ = -χₙ` the scalar series equals `ψₙ(-1+ξ)/ψₙ(-1)`. Its terms first
//! grow (roughly like `C(n,k) C(n+k,k) (ξ/2)ᵏ`) and then cancel, so the
//! scaled terms `bₖ = ξᵏ Uₖ / k!` are generated and summed in double-double:
//!
//! ```text
//! 2(k+1)² b_{k+1} = ξ (λ + c² + k(k+1)) bₖ - 2c²ξ² b_{k-1} + c²ξ³ b_{k-2}
//! ```

use num_complex::Complex64;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::legendre::CoeffVector;
use crate::linalg::OperatorMatrix;
use crate::prolate::{assemble_heun_matrix, ProlateBasis};

/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 2000;

/// Consecutive negligible terms required before the series is cut.
pub const RUN_LENGTH: usize = 20;

/// Unit roundoff of double-double arithmetic.
const DD_EPS: f64 = 4.93e-32;

/// `U_k(λ)` for `k = 0..=K` at a list of spectral points.
#[derive(Debug, Clone, PartialEq)]
pub struct UPolyTable {
    c: f64,
    lambdas: Vec<f64>,
    /// `values[k][j] = U_k(lambdas[j])`.
    values: Vec<Vec<f64>>,
}

impl UPolyTable {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Highest degree K in the table.
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k][j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// Largest recurrence residual over the table, each relative to the sum
    /// of the magnitudes of the terms involved.
    pub fn recurrence_residual(&self) -> f64 {
        let c2 = self.c * self.c;
        let mut worst: f64 = 0.0;
        for k in 0..self.degree() {
            let kf = k as f64;
            for (j, &lam) in self.lambdas.iter().enumerate() {
                let at = |i: isize| {
                    if i < 0 {
                        0.0
                    } else {
                        self.values[i as usize][j]
                    }
                };
                let k = k as isize;
                let terms = [
                    2.0 * (kf + 1.0) * at(k + 1),
                    -(lam + c2 + kf * (kf + 1.0)) * at(k),
                    2.0 * c2 * kf * at(k - 1),
                    -c2 * kf * (kf - 1.0) * at(k - 2),
                ];
                let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                if scale > 0.0 {
                    worst = worst.max(terms.iter().sum::<f64>().abs() / scale);
                }
            }
        }
        worst
    }
}

/// Unrolls the recurrence
/// `U_{k+1} = (λ+c²+k(k+1))/(2(k+1)) U_k - c²k/(k+1) U_{k-1} + c²k(k-1)/(2(k+1)) U_{k-2}`
/// from `U₀ = 1`, with `U_k = 0` for negative `k`.
pub fn u_poly_table(c: f64, lambdas: &[f64], k_max: usize) -> Result<UPolyTable> {
    if !c.is_finite() || lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument(
            "c and the spectral points must be finite".into(),
        ));
    }
    let c2 = c * c;
    let m = lambdas.len();
    let mut values: Vec<Vec<f64>> = vec![vec![1.0; m]];
    for k in 0..k_max {
        let kf = k as f64;
        let next: Vec<f64> = (0..m)
            .map(|j| {
                let u0 = values[k][j];
                let u1 = if k >= 1 { values[k - 1][j] } else { 0.0 };
                let u2 = if k >= 2 { values[k - 2][j] } else { 0.0 };
                (lambdas[j] + c2 + kf * (kf + 1.0)) / (2.0 * (kf + 1.0)) * u0
                    - c2 * kf / (kf + 1.0) * u1
                    + c2 * kf * (kf - 1.0) / (2.0 * (kf + 1.0)) * u2
            })
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::RecurrenceOverflow { last_valid: k });
        }
        values.push(next);
    }
    Ok(UPolyTable {
        c,
        lambdas: lambdas.to_vec(),
        values,
    })
}

/// Generator of the scaled terms `bₖ = ξᵏ Uₖ(λ) / k!` in double-double.
struct ScaledTerms {
    c2: TwoFloat,
    lambda_c2: TwoFloat,
    xi: TwoFloat,
    xi2: TwoFloat,
    xi3: TwoFloat,
    /// (b_{k-2}, b_{k-1}, b_k)
    window: [TwoFloat; 3],
    k: usize,
}

impl ScaledTerms {
    fn new(c: f64, lambda: f64, xi: f64) -> Self {
        let c2 = TwoFloat::new_mul(c, c);
        let xi_dd = TwoFloat::from(xi);
        let zero = TwoFloat::from(0.0);
        Self {
            c2,
            lambda_c2: c2 + lambda,
            xi: xi_dd,
            xi2: xi_dd * xi,
            xi3: xi_dd * xi * xi,
            window: [zero, zero, TwoFloat::from(1.0)],
            k: 0,
        }
    }

    fn current(&self) -> TwoFloat {
        self.window[2]
    }

    fn advance(&mut self) {
        let k = self.k as f64;
        let denom = 2.0 * (k + 1.0) * (k + 1.0);
        let [b2, b1, b0] = self.window;
        let next = (self.xi * (self.lambda_c2 + k * (k + 1.0)) * b0
            - self.c2 * self.xi2 * b1 * 2.0
            + self.c2 * self.xi3 * b2)
            / denom;
        self.window = [b1, b0, next];
        self.k += 1;
    }
}

/// First `count` scaled terms `ξᵏ Uₖ(λ) / k!`.
pub fn u_series_terms(c: f64, lambda: f64, xi: f64, count: usize) -> Vec<f64> {
    let mut gen = ScaledTerms::new(c, lambda, xi);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(gen.current().hi());
        gen.advance();
    }
    out
}

/// Value of the scalar translation series with its error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct USeriesResult {
    pub xi: f64,
    pub value: f64,
    pub terms_used: usize,
    /// Geometric bound on the neglected tail, relative to `|value|`.
    pub tail_estimate: f64,
    /// Accumulated double-double rounding, relative to `|value|`.
    pub rounding_estimate: f64,
}

impl USeriesResult {
    pub fn error_estimate(&self) -> f64 {
        self.tail_estimate + self.rounding_estimate
    }
}

fn check_open_interval(xi: f64) -> Result<()> {
    if xi.is_finite() && xi.abs() < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("ξ = {xi} is outside (-2, 2)")))
    }
}

/// `U(ξ; λ) = Σ ξᵏ U_k(λ) / k!` for `ξ ∈ (-2, 2)`.
///
/// Summation stops once `RUN_LENGTH` consecutive terms are below
/// `tol · |partial sum|` and the geometric tail bound (ratio `|ξ|/2`) is
/// below `tol`.
pub fn u_series_scalar(c: f64, lambda: f64, xi: f64, tol: f64) -> Result<USeriesResult> {
    check_open_interval(xi)?;
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !c.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidArgument("c and λ must be finite".into()));
    }
    if xi == 0.0 {
        return Ok(USeriesResult {
            xi,
            value: 1.0,
            terms_used: 1,
            tail_estimate: 0.0,
            rounding_estimate: 0.0,
        });
    }
    let ratio = xi.abs() / 2.0;
    let mut gen = ScaledTerms::new(c, lambda, xi);
    let mut sum = TwoFloat::from(0.0);
    let mut largest: f64 = 0.0;
    let mut recent = [0.0f64; RUN_LENGTH];
    let mut run = 0;
    for k in 0..SERIES_MAX_TERMS {
        let term = gen.current();
        sum += term;
        let t = term.hi().abs();
        if !t.is_finite() {
            return Err(Error::RecurrenceOverflow { last_valid: k });
        }
        largest = largest.max(t);
        recent[k % RUN_LENGTH] = t;
        let s = sum.hi().abs().max(f64::MIN_POSITIVE);
        if t <= tol * s {
            run += 1;
        } else {
            run = 0;
        }
        if run >= RUN_LENGTH {
            let last = recent.iter().cloned().fold(0.0, f64::max);
            let tail = last * ratio / (1.0 - ratio) / s;
            if tail <= tol {
                let terms_used = k + 1;
                return Ok(USeriesResult {
                    xi,
                    value: sum.hi(),
                    terms_used,
                    tail_estimate: tail,
                    rounding_estimate: DD_EPS * terms_used as f64 * largest / s,
                });
            }
        }
        gen.advance();
    }
    Err(Error::SeriesStall {
        xi,
        terms: SERIES_MAX_TERMS,
    })
}

/// Per-mode translation factors `U(ξ; -χₙ) = ψₙ(-1+ξ)/ψₙ(-1)` for
/// `ξ ∈ (-2, 2]`.
///
/// At `ξ = 2` the factor is the parity `(-1)ⁿ`. Elsewhere the series is
/// summed; a certified mode whose error estimate exceeds `tol` is an error,
/// while such a tail mode (`n ≥ N/2`) is reported as `None`.
pub fn mode_factors(basis: &ProlateBasis, xi: f64, tol: f64) -> Result<Vec<Option<f64>>> {
    let n_modes = basis.truncation();
    if xi == 2.0 {
        return Ok((0..n_modes)
            .map(|n| Some(if n % 2 == 0 { 1.0 } else { -1.0 }))
            .collect());
    }
    check_open_interval(xi)?;
    let certified = basis.certified_modes();
    let mut out = Vec::with_capacity(n_modes);
    for n in 0..n_modes {
        let res = u_series_scalar(basis.c(), -basis.chi()[n], xi, tol);
        let factor = match res {
            Ok(r) if r.error_estimate() <= tol => Some(r.value),
            Ok(r) if n < certified => {
                return Err(Error::SeriesUnreliable {
                    mode: n,
                    estimate: r.error_estimate(),
                })
            }
            Err(e) if n < certified => return Err(e),
            _ => None,
        };
        out.push(factor);
    }
    Ok(out)
}

/// `U(ξ; T)[f]` computed spectrally: each ψₙ component of `f` is scaled by
/// its translation factor. Tail modes without a reliable factor are dropped.
pub fn u_operator_apply(
    basis: &ProlateBasis,
    xi: f64,
    f: &CoeffVector,
    tol: f64,
) -> Result<CoeffVector> {
    if f.len() != basis.truncation() {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has length {}, basis has {}",
            f.len(),
            basis.truncation()
        )));
    }
    if xi == 0.0 {
        return Ok(f.clone());
    }
    let factors = mode_factors(basis, xi, tol)?;
    let amplitudes: Vec<Complex64> = basis
        .analyze(f)
        .into_iter()
        .zip(&factors)
        .map(|(a, s)| a * s.unwrap_or(0.0))
        .collect();
    Ok(basis.synthesize(&amplitudes))
}

/// Matrix of `U(ξ; T)` in the Legendre basis from the spectral factors.
pub fn u_operator_matrix_spectral(
    basis: &ProlateBasis,
    xi: f64,
    tol: f64,
) -> Result<OperatorMatrix> {
    let factors = mode_factors(basis, xi, tol)?;
    let diag: Vec<Complex64> = factors
        .iter()
        .map(|s| Complex64::new(s.unwrap_or(0.0), 0.0))
        .collect();
    Ok(basis.operator_from_eigenvalues(&diag))
}

/// `Σ_{k≤K} ξᵏ U_k(T) / k!` with the recurrence run on the Galerkin matrix of
/// `T` itself, in double-double.
pub fn u_operator_matrix_series(c: f64, n: usize, xi: f64, k_max: usize) -> Result<OperatorMatrix> {
    check_open_interval(xi)?;
    if k_max > SERIES_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "K = {k_max} exceeds {SERIES_MAX_TERMS}"
        )));
    }
    if xi == 0.0 {
        return Ok(OperatorMatrix::identity(n));
    }
    let t = assemble_heun_matrix(c, n)?;
    let hb = t.half_bandwidth();
    let zero = TwoFloat::from(0.0);
    let c2 = TwoFloat::new_mul(c, c);
    let xi_dd = TwoFloat::from(xi);
    let xi2 = xi_dd * xi;
    let xi3 = xi2 * xi;

    let mut b0 = vec![zero; n * n];
    for i in 0..n {
        b0[i * n + i] = TwoFloat::from(1.0);
    }
    let mut b1 = vec![zero; n * n];
    let mut b2 = vec![zero; n * n];
    let mut sum = b0.clone();
    for k in 0..k_max {
        let kf = k as f64;
        let shift = c2 + kf * (kf + 1.0);
        let denom = 2.0 * (kf + 1.0) * (kf + 1.0);
        let mut next = vec![zero; n * n];
        for i in 0..n {
            let lo = i.saturating_sub(hb);
            let hi = (i + hb + 1).min(n);
            for j in 0..n {
                let mut tb = b0[i * n + j] * shift;
                for l in lo..hi {
                    let til = t.get(i, l);
                    if til != 0.0 {
                        tb += b0[l * n + j] * til;
                    }
                }
                let v = (xi_dd * tb - c2 * xi2 * b1[i * n + j] * 2.0 + c2 * xi3 * b2[i * n + j])
                    / denom;
                next[i * n + j] = v;
            }
        }
        if next.iter().any(|v| !v.hi().is_finite()) {
            return Err(Error::RecurrenceOverflow { last_valid: k });
        }
        for (s, v) in sum.iter_mut().zip(&next) {
            *s += *v;
        }
        b2 = std::mem::replace(&mut b1, std::mem::replace(&mut b0, next));
    }
    let real: Vec<f64> = sum.iter().map(|v| v.hi()).collect();
    OperatorMatrix::from_real(n, &real)
}

/// Residual of `[(1-y²)∂²_y - 2y∂_y - c²y² - λ] U(y+1; λ)` on `y_grid`, with
/// fourth-order centered differences of step `h`.
pub fn heun_ode_residual(c: f64, lambda: f64, y_grid: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(1e-4..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "step h = {h} is outside [1e-4, 1e-2]"
        )));
    }
    const TOL: f64 = 1e-16;
    let u = |y: f64| u_series_scalar(c, lambda, y + 1.0, TOL).map(|r| r.value);
    y_grid
        .iter()
        .map(|&y| {
            if !(y - 2.0 * h > -1.0 && y + 2.0 * h < 1.0) {
                return Err(Error::StencilOutOfDomain { y });
            }
            let f = [
                u(y - 2.0 * h)?,
                u(y - h)?,
                u(y)?,
                u(y + h)?,
                u(y + 2.0 * h)?,
            ];
            let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
            let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
            Ok((1.0 - y * y) * d2 - 2.0 * y * d1 - (c * c * y * y + lambda) * f[2])
        })
        .collect()
}
