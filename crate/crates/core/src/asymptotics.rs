//! Limits of small and large bandwidth.
//!
//! For `c → 0` the finite Fourier transform collapses onto the first two
//! Legendre modes; the coefficients of the expansion in `T` are summed here in
//! exact rational arithmetic. For `c → ∞` the dilated prolate functions tend
//! to Hermite functions, `√(c/2π) λₙ → 1`, and the translation series is
//! compared with its Bessel and WKB forms.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::legendre::{default_truncation, gauss_legendre_rule};
use crate::linalg::OperatorMatrix;
use crate::prolate::{
    assemble_heun_matrix, fourier_rayleigh_quotient, i_pow, pswf_eval, solve_prolate, ProlateBasis,
};
use crate::ucalc::u_series_scalar;

/// Largest bandwidth accepted by [`small_c_operator`].
pub const SMALL_C_MAX: f64 = 0.2;

/// Largest number of product terms accepted by [`small_c_operator`].
pub const SMALL_C_MAX_TERMS: usize = 30;

/// Largest bandwidth accepted by [`large_c_eigen_convergence`].
pub const LARGE_C_MAX: f64 = 30.0;

/// Exact diagonal coefficients of the two-term small-c expansion
/// `F_c ≈ Σₘ (order0[m] - i c · order1[m]) |P̄ₘ⟩⟨P̄ₘ|`, where
///
/// ```text
/// order0[m] = 2 Σ_{k≤K} Πⱼ₌₁ᵏ (j(j-1) - m(m+1)) / (k!(k+1)!)
/// order1[m] = 2 Σ_{k≤K} Πⱼ₌₁ᵏ (j(j-1) - m(m+1)) / (k!(k+1)!) · k/(k+2)
/// ```
///
/// Modes with `m > K` are not annihilated by the truncated sum and carry
/// truncation error.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallCCoefficients {
    pub order0: Vec<BigRational>,
    pub order1: Vec<BigRational>,
}

pub fn small_c_coefficients(n: usize, k_max: usize) -> SmallCCoefficients {
    let two = BigRational::from_integer(BigInt::from(2));
    let mut order0 = Vec::with_capacity(n);
    let mut order1 = Vec::with_capacity(n);
    for m in 0..n {
        let lm = BigInt::from(m * (m + 1));
        let mut product = BigRational::one();
        let mut factorials = BigRational::one(); // k! (k+1)!
        let mut s0 = BigRational::zero();
        let mut s1 = BigRational::zero();
        for k in 0..=k_max {
            if k > 0 {
                let j = BigInt::from(k * (k - 1));
                product *= BigRational::from_integer(j - &lm);
                factorials *= BigRational::from_integer(BigInt::from(k * (k + 1)));
            }
            if product.is_zero() {
                break;
            }
            let term = &product / &factorials;
            s1 += &term * BigRational::new(BigInt::from(k), BigInt::from(k + 2));
            s0 += term;
        }
        order0.push(&two * s0);
        order1.push(&two * s1);
    }
    SmallCCoefficients { order0, order1 }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The order-c⁰ and order-c¹ matrices of the small-c expansion (the latter
/// is the coefficient of `c`).
pub fn small_c_order_terms(n: usize, k_max: usize) -> (OperatorMatrix, OperatorMatrix) {
    let coeffs = small_c_coefficients(n, k_max);
    let zeroth: Vec<Complex64> = coeffs
        .order0
        .iter()
        .map(|r| Complex64::new(rational_to_f64(r), 0.0))
        .collect();
    let first: Vec<Complex64> = coeffs
        .order1
        .iter()
        .map(|r| Complex64::new(0.0, -rational_to_f64(r)))
        .collect();
    (
        OperatorMatrix::from_diagonal(&zeroth),
        OperatorMatrix::from_diagonal(&first),
    )
}

/// Two-term small-c approximation of `F_c` in the Legendre basis.
pub fn small_c_operator(c: f64, n: usize, k_max: usize) -> Result<OperatorMatrix> {
    if !(0.0..=SMALL_C_MAX).contains(&c) {
        return Err(Error::InvalidArgument(format!(
            "small-c expansion needs 0 ≤ c ≤ {SMALL_C_MAX}, got {c}"
        )));
    }
    if k_max > SMALL_C_MAX_TERMS {
        return Err(Error::InvalidArgument(format!(
            "at most {SMALL_C_MAX_TERMS} product terms, got {k_max}"
        )));
    }
    let (zeroth, first) = small_c_order_terms(n, k_max);
    Ok(zeroth.add(&first.scale(Complex64::new(c, 0.0))))
}

/// `Πⱼ₌₁ᵏ (T + j(j-1))` on the Galerkin matrix of `T`.
pub fn heun_product_matrix(c: f64, n: usize, k: usize) -> Result<OperatorMatrix> {
    let t = assemble_heun_matrix(c, n)?.to_operator();
    let mut out = OperatorMatrix::identity(n);
    for j in 1..=k {
        let shift = OperatorMatrix::identity(n).scale(Complex64::new((j * (j - 1)) as f64, 0.0));
        out = t.add(&shift).matmul(&out);
    }
    Ok(out)
}

/// Hermite functions `h₀ … h_{m-1}` at `x`, unit norm on ℝ.
pub fn hermite_functions(m: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    if m == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if m > 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for n in 1..m.saturating_sub(1) {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Hermite functions sampled on a grid, with trapezoidal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    grid: Vec<f64>,
    weights: Vec<f64>,
    /// `values[n][i] = hₙ(grid[i])`.
    values: Vec<Vec<f64>>,
}

impl HermiteBasis {
    /// `m` functions on a uniform grid of step 0.02 over `|x| ≤ √(2m) + 6`.
    pub fn new(m: usize) -> Result<Self> {
        let half = (2.0 * m as f64).sqrt() + 6.0;
        let count = (2.0 * half / 0.02).ceil() as usize + 1;
        let step = 2.0 * half / (count - 1) as f64;
        let grid = (0..count).map(|i| -half + i as f64 * step).collect();
        Self::on_grid(m, grid)
    }

    /// `m` functions on an increasing grid.
    pub fn on_grid(m: usize, grid: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "need at least one Hermite function".into(),
            ));
        }
        if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "grid must be strictly increasing".into(),
            ));
        }
        let mut weights = vec![0.0; grid.len()];
        for (i, w) in grid.windows(2).enumerate() {
            let h = 0.5 * (w[1] - w[0]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        let mut values = vec![Vec::with_capacity(grid.len()); m];
        for &x in &grid {
            for (n, v) in hermite_functions(m, x).into_iter().enumerate() {
                values[n].push(v);
            }
        }
        Ok(Self {
            grid,
            weights,
            values,
        })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    /// `max |⟨hₘ, hₙ⟩ - δₘₙ|` with the grid weights.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.count() {
            for b in 0..=a {
                let dot: f64 = self.values[a]
                    .iter()
                    .zip(&self.values[b])
                    .zip(&self.weights)
                    .map(|((x, y), w)| x * y * w)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// L² distance between `f` sampled on the grid and `hₙ`.
    pub fn distance(&self, n: usize, samples: &[f64]) -> f64 {
        self.values[n]
            .iter()
            .zip(samples)
            .zip(&self.weights)
            .map(|((h, f), w)| (h - f).powi(2) * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// Eigenvalues of `e^{-iπH/2}` on `h₀ … h_{M-1}` under the convention that
/// makes it equal to the Fourier transform, `F hₙ = iⁿ hₙ`.
///
/// With `H = ½(∂² - x² - 1)` one gets `Hhₙ = -(n+1)hₙ` and the phases `iⁿ⁺¹`;
/// the returned sequence is `iⁿ`, i.e. it uses `H = ½(∂² - x² + 1)`.
pub fn hermite_exponential(m: usize) -> Vec<Complex64> {
    (0..m).map(i_pow).collect()
}

/// The dilation `D_c φ(x) = φ(√c x)` between `[-1, 1]` and `[-√c, √c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationMap {
    c: f64,
    scale: f64,
}

impl DilationMap {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dilation needs c > 0, got {c}"
            )));
        }
        Ok(Self { c, scale: c.sqrt() })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Half-width `√c` of the dilated interval.
    pub fn half_width(&self) -> f64 {
        self.scale
    }

    /// `x ∈ [-1, 1] ↦ √c x`.
    pub fn to_dilated(&self, x: f64) -> f64 {
        x * self.scale
    }

    /// `u ∈ [-√c, √c] ↦ u / √c`.
    pub fn to_original(&self, u: f64) -> f64 {
        u / self.scale
    }

    /// Samples of `D_c⁻¹ φ` (i.e. `φ(u/√c)`) on a dilated grid; points
    /// outside `[-√c, √c]` are `None`.
    pub fn pull_back<F: Fn(f64) -> f64>(&self, phi: F, grid: &[f64]) -> Vec<Option<f64>> {
        grid.iter()
            .map(|&u| {
                let x = self.to_original(u);
                (x.abs() <= 1.0).then(|| phi(x))
            })
            .collect()
    }

    /// Samples of `D_c g` (i.e. `g(√c x)`) on an original grid in `[-1, 1]`.
    pub fn push_forward<F: Fn(f64) -> f64>(&self, g: F, grid: &[f64]) -> Vec<Option<f64>> {
        grid.iter()
            .map(|&x| (x.abs() <= 1.0).then(|| g(self.to_dilated(x))))
            .collect()
    }
}

/// `c^{-1/4} ψₙ(u/√c)` on `[-√c, √c]` and zero outside: the unit-norm
/// dilated prolate function.
pub fn dilated_pswf(basis: &ProlateBasis, n: usize, u: f64) -> Result<f64> {
    let map = DilationMap::new(basis.c())?;
    let x = map.to_original(u);
    if x.abs() > 1.0 {
        return Ok(0.0);
    }
    Ok(basis.c().powf(-0.25) * pswf_eval(basis, n, x)?)
}

/// One row of [`large_c_eigen_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct LargeCRow {
    pub c: f64,
    pub n: usize,
    /// `√(c/2π) λₙ`.
    pub scaled_lambda: f64,
    /// `|√(c/2π) λₙ - 1|`.
    pub delta: f64,
    /// Angle between `⟨ψₙ, F_c ψₙ⟩` and `iⁿ`, in radians.
    pub phase_error: f64,
    /// L² distance between the dilated ψₙ and hₙ.
    pub hermite_distance: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = a.rem_euclid(two_pi);
    if r > PI {
        r - two_pi
    } else {
        r
    }
}

/// Convergence of the scaled finite Fourier transform to the Fourier
/// transform, mode by mode, for each bandwidth in `c_list`.
pub fn large_c_eigen_convergence(c_list: &[f64], n_max: usize) -> Result<Vec<LargeCRow>> {
    let half = (2.0 * n_max as f64 + 1.0).sqrt() + 8.0;
    let step = 0.01;
    let count = (2.0 * half / step).round() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| -half + i as f64 * step).collect();
    let hermite = HermiteBasis::on_grid(n_max + 1, grid)?;

    let mut rows = Vec::new();
    for &c in c_list {
        if !(c > 0.0 && c <= LARGE_C_MAX) {
            return Err(Error::InvalidArgument(format!(
                "large-c report needs 0 < c ≤ {LARGE_C_MAX}, got {c}"
            )));
        }
        let basis = solve_prolate(c, default_truncation(c))?;
        if n_max >= basis.certified_modes() {
            return Err(Error::IndexOutOfRange {
                index: n_max,
                len: basis.certified_modes(),
            });
        }
        let scale = (c / (2.0 * PI)).sqrt();
        for n in 0..=n_max {
            let scaled_lambda = scale * basis.lambda()[n];
            let raw = fourier_rayleigh_quotient(&basis, n)?;
            let phase_error = wrap_angle(raw.arg() - n as f64 * FRAC_PI_2).abs();
            let samples = hermite
                .grid()
                .iter()
                .map(|&u| dilated_pswf(&basis, n, u))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(LargeCRow {
                c,
                n,
                scaled_lambda,
                delta: (scaled_lambda - 1.0).abs(),
                phase_error,
                hermite_distance: hermite.distance(n, &samples),
            });
        }
    }
    Ok(rows)
}

/// Frobenius norm of `⟨hᵢ, (T̃/(2c) - (H + ½)) hⱼ⟩` for `i, j < m`, with
/// `T̃ = D_c⁻¹ T D_c` applied literally and the integrals taken over the
/// dilated interval `[-√c, √c]`. Here `H + ½ = ½(∂² - u²)`.
pub fn dilated_heun_defect(c: f64, m: usize) -> Result<f64> {
    let map = DilationMap::new(c)?;
    let w = map.half_width();
    let (nodes, weights) = gauss_legendre_rule(400)?.mapped(-w, w);
    let mut block = vec![0.0; m * m];
    for (&u, &wt) in nodes.iter().zip(&weights) {
        let h = hermite_functions(m + 1, u);
        let d1 = |n: usize| {
            let lower = if n > 0 {
                (n as f64 / 2.0).sqrt() * h[n - 1]
            } else {
                0.0
            };
            lower - ((n as f64 + 1.0) / 2.0).sqrt() * h[n + 1]
        };
        let d2 = |n: usize| (u * u - (2 * n + 1) as f64) * h[n];
        for j in 0..m {
            // T applied to x ↦ hⱼ(√c x), read back at x = u/√c.
            let t_tilde = (1.0 - u * u / c) * c * d2(j) - 2.0 * u * d1(j) - c * u * u * h[j];
            let oscillator = 0.5 * (d2(j) - u * u * h[j]);
            let defect = t_tilde / (2.0 * c) - oscillator;
            for i in 0..m {
                block[i * m + j] += wt * h[i] * defect;
            }
        }
    }
    Ok(block.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `I₀(z) = Σ (z²/4)ᵏ / (k!)²`.
pub fn bessel_i0(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
    }
}

/// Large-argument form `e^{√(2ε)} / (√(2π) (2ε)^{1/4})` of `I₀(√(2ε))`.
pub fn bessel_i0_asymptotic(eps: f64) -> f64 {
    let r = (2.0 * eps).sqrt();
    r.exp() / ((2.0 * PI).sqrt() * r.sqrt())
}

/// One row of [`bessel_limit_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    pub eps: f64,
    pub xi: f64,
    /// `U(ε/c²; λ_ref)` from the series.
    pub series: f64,
    /// `I₀(√(2ε))`.
    pub bessel: f64,
    pub deviation: f64,
}

/// Compares `U(ε/c²; λ_ref)` with `I₀(√(2ε))`.
pub fn bessel_limit_check(c: f64, eps_list: &[f64], lambda_ref: f64) -> Result<Vec<BesselRow>> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Bessel check needs c > 0, got {c}"
        )));
    }
    eps_list
        .iter()
        .map(|&eps| {
            let xi = eps / (c * c);
            if !(eps >= 0.0) || xi >= 2.0 {
                return Err(Error::Domain(format!(
                    "ε = {eps} gives ξ = ε/c² outside [0, 2)"
                )));
            }
            let series = u_series_scalar(c, lambda_ref, xi, 1e-14)?.value;
            let bessel = bessel_i0((2.0 * eps).sqrt());
            Ok(BesselRow {
                eps,
                xi,
                series,
                bessel,
                deviation: (series - bessel).abs(),
            })
        })
        .collect()
}

/// The two WKB branches `e^{±c s} / (√|y| (1-y²)^{1/4}) · ((1+s)/(1-s))^{λ/(4c)}`
/// with `s = √(1-y²)`.
fn wkb_branches(c: f64, lambda: f64, y: f64) -> (f64, f64) {
    let s = (1.0 - y * y).sqrt();
    let common = ((1.0 + s) / (1.0 - s)).powf(lambda / (4.0 * c))
        / (y.abs().sqrt() * (1.0 - y * y).powf(0.25));
    ((c * s).exp() * common, (-c * s).exp() * common)
}

/// WKB value `A·(growing branch) + B·(decaying branch)` with `A = 1/√(2πc)`
/// and `B = b_ratio · A`.
pub fn wkb_value(c: f64, lambda: f64, y: f64, b_ratio: f64) -> f64 {
    let a = 1.0 / (2.0 * PI * c).sqrt();
    let (grow, decay) = wkb_branches(c, lambda, y);
    a * grow + b_ratio * a * decay
}

/// One row of [`wkb_scalar_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct WkbRow {
    pub y: f64,
    /// `U(y+1; λ)` from the series.
    pub series: f64,
    /// WKB value with `B = 0`.
    pub wkb: f64,
    /// `|wkb / series - 1|`.
    pub deviation: f64,
    /// Same with `B = +A/10` and `B = -A/10`.
    pub deviation_b_plus: f64,
    pub deviation_b_minus: f64,
}

/// Compares the series with the WKB form on `y ∈ [-0.9, -0.1]`.
pub fn wkb_scalar_check(c: f64, lambda: f64, y_list: &[f64]) -> Result<Vec<WkbRow>> {
    if !(c >= 10.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "WKB check needs c ≥ 10, got {c}"
        )));
    }
    y_list
        .iter()
        .map(|&y| {
            if !(-0.9..=-0.1).contains(&y) {
                return Err(Error::Domain(format!(
                    "y = {y} is within 0.1 of a singular point"
                )));
            }
            let series = u_series_scalar(c, lambda, y + 1.0, 1e-14)?.value;
            let dev = |b: f64| (wkb_value(c, lambda, y, b) / series - 1.0).abs();
            Ok(WkbRow {
                y,
                series,
                wkb: wkb_value(c, lambda, y, 0.0),
                deviation: dev(0.0),
                deviation_b_plus: dev(0.1),
                deviation_b_minus: dev(-0.1),
            })
        })
        .collect()
}

/// Relative gap between the WKB form at `y = -1 + ε/c²` and its matching
/// limit `A √c e^{√(2ε)} / (2ε)^{1/4}`.
pub fn wkb_matching_deviation(c: f64, eps: f64, lambda: f64) -> Result<f64> {
    let xi = eps / (c * c);
    if !(eps > 0.0) || xi >= 1.0 || !(c > 0.0) {
        return Err(Error::Domain(format!(
            "matching point needs ε > 0 and ε/c² < 1, got ε = {eps}, c = {c}"
        )));
    }
    let a = 1.0 / (2.0 * PI * c).sqrt();
    let r = (2.0 * eps).sqrt();
    let limit = a * c.sqrt() * r.exp() / r.sqrt();
    Ok((wkb_value(c, lambda, -1.0 + xi, 0.0) / limit - 1.0).abs())
}
