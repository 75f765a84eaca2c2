//! Prolate spheroidal wave functions as eigenvectors of the Heun operator
//! `T = (1-x²)∂² - 2x∂ - c²x²` in the orthonormal Legendre basis.
//!
//! `T` only couples `P̄ₙ` with `P̄ₙ±₂`, so the pentadiagonal Galerkin matrix
//! splits into two symmetric tridiagonal blocks (even and odd degrees), each
//! diagonalized by implicit QL. Parity of the computed modes is therefore
//! exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::legendre::{
    eval_legendre_orthonormal_extended, gauss_legendre_rule, legendre_operator_diag,
    legendre_vandermonde, orthonormal_endpoint_derivative, position_squared_matrix,
    BandedSymMatrix, CoeffVector,
};
use crate::linalg::{tridiagonal_eigen, OperatorMatrix};

/// Largest imaginary residue tolerated in `i⁻ⁿ⟨ψₙ, F_c ψₙ⟩`.
pub const CONVENTION_TOL: f64 = 1e-8;

/// Galerkin matrix of `T` on `P̄₀ … P̄_{N-1}`: `diag(-n(n+1)) - c² X²` with the
/// exact projection of `x²`.
pub fn assemble_heun_matrix(c: f64, n: usize) -> Result<BandedSymMatrix> {
    check_bandwidth(c)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Heun matrix needs N >= 2, got {n}"
        )));
    }
    let x2 = position_squared_matrix(n);
    let mut m = BandedSymMatrix::new(n, 2);
    let c2 = c * c;
    for (k, d) in legendre_operator_diag(n).into_iter().enumerate() {
        m.set(k, k, d - c2 * x2.get(k, k));
        if k + 2 < n {
            m.set(k, k + 2, -c2 * x2.get(k, k + 2));
        }
    }
    Ok(m)
}

fn check_bandwidth(c: f64) -> Result<()> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth c must be finite and >= 0, got {c}"
        )));
    }
    Ok(())
}

/// Truncated prolate basis at bandwidth `c`.
#[derive(Debug, Clone)]
pub struct ProlateBasis {
    c: f64,
    n_trunc: usize,
    psi: Vec<Vec<f64>>,
    chi: Vec<f64>,
    endpoint_minus: Vec<f64>,
    endpoint_plus: Vec<f64>,
    lambda: Vec<f64>,
    mu: Vec<f64>,
}

impl ProlateBasis {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    /// Number of modes certified against truncation error (`N / 2`).
    pub fn certified_modes(&self) -> usize {
        self.n_trunc / 2
    }

    /// Legendre coefficients of ψₙ.
    pub fn coeffs(&self, n: usize) -> &[f64] {
        &self.psi[n]
    }

    pub fn coeff_vector(&self, n: usize) -> CoeffVector {
        CoeffVector::from_real(&self.psi[n])
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn endpoint_minus(&self) -> &[f64] {
        &self.endpoint_minus
    }

    pub fn endpoint_plus(&self) -> &[f64] {
        &self.endpoint_plus
    }

    /// λₙ for the certified modes.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// μₙ = (c/2π) λₙ² for the certified modes.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Coordinates of `f` in the ψ basis: `⟨ψₙ, f⟩`.
    pub fn analyze(&self, f: &CoeffVector) -> Vec<Complex64> {
        self.psi
            .iter()
            .map(|col| col.iter().zip(&f.0).map(|(p, v)| v * p).sum())
            .collect()
    }

    /// `Σₙ aₙ ψₙ` in Legendre coefficients.
    pub fn synthesize(&self, amplitudes: &[Complex64]) -> CoeffVector {
        let mut out = CoeffVector::zeros(self.n_trunc);
        for (col, a) in self.psi.iter().zip(amplitudes) {
            for (o, p) in out.0.iter_mut().zip(col) {
                *o += a * p;
            }
        }
        out
    }

    /// Matrix of the operator acting as `ψₙ ↦ eigenvalues[n] ψₙ`; modes past
    /// `eigenvalues.len()` are mapped to zero.
    pub fn operator_from_eigenvalues(&self, eigenvalues: &[Complex64]) -> OperatorMatrix {
        let n = self.n_trunc;
        let mut m = OperatorMatrix::zeros(n);
        for (col, &ev) in self.psi.iter().zip(eigenvalues) {
            if ev == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..n {
                let a = ev * col[i];
                if col[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = m.get(i, j) + a * col[j];
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    /// `ψₙ'(-1)` from the Legendre expansion.
    pub fn derivative_at_minus_one(&self, n: usize) -> f64 {
        self.psi[n]
            .iter()
            .enumerate()
            .map(|(k, a)| a * orthonormal_endpoint_derivative(k, false))
            .sum()
    }
}

/// Diagonalize `T` at bandwidth `c` with truncation `n`, fix signs so that
/// `ψₙ(1) > 0`, and compute `λₙ`, `μₙ` for the certified modes.
pub fn solve_prolate(c: f64, n: usize) -> Result<ProlateBasis> {
    let t = assemble_heun_matrix(c, n)?;
    let mut modes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        let diag: Vec<f64> = idx.iter().map(|&k| t.get(k, k)).collect();
        let off: Vec<f64> = idx.windows(2).map(|w| t.get(w[0], w[1])).collect();
        let eig = tridiagonal_eigen(&diag, &off)?;
        for j in 0..idx.len() {
            let mut coeffs = vec![0.0; n];
            for (r, &k) in idx.iter().enumerate() {
                coeffs[k] = eig.vectors[r * idx.len() + j];
            }
            modes.push((-eig.values[j], coeffs));
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let plus_norms: Vec<f64> = eval_legendre_orthonormal_extended(n - 1, 1.0);
    let mut psi = Vec::with_capacity(n);
    let mut chi = Vec::with_capacity(n);
    let mut endpoint_plus = Vec::with_capacity(n);
    let mut endpoint_minus = Vec::with_capacity(n);
    for (x, mut coeffs) in modes {
        let mut at_one: f64 = coeffs.iter().zip(&plus_norms).map(|(a, p)| a * p).sum();
        if at_one < 0.0 {
            coeffs.iter_mut().for_each(|a| *a = -*a);
            at_one = -at_one;
        }
        let at_minus: f64 = coeffs
            .iter()
            .zip(&plus_norms)
            .enumerate()
            .map(|(k, (a, p))| if k % 2 == 0 { a * p } else { -a * p })
            .sum();
        chi.push(x);
        endpoint_plus.push(at_one);
        endpoint_minus.push(at_minus);
        psi.push(coeffs);
    }

    let mut basis = ProlateBasis {
        c,
        n_trunc: n,
        psi,
        chi,
        endpoint_minus,
        endpoint_plus,
        lambda: Vec::new(),
        mu: Vec::new(),
    };
    let certified = basis.certified_modes();
    let quad = FourierQuadrature::new(c, n)?;
    let mut lambda = Vec::with_capacity(certified);
    for k in 0..certified {
        lambda.push(quad.lambda(&basis, k)?);
    }
    basis.mu = lambda
        .iter()
        .map(|l| c / (2.0 * std::f64::consts::PI) * l * l)
        .collect();
    basis.lambda = lambda;
    Ok(basis)
}

/// ψₙ(x) by Legendre summation. For `|x| > 1` the series is continued
/// analytically (extrapolation).
pub fn pswf_eval(basis: &ProlateBasis, n: usize, x: f64) -> Result<f64> {
    if n >= basis.truncation() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: basis.truncation(),
        });
    }
    let p = eval_legendre_orthonormal_extended(basis.truncation() - 1, x);
    Ok(basis.coeffs(n).iter().zip(&p).map(|(a, b)| a * b).sum())
}

/// Tensor Gauss–Legendre rule and kernel table for `⟨ψ, F_c ψ⟩`.
struct FourierQuadrature {
    weights: Vec<f64>,
    vdm: Vec<f64>,
    kernel: Vec<Complex64>,
    order: usize,
    n: usize,
}

impl FourierQuadrature {
    fn new(c: f64, n: usize) -> Result<Self> {
        let order = n + c.ceil() as usize + 8;
        let rule = gauss_legendre_rule(order)?;
        let x = rule.nodes();
        let mut kernel = Vec::with_capacity(order * order);
        for &xi in x {
            for &xj in x {
                kernel.push(Complex64::from_polar(1.0, c * xi * xj));
            }
        }
        Ok(Self {
            weights: rule.weights().to_vec(),
            vdm: legendre_vandermonde(x, n),
            kernel,
            order,
            n,
        })
    }

    fn rayleigh(&self, coeffs: &[f64]) -> Complex64 {
        let q = self.order;
        let vals: Vec<f64> = (0..q)
            .map(|i| {
                let row = &self.vdm[i * self.n..(i + 1) * self.n];
                self.weights[i] * row.iter().zip(coeffs).map(|(p, a)| p * a).sum::<f64>()
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..q {
            let mut inner = Complex64::new(0.0, 0.0);
            for j in 0..q {
                inner += self.kernel[i * q + j] * vals[j];
            }
            acc += inner * vals[i];
        }
        acc
    }

    fn lambda(&self, basis: &ProlateBasis, n: usize) -> Result<f64> {
        let r = self.rayleigh(basis.coeffs(n));
        let lam = r * i_pow(n).conj();
        if lam.im.abs() > CONVENTION_TOL {
            return Err(Error::ConventionViolation {
                mode: n,
                residue: lam.im,
            });
        }
        Ok(lam.re)
    }
}

/// `iⁿ`.
pub fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `iⁿ λₙ` from the Rayleigh quotient `⟨ψₙ, F_c ψₙ⟩` by tensor quadrature.
pub fn fourier_eigenvalue(basis: &ProlateBasis, n: usize) -> Result<Complex64> {
    if n >= basis.certified_modes() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: basis.certified_modes(),
        });
    }
    let quad = FourierQuadrature::new(basis.c(), basis.truncation())?;
    Ok(i_pow(n) * quad.lambda(basis, n)?)
}

/// Raw Rayleigh quotient `⟨ψₙ, F_c ψₙ⟩`, without projecting onto the `iⁿ`
/// convention.
pub fn fourier_rayleigh_quotient(basis: &ProlateBasis, n: usize) -> Result<Complex64> {
    if n >= basis.truncation() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: basis.truncation(),
        });
    }
    let quad = FourierQuadrature::new(basis.c(), basis.truncation())?;
    Ok(quad.rayleigh(basis.coeffs(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn heun_matrix_at_zero_bandwidth_is_legendre_operator() {
        let m = assemble_heun_matrix(0.0, 4).unwrap();
        assert_eq!(m.diagonal(), &[0.0, -2.0, -6.0, -12.0]);
        assert!(m.band(1).iter().chain(m.band(2)).all(|&v| v == 0.0));
    }

    #[test]
    fn heun_matrix_first_entry() {
        // -∫ x² P̄₀² = -1/3 by a 4-point rule.
        let r = gauss_legendre_rule(4).unwrap();
        let oracle = -r.integrate(|x| x * x * 0.5);
        let m = assemble_heun_matrix(1.0, 2).unwrap();
        assert_abs_diff_eq!(m.get(0, 0), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn heun_matrix_is_symmetric_pentadiagonal() {
        let m = assemble_heun_matrix(2.5, 10).unwrap();
        let d = m.to_dense();
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(d[i * 10 + j], d[j * 10 + i]);
                if i.abs_diff(j) > 2 || i.abs_diff(j) == 1 {
                    assert_eq!(d[i * 10 + j], 0.0);
                }
            }
        }
        assert!(assemble_heun_matrix(-1.0, 10).is_err());
    }

    #[test]
    fn legendre_limit() {
        let b = solve_prolate(0.0, 16).unwrap();
        for (n, &x) in b.chi().iter().enumerate() {
            assert_abs_diff_eq!(x, (n * (n + 1)) as f64, epsilon = 1e-12);
            for (k, &a) in b.coeffs(n).iter().enumerate() {
                assert_abs_diff_eq!(a, if k == n { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
        for x in [-0.8, -0.1, 0.3, 1.0] {
            assert_abs_diff_eq!(
                pswf_eval(&b, 1, x).unwrap(),
                1.5f64.sqrt() * x,
                epsilon = 1e-14
            );
        }
        assert_abs_diff_eq!(b.lambda()[0], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn ordering_parity_and_endpoints() {
        let b = solve_prolate(2.0, 64).unwrap();
        for w in b.chi().windows(2) {
            assert!(w[0] < w[1]);
        }
        for n in 0..b.certified_modes() {
            for (k, &a) in b.coeffs(n).iter().enumerate() {
                if (k + n) % 2 == 1 {
                    assert_eq!(a, 0.0);
                }
            }
            assert!(b.endpoint_plus()[n] > 0.0);
            assert!(b.endpoint_minus()[n] != 0.0);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(
                b.endpoint_minus()[n],
                sign * b.endpoint_plus()[n],
                epsilon = 1e-12
            );
            let norm: f64 = b.coeffs(n).iter().map(|a| a * a).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
            for x in [0.1, 0.45, 0.9] {
                let p = pswf_eval(&b, n, x).unwrap();
                let m = pswf_eval(&b, n, -x).unwrap();
                assert_abs_diff_eq!(m, sign * p, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn eigen_residual() {
        let c = 3.0;
        let n_trunc = 64;
        let b = solve_prolate(c, n_trunc).unwrap();
        let t = assemble_heun_matrix(c, n_trunc).unwrap();
        for n in 0..=n_trunc / 2 {
            let v = b.coeffs(n);
            let tv = t.matvec(v);
            let res: f64 = tv
                .iter()
                .zip(v)
                .map(|(a, x)| (a + b.chi()[n] * x).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-10 * (1.0 + b.chi()[n]), "mode {n}: {res}");
        }
    }

    #[test]
    fn fourier_eigenvalues_relations() {
        let b = solve_prolate(1.5, 64).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for n in 0..b.certified_modes() {
            assert_abs_diff_eq!(
                b.mu()[n],
                1.5 / two_pi * b.lambda()[n].powi(2),
                epsilon = 1e-10
            );
        }
        for n in 0..8 {
            assert!(b.lambda()[n] > 0.0);
            assert!(b.lambda()[n] > b.lambda()[n + 1]);
            assert!(b.mu()[n] < 1.0);
            let z = fourier_eigenvalue(&b, n).unwrap();
            assert_abs_diff_eq!((z * i_pow(n).conj()).re, b.lambda()[n], epsilon = 1e-15);
        }
        assert!(matches!(
            fourier_eigenvalue(&b, 32),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(pswf_eval(&b, 64, 0.0).is_err());
    }

    #[test]
    fn small_bandwidth_lambda_tends_to_two() {
        // F_c[ψ₀] → ∫ P̄₀ · P̄₀-projection = 2 as c → 0; oracle is the direct
        // quadrature of ∫∫ P̄₀(x) e^{icxt} P̄₀(t) at c = 1e-4.
        let c = 1e-4;
        let r = gauss_legendre_rule(20).unwrap();
        let mut oracle = 0.0;
        for (&x, &wx) in r.nodes().iter().zip(r.weights()) {
            for (&t, &wt) in r.nodes().iter().zip(r.weights()) {
                oracle += wx * wt * 0.5 * (c * x * t).cos();
            }
        }
        let b = solve_prolate(c, 64).unwrap();
        assert_abs_diff_eq!(b.lambda()[0], oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(b.lambda()[0], 2.0, epsilon = 1e-8);
    }
}
