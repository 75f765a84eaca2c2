//! Orthonormal Legendre machinery: Gauss–Legendre quadrature, evaluation of
//! `P̄ₙ = √((2n+1)/2) Pₙ`, and the banded matrices of multiplication by `x`
//! and of the Legendre differential operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::OperatorMatrix;

/// Largest quadrature order accepted by [`gauss_legendre_rule`].
pub const MAX_RULE_ORDER: usize = 1_000_000;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| half * w).collect();
        (x, w)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre Pₙ(x) and Pₙ'(x) via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule of the given order, by Newton iteration from
/// Chebyshev-like initial guesses.
pub fn gauss_legendre_rule(order: usize) -> Result<QuadRule> {
    if order == 0 || order > MAX_RULE_ORDER {
        return Err(Error::RuleTooLarge { order });
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadRule { nodes, weights })
}

#[inline]
fn norm_factor(n: usize) -> f64 {
    ((2 * n + 1) as f64 / 2.0).sqrt()
}

/// Off-diagonal coefficient of multiplication by `x`: `x P̄ₙ = aₙ P̄ₙ₊₁ + aₙ₋₁ P̄ₙ₋₁`.
#[inline]
pub fn position_coefficient(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) / ((2.0 * nf + 1.0) * (2.0 * nf + 3.0)).sqrt()
}

/// `P̄₀(x), …, P̄_{n_max}(x)` for `|x| ≤ 1`.
pub fn eval_legendre_orthonormal(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "Legendre evaluation needs |x| <= 1, got {x}"
        )));
    }
    Ok(eval_legendre_orthonormal_extended(n_max, x))
}

/// Same recurrence as [`eval_legendre_orthonormal`] without the domain check;
/// for `|x| > 1` this is the polynomial continuation of the basis.
pub fn eval_legendre_orthonormal_extended(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(norm_factor(0));
    if n_max == 0 {
        return out;
    }
    out.push(x * out[0] / position_coefficient(0));
    for n in 1..n_max {
        let next =
            (x * out[n] - position_coefficient(n - 1) * out[n - 1]) / position_coefficient(n);
        out.push(next);
    }
    out
}

/// `P̄ₙ'(±1) = (±1)^{n+1} n(n+1)/2 · √((2n+1)/2)`.
pub fn orthonormal_endpoint_derivative(n: usize, at_plus_one: bool) -> f64 {
    let nf = n as f64;
    let mag = 0.5 * nf * (nf + 1.0) * norm_factor(n);
    if at_plus_one || n % 2 == 1 {
        mag
    } else {
        -mag
    }
}

/// Row-major `points.len() x n` matrix of `P̄_k(points[i])`.
pub fn legendre_vandermonde(points: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() * n);
    for &x in points {
        if n == 0 {
            continue;
        }
        out.extend(eval_legendre_orthonormal_extended(n - 1, x));
    }
    out
}

/// Default Legendre truncation for bandwidth `c`: `max(64, ⌈2c⌉ + 40)`.
pub fn default_truncation(c: f64) -> usize {
    64.max((2.0 * c).ceil() as usize + 40)
}

/// Coefficients in the orthonormal Legendre basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector(pub Vec<Complex64>);

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        if self.0.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        eval_legendre_orthonormal_extended(self.0.len() - 1, x)
            .iter()
            .zip(&self.0)
            .map(|(p, c)| c * p)
            .sum()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Samples of a function at the nodes of a quadrature rule.
#[derive(Debug, Clone)]
pub struct GridFunction<'a> {
    pub rule: &'a QuadRule,
    pub values: Vec<Complex64>,
}

impl<'a> GridFunction<'a> {
    pub fn sample<F: Fn(f64) -> Complex64>(rule: &'a QuadRule, f: F) -> Self {
        Self {
            rule,
            values: rule.nodes().iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn from_coeffs(rule: &'a QuadRule, coeffs: &CoeffVector) -> Self {
        Self::sample(rule, |x| coeffs.eval(x))
    }

    /// Projection onto `P̄₀ … P̄_{n-1}` by quadrature.
    pub fn to_coeffs(&self, n: usize) -> CoeffVector {
        let mut out = CoeffVector::zeros(n);
        if n == 0 {
            return out;
        }
        for ((&x, &w), &v) in self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
        {
            let p = eval_legendre_orthonormal_extended(n - 1, x);
            for (o, pk) in out.0.iter_mut().zip(p) {
                *o += v * (w * pk);
            }
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Real symmetric banded matrix; `bands[d][i]` is entry `(i, i + d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymMatrix {
    dim: usize,
    bands: Vec<Vec<f64>>,
}

impl BandedSymMatrix {
    pub fn new(dim: usize, half_bandwidth: usize) -> Self {
        let bands = (0..=half_bandwidth)
            .map(|d| vec![0.0; dim.saturating_sub(d)])
            .collect();
        Self { dim, bands }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, d: usize) -> &[f64] {
        &self.bands[d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d >= self.bands.len() {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.bands[hi - lo][lo] = v;
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for (d, band) in self.bands.iter().enumerate() {
            for (i, &v) in band.iter().enumerate() {
                out[i * n + i + d] = v;
                out[(i + d) * n + i] = v;
            }
        }
        out
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_real(self.dim, &self.to_dense()).expect("square by construction")
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (d, band) in self.bands.iter().enumerate() {
            for (i, &a) in band.iter().enumerate() {
                out[i] += a * v[i + d];
                if d > 0 {
                    out[i + d] += a * v[i];
                }
            }
        }
        out
    }

    /// Product with itself, truncated to the same dimension.
    pub fn squared(&self) -> Self {
        let h = self.half_bandwidth();
        let n = self.dim;
        let mut out = Self::new(n, 2 * h);
        for i in 0..n {
            for j in i..(i + 2 * h + 1).min(n) {
                let lo = j.saturating_sub(h);
                let hi = (i + h).min(n - 1);
                let s: f64 = (lo..=hi).map(|k| self.get(i, k) * self.get(k, j)).sum();
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Tridiagonal matrix of multiplication by `x` in the orthonormal basis.
pub fn position_matrix(n: usize) -> Result<BandedSymMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "position matrix needs N >= 2, got {n}"
        )));
    }
    let mut m = BandedSymMatrix::new(n, 1);
    for k in 0..n - 1 {
        m.set(k, k + 1, position_coefficient(k));
    }
    Ok(m)
}

/// Exact Galerkin matrix of multiplication by `x²` (pentadiagonal). Unlike
/// `position_matrix(n).squared()` the last diagonal entry keeps the coupling
/// through `P̄_N`.
pub fn position_squared_matrix(n: usize) -> BandedSymMatrix {
    let mut m = BandedSymMatrix::new(n, 2);
    for k in 0..n {
        let below = if k > 0 {
            position_coefficient(k - 1).powi(2)
        } else {
            0.0
        };
        m.set(k, k, below + position_coefficient(k).powi(2));
        if k + 2 < n {
            m.set(
                k,
                k + 2,
                position_coefficient(k) * position_coefficient(k + 1),
            );
        }
    }
    m
}

/// Eigenvalues `-n(n+1)` of `(1-x²)∂² - 2x∂` on `P̄₀ … P̄_{N-1}`.
pub fn legendre_operator_diag(n: usize) -> Vec<f64> {
    (0..n).map(|k| -((k * (k + 1)) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_rules_closed_form() {
        let r1 = gauss_legendre_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_abs_diff_eq!(r1.weights()[0], 2.0, epsilon = 1e-15);

        let r2 = gauss_legendre_rule(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.nodes()[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes()[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(matches!(
            gauss_legendre_rule(0),
            Err(Error::RuleTooLarge { order: 0 })
        ));
        assert!(gauss_legendre_rule(MAX_RULE_ORDER + 1).is_err());
    }

    #[test]
    fn order_16_integrates_x30() {
        let r = gauss_legendre_rule(16).unwrap();
        assert_abs_diff_eq!(r.integrate(|x| x.powi(30)), 2.0 / 31.0, epsilon = 1e-13);
    }

    #[test]
    fn rule_invariants() {
        for order in [1, 2, 3, 7, 16, 33, 64, 129, 400] {
            let r = gauss_legendre_rule(order).unwrap();
            let wsum: f64 = r.weights().iter().sum();
            assert_abs_diff_eq!(wsum, 2.0, epsilon = 1e-13);
            for w in r.nodes().windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..order {
                assert_abs_diff_eq!(r.nodes()[i], -r.nodes()[order - 1 - i], epsilon = 1e-13);
                assert!(r.weights()[i] > 0.0);
                assert!(r.nodes()[i].abs() < 1.0);
            }
        }
    }

    #[test]
    fn monomial_exactness() {
        for p in [1usize, 2, 5, 10, 20] {
            let r = gauss_legendre_rule(p).unwrap();
            for d in 0..2 * p {
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                let q = r.integrate(|x| x.powi(d as i32));
                assert!(
                    (q - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                    "p={p} d={d}"
                );
            }
        }
    }

    #[test]
    fn orthonormal_values() {
        let v = eval_legendre_orthonormal(1, 0.0).unwrap();
        assert_abs_diff_eq!(v[0], 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);

        let v = eval_legendre_orthonormal(3, 1.0).unwrap();
        for (n, &x) in v.iter().enumerate() {
            assert_abs_diff_eq!(x, ((2 * n + 1) as f64 / 2.0).sqrt(), epsilon = 1e-14);
        }

        let v = eval_legendre_orthonormal(2, -1.0).unwrap();
        assert!(v[0] > 0.0 && v[1] < 0.0 && v[2] > 0.0);

        assert!(matches!(
            eval_legendre_orthonormal(3, 1.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn gram_matrix_is_identity() {
        let n = 40;
        let r = gauss_legendre_rule(n + 2).unwrap();
        let vdm = legendre_vandermonde(r.nodes(), n);
        for a in 0..n {
            for b in 0..n {
                let g: f64 = (0..r.order())
                    .map(|i| r.weights()[i] * vdm[i * n + a] * vdm[i * n + b])
                    .sum();
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-12, "({a},{b}) = {g}");
            }
        }
    }

    #[test]
    fn position_matrix_entries_match_quadrature() {
        // Independent oracle: ∫ x P̄ₘ P̄ₙ by a 20-point rule and closed forms.
        let r = gauss_legendre_rule(20).unwrap();
        let p0 = |_x: f64| 0.5f64.sqrt();
        let p1 = |x: f64| 1.5f64.sqrt() * x;
        let p2 = |x: f64| 2.5f64.sqrt() * 0.5 * (3.0 * x * x - 1.0);
        let a0 = r.integrate(|x| x * p0(x) * p1(x));
        let a1 = r.integrate(|x| x * p1(x) * p2(x));

        let m2 = position_matrix(2).unwrap();
        assert_abs_diff_eq!(m2.get(0, 1), a0, epsilon = 1e-14);
        assert_abs_diff_eq!(a0, 1.0 / 3f64.sqrt(), epsilon = 1e-14);
        let m3 = position_matrix(3).unwrap();
        assert_abs_diff_eq!(m3.get(1, 2), a1, epsilon = 1e-14);
        assert_abs_diff_eq!(a1, 2.0 / 15f64.sqrt(), epsilon = 1e-14);
        assert_eq!(m3.get(1, 2), m3.get(2, 1));
        assert_eq!(m3.get(1, 1), 0.0);
        assert!(position_matrix(1).is_err());
    }

    #[test]
    fn position_squared_properties() {
        let x = position_matrix(12).unwrap();
        let x2 = x.squared();
        assert_eq!(x2.half_bandwidth(), 2);
        // Odd bands vanish: x² preserves parity.
        assert!(x2.band(1).iter().all(|&v| v == 0.0));
        let e0 = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let q: f64 = x2.matvec(&e0).iter().zip(&e0).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(q, 1.0 / 3.0, epsilon = 1e-12);

        let exact = position_squared_matrix(12);
        for i in 0..11 {
            for j in 0..11 {
                assert_abs_diff_eq!(exact.get(i, j), x2.get(i, j), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn legendre_operator_eigenvalues() {
        assert_eq!(legendre_operator_diag(3), vec![0.0, -2.0, -6.0]);
        assert_eq!(legendre_operator_diag(1), vec![0.0]);
        assert_eq!(legendre_operator_diag(11)[10], -110.0);
    }

    #[test]
    fn endpoint_derivative_matches_finite_difference() {
        let h = 1e-6;
        for n in 0..6 {
            for &plus in &[true, false] {
                let x0: f64 = if plus { 1.0 } else { -1.0 };
                let inner = x0 - x0.signum() * h;
                let inner2 = x0 - x0.signum() * 2.0 * h;
                let f = |x: f64| eval_legendre_orthonormal(n, x).unwrap()[n];
                let fd = x0.signum() * (3.0 * f(x0) - 4.0 * f(inner) + f(inner2)) / (2.0 * h);
                let exact = orthonormal_endpoint_derivative(n, plus);
                assert!(
                    (fd - exact).abs() < 1e-5 * exact.abs().max(1.0),
                    "n={n} plus={plus}"
                );
            }
        }
    }

    #[test]
    fn grid_round_trip_for_low_degree_polynomials() {
        let r = gauss_legendre_rule(24).unwrap();
        let g = GridFunction::sample(&r, |x| Complex64::new(1.0 - 2.0 * x.powi(5), x * x));
        let c = g.to_coeffs(12);
        let back = GridFunction::from_coeffs(&r, &c);
        for (a, b) in g.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-10);
        }
        assert_abs_diff_eq!(g.l2_norm(), c.norm(), epsilon = 1e-12);
    }
}
