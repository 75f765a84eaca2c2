//! Nyström discretization of the sinc-kernel operator, used as an oracle
//! independent of the Legendre–Galerkin path.
//!
//! The kernel `sin(c(x-t)) / (π(x-t))` is sampled on Gauss–Legendre nodes and
//! symmetrized with `√wᵢ K(xᵢ,xⱼ) √wⱼ`. Eigenfunctions are extended off the
//! grid with the Nyström interpolant, which also gives their derivative, so
//! `χ` follows from the quadratic form `∫(1-x²)φ'² + c²∫x²φ²` without touching
//! any Legendre machinery.

use std::f64::consts::PI;

use crate::ddmath::{div, lu_factor, lu_solve, sin_cos, sqrt};
use crate::error::{Error, Result};
use crate::legendre::{gauss_legendre_rule, QuadRule};
use crate::linalg::symmetric_eigen;

use twofloat::TwoFloat;

/// Default node count for the oracle.
pub const NYSTROM_NODES: usize = 400;

pub(crate) fn sinc_kernel(c: f64, u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let z = c * u;
        let z2 = z * z;
        c / PI * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0)))
    } else {
        (c * u).sin() / (PI * u)
    }
}

/// `∂ₓ [sin(c u) / (π u)]` at `u = x - t`.
fn sinc_kernel_dx(c: f64, u: f64) -> f64 {
    if u.abs() < 1e-3 {
        let z = c * u;
        let z2 = z * z;
        // d/du of (c/π)(1 - z²/6 + z⁴/120 - z⁶/5040)
        c * c / PI * z * (-1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0)
    } else {
        let z = c * u;
        (z * z.cos() - z.sin()) / (PI * u * u)
    }
}

/// Eigenpairs of the discretized sinc operator, sorted by decreasing μ.
#[derive(Debug, Clone)]
pub struct NystromSpectrum {
    c: f64,
    rule: QuadRule,
    mu: Vec<f64>,
    /// `values[k][i] = φₖ(xᵢ)`, normalized so `Σ wᵢ φₖ(xᵢ)² = 1` and `φₖ(1) > 0`.
    values: Vec<Vec<f64>>,
}

impl NystromSpectrum {
    pub fn solve(c: f64, nodes: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Nyström oracle needs c > 0, got {c}"
            )));
        }
        let rule = gauss_legendre_rule(nodes)?;
        let x = rule.nodes();
        let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
        let mut s = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            for j in 0..=i {
                let v = sw[i] * sinc_kernel(c, x[i] - x[j]) * sw[j];
                s[i * nodes + j] = v;
                s[j * nodes + i] = v;
            }
        }
        let eig = symmetric_eigen(&s, nodes)?;
        let mut mu = Vec::with_capacity(nodes);
        let mut values = Vec::with_capacity(nodes);
        for k in (0..nodes).rev() {
            let lam = eig.values[k];
            let mut phi: Vec<f64> = (0..nodes)
                .map(|i| eig.vectors[i * nodes + k] / sw[i])
                .collect();
            let at_one = interpolate(c, &rule, lam, &phi, 1.0);
            if at_one < 0.0 {
                phi.iter_mut().for_each(|v| *v = -*v);
            }
            mu.push(lam);
            values.push(phi);
        }
        Ok(Self {
            c,
            rule,
            mu,
            values,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Eigenvalues μ₀ ≥ μ₁ ≥ … of the discretized operator.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn node_values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// Nyström interpolant `φₖ(x) = μₖ⁻¹ Σⱼ wⱼ K(x, xⱼ) φₖ(xⱼ)`.
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        interpolate(self.c, &self.rule, self.mu[k], &self.values[k], x)
    }

    pub fn eval_derivative(&self, k: usize, x: f64) -> f64 {
        let s: f64 = self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values[k])
            .map(|((&t, &w), &v)| w * sinc_kernel_dx(self.c, x - t) * v)
            .sum();
        s / self.mu[k]
    }

    /// χₖ from the Rayleigh quotient of `-T` on the k-th eigenfunction.
    pub fn chi(&self, k: usize) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &v) in self
            .rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values[k])
        {
            let d = self.eval_derivative(k, x);
            num += w * ((1.0 - x * x) * d * d + self.c * self.c * x * x * v * v);
            den += w * v * v;
        }
        num / den
    }
}

/// Parity-split Nyström discretization of the finite Fourier kernel
/// `e^{icxt}`: on even functions it acts as `2∫₀¹ cos(cxt)`, on odd ones as
/// `2i∫₀¹ sin(cxt)`. Its eigenvalues decay like `√μₙ`, so eigenfunctions stay
/// resolved much further down the spectrum than those of the sinc kernel.
#[derive(Debug, Clone)]
pub struct NystromFourier {
    c: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Signed eigenvalue of the real even/odd kernel, indexed by mode n.
    kernel_eigenvalues: Vec<f64>,
    values: Vec<Vec<f64>>,
    /// χ for the leading modes, from the double-double refinement.
    refined_chi: Vec<f64>,
}

/// Modes per parity refined by double-double inverse iteration.
pub const REFINED_PER_PARITY: usize = 8;

impl NystromFourier {
    /// `nodes` is the size of the full Gauss–Legendre rule on [-1, 1]; only
    /// its positive half is used.
    pub fn solve(c: f64, nodes: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Nyström oracle needs c > 0, got {c}"
            )));
        }
        let rule = gauss_legendre_rule(2 * (nodes / 2))?;
        let half: Vec<(f64, f64)> = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .filter(|(x, _)| **x > 0.0)
            .map(|(&x, &w)| (x, w))
            .collect();
        let m = half.len();
        let x: Vec<f64> = half.iter().map(|p| p.0).collect();
        let w: Vec<f64> = half.iter().map(|p| p.1).collect();
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();

        let mut per_parity: Vec<Vec<(f64, Vec<f64>)>> = Vec::new();
        for parity in 0..2 {
            let mut a = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..=i {
                    let arg = c * x[i] * x[j];
                    let k = if parity == 0 { arg.cos() } else { arg.sin() };
                    let v = 2.0 * sw[i] * k * sw[j];
                    a[i * m + j] = v;
                    a[j * m + i] = v;
                }
            }
            let eig = symmetric_eigen(&a, m)?;
            let mut pairs: Vec<(f64, Vec<f64>)> = (0..m)
                .map(|k| {
                    // Half-interval normalization: ∫₋₁¹ φ² = 2 Σ wᵢ φᵢ².
                    let phi = (0..m)
                        .map(|i| eig.vectors[i * m + k] / sw[i] / 2f64.sqrt())
                        .collect();
                    (eig.values[k], phi)
                })
                .collect();
            pairs.sort_by(|p, q| q.0.abs().total_cmp(&p.0.abs()));
            per_parity.push(pairs);
        }

        let kernels = DdKernels::new(c, &x);
        let mut refined_chi = vec![0.0; 2 * REFINED_PER_PARITY.min(m)];
        for (parity, pairs) in per_parity.iter_mut().enumerate() {
            for (rank, pair) in pairs.iter_mut().take(REFINED_PER_PARITY).enumerate() {
                let (ev, phi, chi) = kernels.refine(parity, pair.0, &pair.1, &w)?;
                *pair = (ev, phi);
                refined_chi[2 * rank + parity] = chi;
            }
        }

        let mut kernel_eigenvalues = Vec::with_capacity(2 * m);
        let mut values = Vec::with_capacity(2 * m);
        let mut odd = per_parity.pop().unwrap().into_iter();
        let mut even = per_parity.pop().unwrap().into_iter();
        for n in 0..2 * m {
            let (ev, phi) = if n % 2 == 0 { even.next() } else { odd.next() }.unwrap();
            kernel_eigenvalues.push(ev);
            values.push(phi);
        }
        let mut out = Self {
            c,
            nodes: x,
            weights: w,
            kernel_eigenvalues,
            values,
            refined_chi,
        };
        for n in 0..out.values.len() {
            if out.eval(n, 1.0) < 0.0 {
                out.values[n].iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(out)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Number of modes (both parities).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// μₙ = (c/2π) λₙ².
    pub fn mu(&self, n: usize) -> f64 {
        self.c / (2.0 * PI) * self.lambda(n).powi(2)
    }

    /// λₙ = |eigenvalue| of the discretized `F_c` on the n-th mode.
    pub fn lambda(&self, n: usize) -> f64 {
        self.kernel_eigenvalues[n].abs()
    }

    /// Eigenfunction on [-1, 1] through the Nyström interpolant.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        let (v, _) = self.eval_with_derivative(n, x);
        v
    }

    fn eval_with_derivative(&self, n: usize, x: f64) -> (f64, f64) {
        let c = self.c;
        let mut v = 0.0;
        let mut d = 0.0;
        for ((&t, &w), &p) in self.nodes.iter().zip(&self.weights).zip(&self.values[n]) {
            let arg = c * x * t;
            if n % 2 == 0 {
                v += w * arg.cos() * p;
                d -= w * c * t * arg.sin() * p;
            } else {
                v += w * arg.sin() * p;
                d += w * c * t * arg.cos() * p;
            }
        }
        let scale = 2.0 / self.kernel_eigenvalues[n];
        (v * scale, d * scale)
    }

    /// χₙ from the Rayleigh quotient `[∫(1-x²)φ'² + c²∫x²φ²] / ∫φ²`.
    pub fn chi(&self, n: usize) -> f64 {
        if let Some(&chi) = self.refined_chi.get(n) {
            return chi;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let (v, d) = self.eval_with_derivative(n, x);
            num += w * ((1.0 - x * x) * d * d + self.c * self.c * x * x * v * v);
            den += w * v * v;
        }
        num / den
    }
}

/// `2cos(c xᵢ xⱼ)` and `2sin(c xᵢ xⱼ)` on the half-rule nodes, in double-double.
struct DdKernels {
    c: f64,
    x: Vec<f64>,
    cos: Vec<TwoFloat>,
    sin: Vec<TwoFloat>,
}

impl DdKernels {
    fn new(c: f64, x: &[f64]) -> Self {
        let m = x.len();
        let mut cos = vec![TwoFloat::from(0.0); m * m];
        let mut sin = cos.clone();
        for i in 0..m {
            let cx = TwoFloat::new_mul(c, x[i]);
            for j in 0..=i {
                let (s, co) = sin_cos(cx * x[j]);
                cos[i * m + j] = co * 2.0;
                cos[j * m + i] = co * 2.0;
                sin[i * m + j] = s * 2.0;
                sin[j * m + i] = s * 2.0;
            }
        }
        Self {
            c,
            x: x.to_vec(),
            cos,
            sin,
        }
    }

    /// Inverse iteration on `K W` with shift `shift`, then χ from the
    /// Rayleigh quotient with the interpolant derivative, all in
    /// double-double. Returns the refined kernel eigenvalue, node values
    /// (normalized on [-1, 1]) and χ.
    fn refine(
        &self,
        parity: usize,
        shift: f64,
        start: &[f64],
        w: &[f64],
    ) -> Result<(f64, Vec<f64>, f64)> {
        let m = self.x.len();
        let (k, dk) = if parity == 0 {
            (&self.cos, &self.sin)
        } else {
            (&self.sin, &self.cos)
        };
        let mut lu: Vec<TwoFloat> = (0..m * m)
            .map(|idx| {
                let v = k[idx] * w[idx % m];
                if idx / m == idx % m {
                    v - shift
                } else {
                    v
                }
            })
            .collect();
        let perm = lu_factor(&mut lu, m).ok_or(Error::SpectralFailure {
            index: 0,
            iterations: 0,
        })?;
        let mut y: Vec<TwoFloat> = start.iter().map(|&v| TwoFloat::from(v)).collect();
        for _ in 0..3 {
            y = lu_solve(&lu, &perm, &y);
            let scale = y.iter().map(|v| v.hi().abs()).fold(0.0, f64::max);
            y.iter_mut().for_each(|v| *v /= scale);
        }

        // ν from the Rayleigh quotient of the symmetric form.
        let wy: Vec<TwoFloat> = y.iter().zip(w).map(|(&v, &wi)| v * wi).collect();
        let kwy: Vec<TwoFloat> = (0..m)
            .map(|i| {
                let mut s = TwoFloat::from(0.0);
                for j in 0..m {
                    s += k[i * m + j] * wy[j];
                }
                s
            })
            .collect();
        let mut num = TwoFloat::from(0.0);
        let mut den = TwoFloat::from(0.0);
        for i in 0..m {
            num += wy[i] * kwy[i];
            den += wy[i] * y[i];
        }
        let nu = div(num, den);
        let norm = sqrt(den * 2.0);

        // Interpolant and its derivative at the nodes.
        let mut qnum = TwoFloat::from(0.0);
        let mut qden = TwoFloat::from(0.0);
        let c = self.c;
        for i in 0..m {
            let v = div(kwy[i], nu);
            let mut d = TwoFloat::from(0.0);
            for j in 0..m {
                d += dk[i * m + j] * wy[j] * self.x[j];
            }
            d = div(d * c, nu);
            if parity == 0 {
                d = -d;
            }
            let xi = self.x[i];
            qnum += (d * d * (1.0 - xi * xi) + v * v * (c * c * xi * xi)) * w[i];
            qden += v * v * w[i];
        }
        let chi = div(qnum, qden).hi();
        let phi = y.iter().map(|&v| div(v, norm).hi()).collect();
        Ok((nu.hi(), phi, chi))
    }
}

fn interpolate(c: f64, rule: &QuadRule, mu: f64, phi: &[f64], x: f64) -> f64 {
    let s: f64 = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(phi)
        .map(|((&t, &w), &v)| w * sinc_kernel(c, x - t) * v)
        .sum();
    s / mu
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_series_branch_is_continuous() {
        for c in [0.5, 3.0, 9.0] {
            for u in [0.99e-4, 1.01e-4, 0.99e-3, 1.01e-3] {
                let h = 1e-7;
                let fd = (sinc_kernel(c, u + h) - sinc_kernel(c, u - h)) / (2.0 * h);
                assert!((fd - sinc_kernel_dx(c, u)).abs() < 1e-6 * c * c * c);
                let direct = (c * u).sin() / (PI * u);
                assert!((sinc_kernel(c, u) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn trace_and_bounds() {
        let s = NystromSpectrum::solve(1.0, 80).unwrap();
        let trace: f64 = s.mu().iter().sum();
        assert!((trace - 2.0 / PI).abs() < 1e-12);
        assert!(s.mu()[0] < 1.0 && s.mu()[0] > s.mu()[1]);
        assert!(NystromSpectrum::solve(0.0, 10).is_err());
    }

    #[test]
    fn fourier_split_matches_sinc_spectrum() {
        let q = NystromSpectrum::solve(2.0, 120).unwrap();
        let f = NystromFourier::solve(2.0, 120).unwrap();
        for n in 0..8 {
            assert!((q.mu()[n] - f.mu(n)).abs() < 1e-13);
        }
        for n in 0..4 {
            assert!((q.eval(n, 0.3) - f.eval(n, 0.3)).abs() < 1e-9);
        }
        for n in 0..3 {
            assert!((q.chi(n) - f.chi(n)).abs() < 1e-10);
        }
        assert!(f.chi(3) > f.chi(2) && f.chi(2) > f.chi(1));
    }
}
