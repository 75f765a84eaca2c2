//! Finite Fourier transform `F_c`, sinc operator `Q_c` and reflection `R` as
//! matrices in the orthonormal Legendre basis, both by direct quadrature and
//! rebuilt from the translation operators `U(ξ; T)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::legendre::{gauss_legendre_rule, legendre_vandermonde};
use crate::linalg::OperatorMatrix;
use crate::nystrom::sinc_kernel;
use crate::prolate::{assemble_heun_matrix, pswf_eval, ProlateBasis};
use crate::ucalc::{u_operator_matrix_series, u_series_scalar};

/// Largest entry drift tolerated when the direct quadrature order is doubled.
pub const DIRECT_DRIFT_TOL: f64 = 1e-9;

/// Largest per-mode drift tolerated when the ξ-rule order is doubled.
pub const XI_DRIFT_TOL: f64 = 1e-9;

/// Relative accuracy demanded of each translation factor.
pub const FACTOR_TOL: f64 = 1e-12;

/// Beyond this ξ the full variants use `ψₙ(-1+ξ)/ψₙ(-1)` directly.
pub const RATIO_SWITCH: f64 = 1.9;

/// Which integral identity a reconstruction uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// ξ ∈ [0, 2] with the kernel alone.
    Full,
    /// ξ ∈ [0, 1] with the reflected kernel folded in.
    Folded,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::Folded => "folded",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "folded" => Ok(Variant::Folded),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant '{other}', expected full or folded"
            ))),
        }
    }
}

/// Integral operator being rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Fourier,
    Sinc,
}

/// Smallest direct-quadrature order accepted for `(c, N)`.
pub fn min_direct_order(c: f64, n: usize) -> usize {
    n + c.ceil() as usize + 8
}

/// Smallest ξ-rule order accepted for bandwidth `c`.
pub fn min_xi_order(c: f64) -> usize {
    16 + (4.0 * c).ceil() as usize
}

fn check_bandwidth(c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "bandwidth must be finite and ≥ 0, got {c}"
        )))
    }
}

/// `⟨P̄ₘ, K P̄ₙ⟩ = Σᵢⱼ wᵢ wⱼ P̄ₘ(xᵢ) k(xᵢ, xⱼ) P̄ₙ(xⱼ)`.
fn tensor_matrix<K: Fn(f64, f64) -> Complex64>(
    n: usize,
    order: usize,
    kernel: &K,
) -> Result<OperatorMatrix> {
    let rule = gauss_legendre_rule(order)?;
    let x = rule.nodes();
    let w = rule.weights();
    let vdm = legendre_vandermonde(x, n);
    // inner[i][n] = Σⱼ k(xᵢ, xⱼ) wⱼ P̄ₙ(xⱼ)
    let mut inner = vec![Complex64::new(0.0, 0.0); order * n];
    for i in 0..order {
        for j in 0..order {
            let kw = kernel(x[i], x[j]) * w[j];
            let row = &vdm[j * n..(j + 1) * n];
            for (acc, &p) in inner[i * n..(i + 1) * n].iter_mut().zip(row) {
                *acc += kw * p;
            }
        }
    }
    let mut out = OperatorMatrix::zeros(n);
    for i in 0..order {
        let row = &vdm[i * n..(i + 1) * n];
        for (m, &pm) in row.iter().enumerate() {
            let a = pm * w[i];
            for k in 0..n {
                let v = out.get(m, k) + inner[i * n + k] * a;
                out.set(m, k, v);
            }
        }
    }
    Ok(out)
}

fn direct_with_check<K: Fn(f64, f64) -> Complex64>(
    c: f64,
    n: usize,
    q_order: usize,
    kernel: K,
) -> Result<OperatorMatrix> {
    check_bandwidth(c)?;
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let floor = min_direct_order(c, n);
    if q_order < floor {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {q_order} is below the floor {floor}"
        )));
    }
    let coarse = tensor_matrix(n, q_order, &kernel)?;
    let fine = tensor_matrix(n, 2 * q_order, &kernel)?;
    let drift = coarse.max_abs_diff(&fine);
    if drift > DIRECT_DRIFT_TOL {
        return Err(Error::QuadratureUnresolved { drift });
    }
    Ok(coarse)
}

/// Matrix of `F_c[φ](x) = ∫ e^{icxt} φ(t) dt` by tensor Gauss quadrature of
/// order `q_order`, checked against order `2 q_order`.
pub fn finite_fourier_direct(c: f64, n: usize, q_order: usize) -> Result<OperatorMatrix> {
    direct_with_check(c, n, q_order, |x, t| Complex64::from_polar(1.0, c * x * t))
}

/// Matrix of `Q_c[φ](x) = ∫ sin(c(x-t)) / (π(x-t)) φ(t) dt`, with the same
/// quadrature check as [`finite_fourier_direct`].
/// The result is real and symmetric to the last bit.
pub fn sinc_kernel_direct(c: f64, n: usize, q_order: usize) -> Result<OperatorMatrix> {
    let m = direct_with_check(c, n, q_order, |x, t| {
        Complex64::new(sinc_kernel(c, x - t), 0.0)
    })?;
    let mut real = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = 0.5 * (m.get(i, j).re + m.get(j, i).re);
            real[i * n + j] = v;
            real[j * n + i] = v;
        }
    }
    OperatorMatrix::from_real(n, &real)
}

/// Reflection `φ(x) ↦ φ(-x)`: `diag((-1)ⁿ)`.
pub fn reflect(n: usize) -> OperatorMatrix {
    let diag: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    OperatorMatrix::from_diagonal(&diag)
}

/// Galerkin matrix of `T` as a dense operator.
pub fn heun_operator(c: f64, n: usize) -> Result<OperatorMatrix> {
    Ok(assemble_heun_matrix(c, n)?.to_operator())
}

/// Weight multiplying `U(ξ; T)` on mode `n`, including the folded reflection
/// term `(-1)ⁿ`.
fn weight(kernel: Kernel, variant: Variant, c: f64, n: usize, xi: f64) -> Complex64 {
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    match kernel {
        Kernel::Fourier => {
            let forward = Complex64::from_polar(1.0, c * (1.0 - xi));
            match variant {
                Variant::Full => forward,
                Variant::Folded => forward + forward.conj() * parity,
            }
        }
        Kernel::Sinc => {
            let beta = |s: f64| sinc_kernel(c, s);
            match variant {
                Variant::Full => Complex64::new(beta(xi), 0.0),
                Variant::Folded => Complex64::new(beta(xi) + parity * beta(2.0 - xi), 0.0),
            }
        }
    }
}

/// Translation factors at one ξ node. A mode whose series cannot be certified
/// to `FACTOR_TOL` is `None` when it is a tail mode or its eigenvalue is at most
/// `FACTOR_TOL`, since leaving it out moves the rebuilt operator by no more
/// than that eigenvalue; for any other mode it is an error.
fn factors_at(
    basis: &ProlateBasis,
    kernel: Kernel,
    variant: Variant,
    xi: f64,
) -> Result<Vec<Option<f64>>> {
    if variant == Variant::Full && xi >= RATIO_SWITCH {
        return (0..basis.truncation())
            .map(|n| {
                Ok(Some(
                    pswf_eval(basis, n, -1.0 + xi)? / basis.endpoint_minus()[n],
                ))
            })
            .collect();
    }
    (0..basis.truncation())
        .map(|n| {
            let negligible = n >= basis.certified_modes()
                || match kernel {
                    Kernel::Fourier => basis.lambda()[n],
                    Kernel::Sinc => basis.mu()[n],
                }
                .abs()
                    <= FACTOR_TOL;
            match u_series_scalar(basis.c(), -basis.chi()[n], xi, FACTOR_TOL) {
                Ok(r) if r.error_estimate() <= FACTOR_TOL => Ok(Some(r.value)),
                Ok(r) if !negligible => Err(Error::SeriesUnreliable {
                    mode: n,
                    estimate: r.error_estimate(),
                }),
                Err(e) if !negligible => Err(e),
                _ => Ok(None),
            }
        })
        .collect()
}

fn mode_integrals_at_order(
    basis: &ProlateBasis,
    kernel: Kernel,
    variant: Variant,
    q_xi: usize,
) -> Result<Vec<Option<Complex64>>> {
    let upper = match variant {
        Variant::Full => 2.0,
        Variant::Folded => 1.0,
    };
    let (nodes, weights) = gauss_legendre_rule(q_xi)?.mapped(0.0, upper);
    let c = basis.c();
    let mut acc: Vec<Option<Complex64>> = vec![Some(Complex64::new(0.0, 0.0)); basis.truncation()];
    for (&xi, &w) in nodes.iter().zip(&weights) {
        let factors = factors_at(basis, kernel, variant, xi)?;
        for (n, (slot, f)) in acc.iter_mut().zip(factors).enumerate() {
            *slot = match (*slot, f) {
                (Some(s), Some(f)) => Some(s + weight(kernel, variant, c, n, xi) * (w * f)),
                _ => None,
            };
        }
    }
    Ok(acc)
}

/// Per-mode eigenvalues of the rebuilt operator,
/// `∫ α(ξ) ψₙ(-1+ξ)/ψₙ(-1) dξ`, with a doubling check on the ξ rule.
/// Tail modes whose translation factors are unreliable are returned as zero.
pub fn reconstructed_eigenvalues(
    basis: &ProlateBasis,
    kernel: Kernel,
    variant: Variant,
    q_xi: usize,
) -> Result<Vec<Complex64>> {
    let floor = min_xi_order(basis.c());
    if q_xi < floor {
        return Err(Error::InvalidArgument(format!(
            "ξ-rule order {q_xi} is below the floor {floor}"
        )));
    }
    let coarse = mode_integrals_at_order(basis, kernel, variant, q_xi)?;
    let fine = mode_integrals_at_order(basis, kernel, variant, 2 * q_xi)?;
    let mut out = Vec::with_capacity(coarse.len());
    for (n, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        match (a, b) {
            (Some(a), Some(b)) => {
                let drift = (a - b).norm();
                if drift > XI_DRIFT_TOL {
                    return Err(Error::XiQuadratureUnresolved { mode: n, drift });
                }
                out.push(*a);
            }
            _ => out.push(Complex64::new(0.0, 0.0)),
        }
    }
    Ok(out)
}

/// `F_c` rebuilt from `U(ξ; T)` (see [`Variant`]).
pub fn reconstruct_fourier(
    basis: &ProlateBasis,
    variant: Variant,
    q_xi: usize,
) -> Result<OperatorMatrix> {
    let ev = reconstructed_eigenvalues(basis, Kernel::Fourier, variant, q_xi)?;
    Ok(basis.operator_from_eigenvalues(&ev))
}

/// `Q_c` rebuilt from `U(ξ; T)` (see [`Variant`]).
pub fn reconstruct_sinc(
    basis: &ProlateBasis,
    variant: Variant,
    q_xi: usize,
) -> Result<OperatorMatrix> {
    let ev = reconstructed_eigenvalues(basis, Kernel::Sinc, variant, q_xi)?;
    let m = basis.operator_from_eigenvalues(&ev);
    // Q_c is real; drop the rounding-level imaginary parts.
    let real: Vec<f64> = m.entries().iter().map(|z| z.re).collect();
    OperatorMatrix::from_real(m.dim(), &real)
}

/// Folded reconstruction with the operator-valued integrand: each ξ node
/// carries the literal matrix series `Σ_{k≤K} ξᵏ U_k(T)/k!`.
pub fn reconstruct_literal(
    c: f64,
    n: usize,
    kernel: Kernel,
    q_xi: usize,
    k_max: usize,
) -> Result<OperatorMatrix> {
    check_bandwidth(c)?;
    let (nodes, weights) = gauss_legendre_rule(q_xi)?.mapped(0.0, 1.0);
    let reflection = reflect(n);
    let mut acc = OperatorMatrix::zeros(n);
    for (&xi, &w) in nodes.iter().zip(&weights) {
        let u = u_operator_matrix_series(c, n, xi, k_max)?;
        let (direct, reflected) = match kernel {
            Kernel::Fourier => {
                let e = Complex64::from_polar(1.0, c * (1.0 - xi));
                (e, e.conj())
            }
            Kernel::Sinc => (
                Complex64::new(sinc_kernel(c, xi), 0.0),
                Complex64::new(sinc_kernel(c, 2.0 - xi), 0.0),
            ),
        };
        let ru = reflection.matmul(&u);
        acc = acc.add(&u.scale(direct * w)).add(&ru.scale(reflected * w));
    }
    Ok(acc)
}

/// `‖AB - BA‖_F / (‖A‖_F ‖B‖_F)` on the leading `block × block` sub-matrix,
/// with the products formed at full size.
pub fn commutator_report(a: &OperatorMatrix, b: &OperatorMatrix, block: usize) -> Result<f64> {
    if a.dim() != b.dim() || block > a.dim() || block == 0 {
        return Err(Error::InvalidArgument(format!(
            "commutator of {}x{} and {}x{} on a {block} block",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    let comm = a.matmul(b).sub(&b.matmul(a)).leading_block(block);
    let denom = a.leading_block(block).frobenius_norm() * b.leading_block(block).frobenius_norm();
    if denom == 0.0 {
        return Ok(comm.frobenius_norm());
    }
    Ok(comm.frobenius_norm() / denom)
}

/// `(c/2π) F* F`, which equals `Q_c` (consistent with `μₙ = (c/2π) λₙ²`).
pub fn factorized_sinc(f: &OperatorMatrix, c: f64) -> OperatorMatrix {
    f.adjoint()
        .matmul(f)
        .scale(Complex64::new(c / (2.0 * PI), 0.0))
}
