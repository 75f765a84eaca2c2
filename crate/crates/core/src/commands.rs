//! Command implementations behind the `prolate` binary.
//!
//! Each command is a pure function of a [`RunConfig`]; the binary only parses
//! flags, renders the result and picks the exit code.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{
    bessel_limit_check, dilated_heun_defect, heun_product_matrix, large_c_eigen_convergence,
    small_c_operator, small_c_order_terms, wkb_matching_deviation, wkb_scalar_check, LARGE_C_MAX,
    SMALL_C_MAX, SMALL_C_MAX_TERMS,
};
use crate::error::{Error, Result};
use crate::io::{Check, Format, Params, Table, VerificationReport};
use crate::legendre::{default_truncation, eval_legendre_orthonormal, CoeffVector};
use crate::linalg::OperatorMatrix;
use crate::nystrom::{NystromFourier, NystromSpectrum, NYSTROM_NODES, REFINED_PER_PARITY};
use crate::prolate::{fourier_eigenvalue, pswf_eval, solve_prolate, ProlateBasis};
use crate::transforms::{
    commutator_report, finite_fourier_direct, heun_operator, min_direct_order, min_xi_order,
    reconstruct_fourier, reconstruct_sinc, reconstructed_eigenvalues, sinc_kernel_direct, Kernel,
    Variant,
};
use crate::ucalc::{
    heun_ode_residual, u_operator_apply, u_operator_matrix_series, u_operator_matrix_spectral,
    u_series_scalar,
};

/// Highest mode index used by the per-mode checks.
pub const CHECKED_MODES: usize = 8;

/// Settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub c: f64,
    /// Legendre truncation; 0 selects the default for `c`.
    pub n_trunc: usize,
    /// Overrides the headline tolerance of a suite.
    pub tol: Option<f64>,
    pub variant: Variant,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            n_trunc: 0,
            tol: None,
            variant: Variant::Folded,
            out: None,
            format: Format::Json,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "c must be finite and ≥ 0, got {}",
                self.c
            )));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "tolerance must be > 0, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> usize {
        if self.n_trunc == 0 {
            default_truncation(self.c)
        } else {
            self.n_trunc
        }
    }

    pub fn params(&self) -> Params {
        Params {
            c: self.c,
            n: self.truncation(),
        }
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Translation,
    Fourier,
    Sinc,
    LimitsSmall,
    LimitsLarge,
    Commutation,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Translation,
        Suite::Fourier,
        Suite::Sinc,
        Suite::LimitsSmall,
        Suite::LimitsLarge,
        Suite::Commutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Translation => "translation",
            Suite::Fourier => "fourier",
            Suite::Sinc => "sinc",
            Suite::LimitsSmall => "limits-small",
            Suite::LimitsLarge => "limits-large",
            Suite::Commutation => "commutation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

/// Operators that `export` can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportTarget {
    T,
    Fc,
    Qc,
    FcReconstructed,
    QcReconstructed,
}

impl ExportTarget {
    pub const ALL: [ExportTarget; 5] = [
        ExportTarget::T,
        ExportTarget::Fc,
        ExportTarget::Qc,
        ExportTarget::FcReconstructed,
        ExportTarget::QcReconstructed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExportTarget::T => "T",
            ExportTarget::Fc => "Fc",
            ExportTarget::Qc => "Qc",
            ExportTarget::FcReconstructed => "Fc-reconstructed",
            ExportTarget::QcReconstructed => "Qc-reconstructed",
        }
    }
}

impl fmt::Display for ExportTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExportTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExportTarget::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown operator '{s}'")))
    }
}

/// Exit status for an error: 2 for usage and I/O problems, 1 for numerical
/// failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_)
        | Error::Domain(_)
        | Error::IndexOutOfRange { .. }
        | Error::RuleTooLarge { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 2,
        _ => 1,
    }
}

fn count_violations<F: Fn(usize) -> bool>(len: usize, ok: F) -> f64 {
    (0..len).filter(|&i| !ok(i)).count() as f64
}

/// Modes `0..=CHECKED_MODES` that the basis certifies.
fn checked_modes(basis: &ProlateBasis) -> usize {
    (CHECKED_MODES + 1).min(basis.certified_modes())
}

/// Table of `n, χₙ, λₙ, μₙ, ψₙ(-1), ψₙ(1)` over the certified modes, with
/// basis invariants recorded in the report. With `oracle` the leading μₙ and
/// χₙ are also compared with the Nyström discretizations.
pub fn cmd_pswf(config: &RunConfig, oracle: bool) -> Result<(VerificationReport, Table)> {
    config.validate()?;
    let start = Instant::now();
    let params = config.params();
    let basis = solve_prolate(config.c, params.n)?;
    let m = basis.certified_modes();

    let mut table = Table::new();
    table.push("n", (0..m).map(|n| n as f64).collect());
    table.push("chi", basis.chi()[..m].to_vec());
    table.push("lambda", basis.lambda()[..m].to_vec());
    table.push("mu", basis.mu()[..m].to_vec());
    table.push("psi_minus", basis.endpoint_minus()[..m].to_vec());
    table.push("psi_plus", basis.endpoint_plus()[..m].to_vec());

    let mut report = VerificationReport::new("pswf", params);
    let chi = basis.chi();
    let mu = basis.mu();
    report.push(Check::at_most(
        "chi strictly increasing (violations)",
        count_violations(m.saturating_sub(1), |n| chi[n] < chi[n + 1]),
        0.0,
    ));
    let resolved = mu[..m].iter().take_while(|&&v| v > 1e-14).count();
    report.push(Check::at_most(
        "mu strictly decreasing while mu > 1e-14 (violations)",
        count_violations(resolved.saturating_sub(1), |n| mu[n] > mu[n + 1]),
        0.0,
    ));
    report.push(Check::at_most(
        "psi_n(1) > 0 (violations)",
        count_violations(m, |n| basis.endpoint_plus()[n] > 0.0),
        0.0,
    ));
    if config.c == 0.0 {
        let dev = (0..m)
            .map(|n| (chi[n] - (n * (n + 1)) as f64).abs())
            .fold(0.0, f64::max);
        report.push(Check::at_most(
            "chi_n = n(n+1) at c = 0",
            dev,
            config.tol_or(1e-10),
        ));
    }
    if oracle {
        if config.c <= 0.0 {
            return Err(Error::InvalidArgument(
                "the Nyström oracle needs c > 0".into(),
            ));
        }
        let (mu_dev, chi_dev) = oracle_deviation(&basis)?;
        let tol = config.tol_or(1e-8);
        report.push(Check::at_most("mu vs Nyström oracle, n <= 8", mu_dev, tol));
        report.push(Check::at_most(
            "chi vs Nyström oracle, n <= 8",
            chi_dev,
            tol,
        ));
    }
    report.wall_time = start.elapsed();
    Ok((report, table))
}

fn oracle_deviation(basis: &ProlateBasis) -> Result<(f64, f64)> {
    let fixture = nystrom_table(basis.c())?;
    let modes = checked_modes(basis);
    let mu = fixture.column("mu").unwrap_or_default();
    let chi = fixture.column("chi").unwrap_or_default();
    let mut mu_dev: f64 = 0.0;
    let mut chi_dev: f64 = 0.0;
    for n in 0..modes {
        mu_dev = mu_dev.max((basis.mu()[n] - mu[n]).abs());
        chi_dev = chi_dev.max((basis.chi()[n] - chi[n]).abs());
    }
    Ok((mu_dev, chi_dev))
}

fn nystrom_table(c: f64) -> Result<Table> {
    let sinc = NystromSpectrum::solve(c, NYSTROM_NODES)?;
    let fourier = NystromFourier::solve(c, NYSTROM_NODES)?;
    let m = (2 * REFINED_PER_PARITY).min(fourier.len());
    let mut table = Table::new();
    table.push("n", (0..m).map(|n| n as f64).collect());
    table.push("mu", sinc.mu()[..m].to_vec());
    table.push("lambda", (0..m).map(|n| fourier.lambda(n)).collect());
    table.push("chi", (0..m).map(|n| fourier.chi(n)).collect());
    Ok(table)
}

/// Oracle fixture `n, μₙ, λₙ, χₙ` from the Legendre-free Nyström
/// discretizations: μ from the sinc kernel, λ and χ from the parity-split
/// Fourier kernel.
pub fn cmd_nystrom(config: &RunConfig) -> Result<Table> {
    config.validate()?;
    nystrom_table(config.c)
}

/// Matrix of the requested operator in the Legendre basis.
pub fn cmd_export_operator(config: &RunConfig, target: ExportTarget) -> Result<OperatorMatrix> {
    config.validate()?;
    let (c, n) = (config.c, config.truncation());
    match target {
        ExportTarget::T => heun_operator(c, n),
        ExportTarget::Fc => finite_fourier_direct(c, n, min_direct_order(c, n)),
        ExportTarget::Qc => sinc_kernel_direct(c, n, min_direct_order(c, n)),
        ExportTarget::FcReconstructed => {
            reconstruct_fourier(&solve_prolate(c, n)?, config.variant, min_xi_order(c))
        }
        ExportTarget::QcReconstructed => {
            reconstruct_sinc(&solve_prolate(c, n)?, config.variant, min_xi_order(c))
        }
    }
}

/// Runs one verification suite.
pub fn cmd_verify(config: &RunConfig, suite: Suite) -> Result<VerificationReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = VerificationReport::new(suite.name(), config.params());
    match suite {
        Suite::Translation => verify_translation(config, &mut report)?,
        Suite::Fourier => verify_reconstruction(config, Kernel::Fourier, &mut report)?,
        Suite::Sinc => verify_reconstruction(config, Kernel::Sinc, &mut report)?,
        Suite::LimitsSmall => verify_limits_small(config, &mut report)?,
        Suite::LimitsLarge => verify_limits_large(config, &mut report)?,
        Suite::Commutation => verify_commutation(config, &mut report)?,
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Factor tolerance for the linearity check; linearity of the spectral path
/// does not depend on how accurate the factors are.
const LINEARITY_FACTOR_TOL: f64 = 1e-9;

/// Translation samples ξ = 0.15, 0.30, …, 1.5.
pub fn translation_xis() -> Vec<f64> {
    (1..=10).map(|j| 0.15 * j as f64).collect()
}

/// Largest bandwidth accepted by the translation suite.
pub const TRANSLATION_MAX_C: f64 = 20.0;

fn verify_translation(config: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let c = config.c;
    if c > TRANSLATION_MAX_C {
        return Err(Error::InvalidArgument(format!(
            "translation needs c ≤ {TRANSLATION_MAX_C}, got {c}"
        )));
    }
    let basis = solve_prolate(c, config.truncation())?;
    let modes = checked_modes(&basis);
    let mut dev: f64 = 0.0;
    let mut legendre_dev: f64 = 0.0;
    for n in 0..modes {
        let lambda = -basis.chi()[n];
        for xi in translation_xis() {
            let series = u_series_scalar(c, lambda, xi, 1e-15)?.value;
            let ratio = pswf_eval(&basis, n, -1.0 + xi)? / basis.endpoint_minus()[n];
            dev = dev.max((series - ratio).abs() / ratio.abs().max(1.0));
            if c == 0.0 {
                let p = eval_legendre_orthonormal(n, -1.0 + xi)?[n];
                let p_end = eval_legendre_orthonormal(n, -1.0)?[n];
                legendre_dev = legendre_dev.max((series - p / p_end).abs());
            }
        }
    }
    report.push(Check::at_most(
        "U(xi; -chi_n) = psi_n(-1+xi)/psi_n(-1), n <= 8 (relative to max(1, |ratio|))",
        dev,
        config.tol_or(1e-8),
    ));
    if c == 0.0 {
        report.push(Check::at_most(
            "Legendre closed form at c = 0",
            legendre_dev,
            config.tol_or(1e-10),
        ));
    }

    let ys = [-0.7, -0.3, 0.3, 0.7];
    let lambda0 = -basis.chi()[0];
    let mut residual: f64 = 0.0;
    for (&y, r) in ys.iter().zip(heun_ode_residual(c, lambda0, &ys, 1e-3)?) {
        let u = u_series_scalar(c, lambda0, y + 1.0, 1e-15)?.value;
        residual = residual.max(r.abs() / u.abs().max(1.0));
    }
    report.push(Check::at_most(
        "Heun ODE residual of U(y+1; -chi_0) (relative to max(1, |U|))",
        residual,
        1e-6,
    ));

    // Linearity on seeded random coefficient vectors.
    let n = basis.truncation();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let random_vector = |rng: &mut ChaCha8Rng| {
        CoeffVector(
            (0..n)
                .map(|k| {
                    let decay = 1.0 / (1.0 + k as f64).powi(2);
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay
                })
                .collect(),
        )
    };
    let mut lin: f64 = 0.0;
    for _ in 0..5 {
        let f = random_vector(&mut rng);
        let g = random_vector(&mut rng);
        let alpha = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let beta = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let xi = rng.gen_range(0.05..0.5);
        let combo = CoeffVector(
            f.0.iter()
                .zip(&g.0)
                .map(|(a, b)| a * alpha + b * beta)
                .collect(),
        );
        let lhs = u_operator_apply(&basis, xi, &combo, LINEARITY_FACTOR_TOL)?;
        let uf = u_operator_apply(&basis, xi, &f, LINEARITY_FACTOR_TOL)?;
        let ug = u_operator_apply(&basis, xi, &g, LINEARITY_FACTOR_TOL)?;
        let rhs = CoeffVector(
            uf.0.iter()
                .zip(&ug.0)
                .map(|(a, b)| a * alpha + b * beta)
                .collect(),
        );
        lin = lin.max(lhs.distance(&rhs) / (1.0 + rhs.norm()));
    }
    report.push(Check::at_most(
        "linearity of U(xi; T) (relative)",
        lin,
        1e-12,
    ));

    // Literal matrix series against the spectral ratios on a 48-term basis.
    let path_basis = solve_prolate(c, 48)?;
    let literal = u_operator_matrix_series(c, 48, 0.5, 120)?;
    let spectral = u_operator_matrix_spectral(&path_basis, 0.5, 1e-12)?;
    let path = literal.sub(&spectral).leading_block(24).frobenius_norm();
    report.push(Check::at_most(
        "matrix series vs spectral path, xi = 0.5, N = 48, block 24",
        path,
        1e-8,
    ));
    Ok(())
}

fn verify_reconstruction(
    config: &RunConfig,
    kernel: Kernel,
    report: &mut VerificationReport,
) -> Result<()> {
    let (c, n) = (config.c, config.truncation());
    let basis = solve_prolate(c, n)?;
    let block = basis.certified_modes();
    let q_xi = min_xi_order(c);
    let (name, direct, rebuilt) = match kernel {
        Kernel::Fourier => (
            "F_c",
            finite_fourier_direct(c, n, min_direct_order(c, n))?,
            reconstruct_fourier(&basis, config.variant, q_xi)?,
        ),
        Kernel::Sinc => (
            "Q_c",
            sinc_kernel_direct(c, n, min_direct_order(c, n))?,
            reconstruct_sinc(&basis, config.variant, q_xi)?,
        ),
    };
    report.push(Check::at_most(
        format!(
            "{} reconstruction of {name} vs direct quadrature",
            config.variant
        ),
        rebuilt.relative_block_error(&direct, block),
        config.tol_or(1e-7),
    ));
    let ev = reconstructed_eigenvalues(&basis, kernel, config.variant, q_xi)?;
    let mut dev: f64 = 0.0;
    for (m, got) in ev.iter().enumerate().take(checked_modes(&basis)) {
        let expect = match kernel {
            Kernel::Fourier => fourier_eigenvalue(&basis, m)?,
            Kernel::Sinc => Complex64::new(basis.mu()[m], 0.0),
        };
        dev = dev.max((got - expect).norm());
    }
    let label = match kernel {
        Kernel::Fourier => "per-mode i^n lambda_n, n <= 8",
        Kernel::Sinc => "per-mode mu_n, n <= 8",
    };
    report.push(Check::at_most(label, dev, 1e-8));
    Ok(())
}

fn verify_limits_small(config: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let c = config.c;
    if !(c > 0.0 && c <= SMALL_C_MAX) {
        return Err(Error::InvalidArgument(format!(
            "limits-small needs 0 < c ≤ {SMALL_C_MAX}, got {c}"
        )));
    }
    let k = SMALL_C_MAX_TERMS;
    let n = config.truncation().min(k);
    let (zeroth, first) = small_c_order_terms(n, k);

    let mut expect0 = OperatorMatrix::zeros(n);
    expect0.set(0, 0, Complex64::new(2.0, 0.0));
    report.push(Check::at_most(
        "order c^0 equals 2 P0 projector",
        zeroth.max_abs_diff(&expect0),
        1e-12,
    ));
    let mut expect1 = OperatorMatrix::zeros(n);
    if n > 1 {
        expect1.set(1, 1, Complex64::new(0.0, 2.0 / 3.0));
    }
    report.push(Check::at_most(
        "order c^1 equals (2i/3) P1 projector",
        first.max_abs_diff(&expect1),
        1e-12,
    ));

    let err = |c: f64| -> Result<f64> {
        let direct = finite_fourier_direct(c, n, min_direct_order(c, n))?;
        Ok(small_c_operator(c, n, k)?.sub(&direct).frobenius_norm())
    };
    let ratio = err(c / 2.0)? / err(c)?;
    report.push(Check::at_most(
        "O(c^2) error ratio at c/2 vs c, |ratio - 1/4|",
        (ratio - 0.25).abs(),
        0.08,
    ));
    let taylor = small_c_operator(1e-3, n, k)?.max_abs_diff(&finite_fourier_direct(
        1e-3,
        n,
        min_direct_order(1e-3, n),
    )?);
    report.push(Check::at_most(
        "two-term expansion at c = 1e-3, entrywise",
        taylor,
        5e-6,
    ));

    let mut annihilation: f64 = 0.0;
    for terms in 1..=5 {
        let p = heun_product_matrix(0.0, n, terms)?;
        for m in 0..terms.min(n) {
            for i in 0..n {
                annihilation = annihilation.max(p.get(i, m).norm());
            }
        }
    }
    report.push(Check::at_most(
        "product formula annihilates P_m, m < k, at c = 0",
        annihilation,
        1e-12,
    ));
    Ok(())
}

fn verify_limits_large(config: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let c = config.c;
    if !(4.0..=LARGE_C_MAX).contains(&c) {
        return Err(Error::InvalidArgument(format!(
            "limits-large needs 4 ≤ c ≤ {LARGE_C_MAX}, got {c}"
        )));
    }
    const N_MAX: usize = 4;
    let c_list = [c / 4.0, c / 2.0, c];
    let rows = large_c_eigen_convergence(&c_list, N_MAX)?;
    let at = |ci: f64, n: usize| rows.iter().find(|r| r.c == ci && r.n == n).unwrap();

    let mut worst_ratio: f64 = 0.0;
    for n in 0..=N_MAX {
        for w in c_list.windows(2) {
            worst_ratio = worst_ratio.max(at(w[1], n).delta / at(w[0], n).delta);
        }
    }
    report.push(Check::below(
        "delta(c, n) decreasing over c/4, c/2, c for n <= 4 (worst ratio)",
        worst_ratio,
        1.0,
    ));
    let phase = (0..=N_MAX)
        .map(|n| at(c, n).phase_error)
        .fold(0.0, f64::max);
    report.push(Check::at_most(
        "phase of <psi_n, F_c psi_n> vs i^n, n <= 4",
        phase,
        0.05,
    ));
    let h0 = at(c, 0).hermite_distance;
    report.push(Check::at_most(
        "dilated psi_0 vs h_0, L2 distance",
        h0,
        0.05,
    ));
    report.push(Check::below(
        "psi_0 to h_0 distance ratio c vs c/4",
        h0 / at(c / 4.0, 0).hermite_distance,
        1.0,
    ));

    let sinc = NystromSpectrum::solve(c, NYSTROM_NODES)?;
    report.push(Check::at_most(
        "1 - mu_0 (Nyström)",
        1.0 - sinc.mu()[0],
        1e-6,
    ));

    let defects = c_list
        .iter()
        .map(|&ci| dilated_heun_defect(ci, 4))
        .collect::<Result<Vec<f64>>>()?;
    report.push(Check::below(
        "dilated Heun defect decreasing (worst ratio)",
        defects.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max),
        1.0,
    ));

    let lambda_c = -solve_prolate(c, default_truncation(c))?.chi()[0];
    let lambda_2c = -solve_prolate(2.0 * c, default_truncation(2.0 * c))?.chi()[0];
    let bessel_c = bessel_limit_check(c, &[2.0], lambda_c)?[0].deviation;
    let bessel_2c = bessel_limit_check(2.0 * c, &[2.0], lambda_2c)?[0].deviation;
    report.push(Check::at_most("|U(2/c^2) - I0(2)|", bessel_c, 0.05));
    report.push(Check::below(
        "Bessel deviation ratio 2c vs c",
        bessel_2c / bessel_c,
        1.0,
    ));

    if c >= 10.0 {
        report.push(Check::at_most(
            "WKB matching at eps = 30",
            wkb_matching_deviation(c, 30.0, lambda_c)?,
            0.05,
        ));
        let dev_c = wkb_scalar_check(c, lambda_c, &[-0.5])?[0].deviation;
        let dev_2c = wkb_scalar_check(2.0 * c, lambda_2c, &[-0.5])?[0].deviation;
        report.push(Check::at_most(
            "WKB deviation at y = -0.5 halves from c to 2c, |ratio - 1/2|",
            (dev_2c / dev_c - 0.5).abs(),
            0.15,
        ));
    }
    Ok(())
}

fn verify_commutation(config: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    let (c, n) = (config.c, config.truncation());
    let t = heun_operator(c, n)?;
    let block = n / 2;
    let tol = config.tol_or(1e-8);
    let f = finite_fourier_direct(c, n, min_direct_order(c, n))?;
    report.push(Check::at_most(
        "[T, F_c] relative",
        commutator_report(&t, &f, block)?,
        tol,
    ));
    let q = sinc_kernel_direct(c, n, min_direct_order(c, n))?;
    report.push(Check::at_most(
        "[T, Q_c] relative",
        commutator_report(&t, &q, block)?,
        tol,
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        for t in ExportTarget::ALL {
            assert_eq!(t.name().parse::<ExportTarget>().unwrap(), t);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert!("F".parse::<ExportTarget>().is_err());
    }

    #[test]
    fn config_rules() {
        let mut cfg = RunConfig::new(1.0);
        assert_eq!(cfg.truncation(), 64);
        cfg.n_trunc = 30;
        assert_eq!(cfg.params(), Params { c: 1.0, n: 30 });
        cfg.tol = Some(0.0);
        assert!(cfg.validate().is_err());
        assert!(RunConfig::new(-1.0).validate().is_err());
        assert!(RunConfig::new(f64::NAN).validate().is_err());
    }

    #[test]
    fn pswf_table_at_zero_bandwidth() {
        let mut cfg = RunConfig::new(0.0);
        cfg.n_trunc = 16;
        let (report, table) = cmd_pswf(&cfg, false).unwrap();
        assert!(report.passed(), "{}", report.summary());
        let chi = table.column("chi").unwrap();
        assert_eq!(chi.len(), 8);
        assert!((chi[3] - 12.0).abs() < 1e-10);
        assert!(cmd_pswf(&cfg, true).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), 2);
        assert_eq!(exit_code(&Error::SeriesStall { xi: 1.0, terms: 3 }), 1);
    }

    #[test]
    fn translation_suite_at_zero_bandwidth() {
        let mut cfg = RunConfig::new(0.0);
        cfg.n_trunc = 32;
        let report = cmd_verify(&cfg, Suite::Translation).unwrap();
        assert!(report.passed(), "{}", report.summary());
    }

    #[test]
    fn commutation_and_fourier_suites() {
        let cfg = RunConfig::new(2.0);
        let report = cmd_verify(&cfg, Suite::Commutation).unwrap();
        assert!(report.passed(), "{}", report.summary());
        let report = cmd_verify(&RunConfig::new(1.0), Suite::Fourier).unwrap();
        assert!(report.passed(), "{}", report.summary());
    }

    #[test]
    fn suite_ranges_enforced() {
        assert!(cmd_verify(&RunConfig::new(1.0), Suite::LimitsSmall).is_err());
        assert!(cmd_verify(&RunConfig::new(2.0), Suite::LimitsLarge).is_err());
    }

    #[test]
    fn exported_operators_are_consistent() {
        let mut cfg = RunConfig::new(1.0);
        cfg.n_trunc = 32;
        let f = cmd_export_operator(&cfg, ExportTarget::Fc).unwrap();
        let fr = cmd_export_operator(&cfg, ExportTarget::FcReconstructed).unwrap();
        assert!(f.leading_block(16).max_abs_diff(&fr.leading_block(16)) <= 1e-7);
        let q = cmd_export_operator(&cfg, ExportTarget::Qc).unwrap();
        assert_eq!(q.symmetry_defect(), 0.0);
    }
}
