//! Sweep tables behind the command-line front end, their CSV form, run
//! manifests and the verification suite.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agnostic::{agnostic_ode_solve, implicit_solution_residual, invert_implicit, terminal_success, AgnosticConfig};
use crate::bounds::{
    helstrom_error_symmetric, helstrom_success, mec_optimal_error, mec_optimal_error_asymptotic,
    mec_optimal_error_oracle, mec_optimal_error_with, mec_optimal_error_with_prior_form, RicePrior, SeriesForm,
};
use crate::dolinar::{dolinar_ode_solve, dolinar_success, eande_success};
use crate::error::{invalid, Result};
use crate::estimate::{apriori_m, split_performance_with, rice_averaged_error_with, EstimatorKind, SplitConfig, SplitOptions};
use crate::optics::ComplexAmplitude;
use crate::telegraph::{discretized_dolinar, simulate_receiver, AgnosticSchedule, McConfig, OptimalDolinar};

/// Quantity swept along one axis of a figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    N,
    Alpha,
    M,
    XC,
}

/// Values taken by one sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Parses `a,b,c` or `start:stop:points`.
    ///
    /// Ranges are linear for amplitudes and offsets, and logarithmic with
    /// rounding and deduplication for the integer axes `n` and `m`.
    pub fn parse(variable: SweepVariable, text: &str) -> Result<Self> {
        let integer = matches!(variable, SweepVariable::N | SweepVariable::M);
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: {s:?}")));
        let values = if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(invalid(format!("range {text:?} must be start:stop:points")));
            }
            let (start, stop) = (num(parts[0])?, num(parts[1])?);
            let points: usize = parts[2].trim().parse().map_err(|_| invalid(format!("bad point count in {text:?}")))?;
            if points < 2 || !(start < stop) {
                return Err(invalid(format!("range {text:?} needs points >= 2 and start < stop")));
            }
            if integer {
                log_spaced_integers(start, stop, points)?
            } else {
                linspace(start, stop, points)
            }
        } else {
            text.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!("sweep {text:?} needs finite non-negative values")));
        }
        if integer && values.iter().any(|v| v.fract() != 0.0 || *v > f64::from(u32::MAX)) {
            return Err(invalid(format!("sweep {text:?} needs integer values")));
        }
        Ok(Self { variable, values })
    }

    pub fn integers(&self) -> Vec<u32> {
        self.values.iter().map(|&v| v as u32).collect()
    }
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| start + (stop - start) * i as f64 / (points - 1) as f64).collect()
}

fn log_spaced_integers(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if start < 1.0 {
        return Err(invalid("logarithmic integer range must start at 1 or above"));
    }
    let (l0, l1) = (start.ln(), stop.ln());
    let mut out: Vec<f64> = (0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp().round())
        .collect();
    out.dedup();
    Ok(out)
}

/// Default `n` axis for the training-size figures: 16 log-spaced values in
/// `1..=128`.
pub fn default_n_range() -> Vec<u32> {
    log_spaced_integers(1.0, 128.0, 16).expect("valid range").into_iter().map(|v| v as u32).collect()
}

pub fn default_alpha_grid() -> Vec<f64> {
    linspace(0.05, 1.5, 60)
}

pub fn default_xc_grid() -> Vec<f64> {
    linspace(0.1, 1.2, 45)
}

/// A rectangular result with named columns and the parameters that
/// produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), params: BTreeMap::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// One `#` line with the table name and parameters, one header line,
    /// then one line per row. Numbers use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "# {} columns={} {}", self.name, self.columns.join("|"), params.join(" "));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Shared numerical settings for the figure sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureOptions {
    pub grid_steps: usize,
    pub series: SeriesForm,
    pub bias_corrected: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { grid_steps: 400, series: SeriesForm::TraceNorm, bias_corrected: false }
    }
}

impl FigureOptions {
    fn split(&self) -> SplitOptions {
        SplitOptions { grid_steps: self.grid_steps, bias_corrected: self.bias_corrected, ..SplitOptions::default() }
    }
}

fn check_amplitudes(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("amplitudes must be a non-empty list of finite values >= 0"));
    }
    Ok(())
}

/// Agnostic receiver error against `n`, with the phase-invariant bound and
/// the Helstrom error.
pub fn fig2(alphas: &[f64], ns: &[u32], opts: FigureOptions) -> Result<Table> {
    check_amplitudes(alphas)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(invalid("fig2 needs n >= 1"));
    }
    let cells: Vec<(f64, u32)> = alphas.iter().flat_map(|&a| ns.iter().map(move |&n| (a, n))).collect();
    let rows = cells
        .par_iter()
        .map(|&(a, n)| {
            let a2 = a * a;
            let pc = terminal_success(&AgnosticConfig::calibrated(n, a2)?, opts.grid_steps)?;
            Ok(vec![a, f64::from(n), 1.0 - pc, mec_optimal_error_with(n, a2, opts.series)?, helstrom_error_symmetric(a2)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("fig2", &["alpha", "n", "pe_agnostic", "pe_bound", "pe_helstrom"])
        .param("alpha", join(alphas))
        .param("grid_steps", opts.grid_steps)
        .param("series", opts.series.name());
    t.rows = rows;
    Ok(t)
}

/// Estimate&Discriminate error against `n`.
pub fn fig3(alphas: &[f64], ns: &[u32]) -> Result<Table> {
    check_amplitudes(alphas)?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(invalid("fig3 needs n >= 1"));
    }
    let cells: Vec<(f64, u32)> = alphas.iter().flat_map(|&a| ns.iter().map(move |&n| (a, n))).collect();
    let rows = cells
        .par_iter()
        .map(|&(a, n)| {
            let p = eande_success(ComplexAmplitude::real(a), n)?;
            Ok(vec![a, f64::from(n), 1.0 - p, helstrom_error_symmetric(a * a)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("fig3", &["alpha", "n", "pe_eande", "pe_helstrom"]).param("alpha", join(alphas));
    t.rows = rows;
    Ok(t)
}

fn estimator_columns(prefix: &str, ests: &[EstimatorKind]) -> Vec<String> {
    ests.iter().map(|e| format!("{prefix}_{}", e.name())).collect()
}

/// Success probability over `(α, m)` for a fixed total `n`.
pub fn fig4(n_total: u32, alphas: &[f64], ms: &[u32], ests: &[EstimatorKind], opts: FigureOptions) -> Result<Table> {
    check_amplitudes(alphas)?;
    if ests.is_empty() {
        return Err(invalid("fig4 needs at least one estimator"));
    }
    let splits = ms.iter().map(|&m| SplitConfig::new(n_total, m)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(f64, SplitConfig)> = alphas.iter().flat_map(|&a| splits.iter().map(move |&s| (a, s))).collect();
    let rows = cells
        .par_iter()
        .map(|&(a, split)| {
            let mut row = vec![a, f64::from(split.m_estimate)];
            for &est in ests {
                row.push(split_performance_with(ComplexAmplitude::real(a), split, est, opts.split())?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["alpha".to_string(), "m".to_string()];
    columns.extend(estimator_columns("pc", ests));
    let mut t = Table::new("fig4", &[]).param("n", n_total).param("grid_steps", opts.grid_steps).param("bias_corrected", opts.bias_corrected);
    t.columns = columns;
    t.rows = rows;
    Ok(t)
}

/// All `m` splits for `n_total`, `1..n_total`.
pub fn all_splits(n_total: u32) -> Vec<u32> {
    (1..n_total).collect()
}

/// Error against `α` for both estimators with the a-priori split, the
/// miscalibrated Estimate&Discriminate scheme and the Helstrom error.
pub fn fig5(ns: &[u32], alphas: &[f64], opts: FigureOptions) -> Result<Table> {
    check_amplitudes(alphas)?;
    let splits = ns.iter().map(|&n| SplitConfig::new(n, apriori_m(n)?)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(SplitConfig, f64)> = splits.iter().flat_map(|&s| alphas.iter().map(move |&a| (s, a))).collect();
    let rows = cells
        .par_iter()
        .map(|&(split, a)| {
            let alpha = ComplexAmplitude::real(a);
            let photon = split_performance_with(alpha, split, EstimatorKind::PhotonCounting, opts.split())?;
            let het = split_performance_with(alpha, split, EstimatorKind::Heterodyne, opts.split())?;
            let mised = eande_success(alpha, split.n_total)?;
            Ok(vec![
                f64::from(split.n_total),
                a,
                f64::from(split.m_estimate),
                1.0 - photon,
                1.0 - het,
                1.0 - mised,
                helstrom_error_symmetric(a * a),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("fig5", &["n", "alpha", "m", "pe_photon", "pe_heterodyne", "pe_mised", "pe_helstrom"])
        .param("grid_steps", opts.grid_steps)
        .param("bias_corrected", opts.bias_corrected)
        .param("m_rule", "4->2,8->3,else round(sqrt n)");
    t.rows = rows;
    Ok(t)
}

/// Rice-averaged error against the prior offset `x_c`.
pub fn fig6(ns: &[u32], sigma: f64, xcs: &[f64], opts: FigureOptions) -> Result<Table> {
    check_amplitudes(xcs)?;
    for &n in ns {
        apriori_m(n)?;
    }
    let cells: Vec<(u32, f64)> = ns.iter().flat_map(|&n| xcs.iter().map(move |&x| (n, x))).collect();
    let rows = cells
        .par_iter()
        .map(|&(n, xc)| {
            let prior = RicePrior::new(sigma, xc)?;
            let het = rice_averaged_error_with(n, &prior, EstimatorKind::Heterodyne, opts.split())?;
            let photon = rice_averaged_error_with(n, &prior, EstimatorKind::PhotonCounting, opts.split())?;
            let bound = mec_optimal_error_with_prior_form(n, &prior, opts.series)?;
            Ok(vec![f64::from(n), xc, het, photon, bound])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("fig6", &["n", "x_c", "pe_heterodyne", "pe_photon", "pe_bound"])
        .param("sigma", sigma)
        .param("grid_steps", opts.grid_steps)
        .param("series", opts.series.name());
    t.rows = rows;
    Ok(t)
}

/// Location and hash of one written file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the CSV form of `table` and returns its digest.
pub fn write_table(table: &Table, path: &Path) -> Result<OutputDigest> {
    let text = table.to_csv();
    std::fs::write(path, &text)?;
    Ok(OutputDigest { path: path.to_path_buf(), sha256: sha256_hex(text.as_bytes()), bytes: text.len() as u64 })
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub parameters: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<OutputDigest>,
    pub duration_seconds: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: Vec<String>, parameters: serde_json::Value) -> Self {
        let tolerances = BTreeMap::from([
            ("quadrature_abs".to_string(), 1e-9),
            ("rice_quadrature_abs".to_string(), 1e-8),
            ("photon_tail".to_string(), crate::estimate::PHOTON_TAIL),
            ("implicit_residual".to_string(), 1e-10),
            ("mc_rate_step_cap".to_string(), crate::telegraph::RATE_STEP_CAP),
        ]);
        Self { command, parameters, tolerances, outputs: Vec::new(), duration_seconds: 0.0, version: env!("CARGO_PKG_VERSION").into() }
    }

    /// Manifest path next to an output file: `<out>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Settings for the stochastic part of [`verify_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub mc: McConfig,
    pub grid_steps: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { mc: McConfig { trials: 200_000, slices: 4000, seed: 2024 }, grid_steps: 1000 }
    }
}

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from(name: &str, result: Result<(bool, String)>) -> Self {
        match result {
            Ok((passed, detail)) => Self { name: name.into(), passed, detail },
            Err(e) => Self { name: name.into(), passed: false, detail: format!("error: {e}") },
        }
    }
}

/// Renders checks as an aligned PASS/FAIL table.
pub fn format_checks(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let _ = writeln!(out, "{:width$}  {}  {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    out
}

/// Runs the oracle comparisons: closed forms, ODE solvers, implicit
/// relation, Fock-sector oracle, asymptotics, Monte Carlo and the
/// discretised chain.
pub fn verify_suite(cfg: VerifyConfig) -> Vec<Check> {
    let a = ComplexAmplitude::real;
    let mut checks = Vec::new();

    checks.push(Check::from("helstrom = dolinar at t=1", (|| {
        let mut worst: f64 = 0.0;
        for x in [0.1, 0.25, 0.625, 1.0, 2.0] {
            let h = helstrom_success(0.5, 0.5, a(x), a(-x))?;
            worst = worst.max((dolinar_success(0.5, 0.5, x * x, 1.0)? - h).abs());
        }
        Ok((worst <= 1e-12, format!("max diff {worst:.2e}")))
    })()));

    checks.push(Check::from("dolinar ode vs closed form", (|| {
        let mut worst: f64 = 0.0;
        for x in [0.1, 0.25, 0.625, 1.0, 2.0] {
            let sol = dolinar_ode_solve(0.5, x * x, 10_000)?;
            worst = worst.max((sol.terminal() - dolinar_success(0.5, 0.5, x * x, 1.0)?).abs());
        }
        Ok((worst <= 1e-6, format!("max diff {worst:.2e}")))
    })()));

    checks.push(Check::from("sector oracle vs series", (|| {
        let mut worst: f64 = 0.0;
        for n in [1, 2, 3, 5, 10] {
            for x in [0.25, 0.625, 1.0] {
                worst = worst.max((mec_optimal_error_oracle(n, a(x))? - mec_optimal_error(n, x * x)?).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max diff {worst:.2e}")))
    })()));

    checks.push(Check::from("asymptotic remainder O(1/n^2)", (|| {
        let scaled = asymptotic_scaled_remainders(0.25)?;
        let ok = scaled.windows(2).all(|w| w[1] <= w[0] * 1.05);
        Ok((ok, format!("n^2|diff| = {}", scaled.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", "))))
    })()));

    checks.push(Check::from("agnostic ode/implicit/inversion", (|| {
        let worst = agnostic_triple_disagreement(cfg.grid_steps)?;
        Ok((worst <= 1e-6, format!("max diff {worst:.2e}")))
    })()));

    checks.push(Check::from("monte carlo vs dolinar", (|| {
        let sched = OptimalDolinar { p_plus: 0.5, alpha: a(0.625) };
        let r = simulate_receiver(&sched, cfg.mc, 0.5)?;
        let z = r.z_score(dolinar_success(0.5, 0.5, 0.390625, 1.0)?);
        Ok((z <= 3.0, format!("z = {z:.2} ({} trials)", r.trials)))
    })()));

    checks.push(Check::from("monte carlo vs agnostic ode", (|| {
        let sched = AgnosticSchedule::calibrated(8, 0.25, cfg.grid_steps)?;
        let r = simulate_receiver(&sched, cfg.mc, 0.5)?;
        let z = r.z_score(terminal_success(&AgnosticConfig::calibrated(8, 0.25)?, cfg.grid_steps)?);
        Ok((z <= 3.0, format!("z = {z:.2} ({} trials)", r.trials)))
    })()));

    checks.push(Check::from("discretized chain K=1e4", (|| {
        let mut worst: f64 = 0.0;
        for x in [0.25, 0.625] {
            worst = worst.max((discretized_dolinar(10_000, a(x), 0.5)? - helstrom_success(0.5, 0.5, a(x), a(-x))?).abs());
        }
        Ok((worst <= 1e-3, format!("max gap {worst:.2e}")))
    })()));

    checks.push(Check::from("E&D large n -> helstrom", (|| {
        let gap = (eande_success(a(0.625), 1_000_000)? - (1.0 - helstrom_error_symmetric(0.390625))).abs();
        Ok((gap <= 1e-4, format!("gap {gap:.2e}")))
    })()));

    checks
}

/// `n²·|series − asymptotic|` at `n = 100, 200, 500, 1000`.
pub fn asymptotic_scaled_remainders(alpha_abs_sq: f64) -> Result<Vec<f64>> {
    [100u32, 200, 500, 1000]
        .iter()
        .map(|&n| {
            let diff = mec_optimal_error(n, alpha_abs_sq)? - mec_optimal_error_asymptotic(n, alpha_abs_sq)?;
            Ok(f64::from(n).powi(2) * diff.abs())
        })
        .collect()
}

/// Largest pairwise disagreement between the ODE, the implicit relation
/// and its inversion on the `(n, |α|)` grid `{1,2,4,8,16} × {0.1,0.25,0.5,0.625,1}`.
pub fn agnostic_triple_disagreement(grid_steps: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [1u32, 2, 4, 8, 16] {
        for x in [0.1, 0.25, 0.5, 0.625, 1.0] {
            let a2 = x * x;
            let sol = agnostic_ode_solve(&AgnosticConfig::calibrated(n, a2)?, grid_steps)?;
            let xi_ode = sol.terminal() - 0.5;
            let xi_inv = invert_implicit(1.0, a2, n)?;
            worst = worst
                .max((xi_ode - xi_inv).abs())
                .max(implicit_solution_residual(xi_ode, 1.0, a2, n)?.abs())
                .max(sol.max_residual);
        }
    }
    Ok(worst)
}
