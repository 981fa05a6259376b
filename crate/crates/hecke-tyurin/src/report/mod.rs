//! Scenario runner: builds the curve data, runs the selected suites and
//! writes a JSON report.
//!
//! Exit codes: 0 all asserted checks pass, 1 some check failed, 2 the
//! scenario is invalid, 3 a numerical failure stopped a suite.

pub mod scenario;
pub mod suites;

use crate::error::{Error, Result};
use crate::hecke::HeckeConfig;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use scenario::{Scenario, SUITES};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

pub use crate::hecke::project_delta_p;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Below,
    /// Recorded only; never affects the outcome.
    Contrast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement the check certifies.
    pub anchor: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub comparison: Comparison,
    /// None for contrast entries.
    pub pass: Option<bool>,
}

/// Check name (or prefix) → the statement it certifies.
pub const ANCHORS: &[(&str, &str)] = &[
    ("theta_even", "theta is even"),
    ("theta_periodic", "theta is 2 pi i periodic"),
    ("theta_quasi_periodic", "theta(l + tau e_a) = exp(-tau_aa/2 - l_a) theta(l)"),
    ("theta_heat_equation", "theta satisfies the heat equation in tau"),
    ("tau_symmetric", "tau is a symmetric matrix"),
    ("re_tau_negative_definite", "Re tau is negative definite"),
    ("a_normalization", "A-periods of omega_a equal 2 pi i delta_ab"),
    ("bilinear_relation", "Riemann bilinear relations"),
    ("kappa_simple_zero", "z -> Theta(A(z) - A(P) + kappa0) vanishes simply at z = P"),
    ("abel_involution", "A(P) + A(sigma P) = 0 with a Weierstrass base point"),
    ("abel_path_independence", "Abel map is path independent modulo the lattice"),
    ("diagonal_residue", "omega^(P)(z) has residue 1 at z = P"),
    ("p0_residue", "G(z, w) has residue -1 at z = P0"),
    ("b_monodromy", "r^(P)(gamma_B_a z) = r^(P)(z) + omega_a(P)"),
    ("a_monodromy", "r^(P) is single valued along A-cycles"),
    ("den_det_matches_sum", "det M(P, l) = Den(P, l)"),
    ("den_coefficients_reconstruct", "Den is quadratic in each l_j"),
    ("den_jet_gradient", "Den derivatives by jets agree with differences"),
    ("stability_kernel_trivial", "Den != 0 implies the bundle is stable"),
    ("fiber_kernel_trivial", "Den != 0 implies the fiber is finite"),
    ("stability_kernel_at_den_zero", "coincident lines give endomorphisms"),
    ("fiber_kernel_at_den_zero", "coincident lines make M singular"),
    ("phase_point_constraints", "sum l_i^a lambda_i = 0, a = 0, 1, 2"),
    ("higgs_residue_direction", "res_{P_i} A is proportional to -e + l_i h + l_i^2 f"),
    ("higgs_condition_iii", "-l_i^2 A_e - 2 l_i A_h + A_f is regular at P_i"),
    ("h_regular_at_points", "tr A^2 is a regular quadratic differential"),
    ("h_regular_at_p0", "tr A^2 is regular at P0"),
    ("h_two_expressions", "two expressions of H agree"),
    ("h_homogeneous", "H is quadratic in lambda"),
    ("hamiltonians_held_out", "H expands in holomorphic quadratic differentials"),
    ("hamiltonians_commute", "the H_alpha Poisson commute"),
    ("moment_brackets_vanish", "the H_alpha are G-invariant"),
    ("hamiltonians_sl2_invariant", "the H_alpha are G-invariant"),
    ("t_regular_at_critical_level", "at k + 2 = 0 T^diff is regular at the P_i"),
    ("t_double_pole_law", "T^diff ~ 2 kappa k (dz / 2z)^2 at P_i"),
    ("t_alpha_held_out", "T^diff expands in quadratic differentials"),
    ("commutators_critical_monomials", "at k + 2 = 0 the T_alpha commute"),
    ("commutators_critical_invariants", "at k + 2 = 0 the T_alpha commute"),
    ("symbol_matches_hamiltonians", "principal symbol of T_alpha is H_alpha"),
    ("mu_jet_gradient", "mu coefficients are rational in l"),
    ("lambda_finite", "Lambda_i is well defined for Den != 0"),
    ("contrast_commutators_k0", "commutators away from the critical level"),
    ("contrast_lambda_vs_variation", "Lambda_i derivative part against the variation of l"),
    ("projection_residual", "admissible displacements keep sum A(P_i) fixed"),
    ("projection_idempotent", "projection onto admissible displacements"),
    ("system_residuals", "the variation satisfies the dependence system"),
    ("delta_ell_closed_form", "closed form of delta l"),
    ("beta_identity", "beta_i = -(alpha_i + delta P_i) / l_i"),
    ("zero_displacement", "no displacement, no variation"),
];

pub fn anchor_for(name: &str) -> Option<&'static str> {
    ANCHORS.iter().find(|(k, _)| name == *k || name.starts_with(k)).map(|(_, a)| *a)
}

impl Check {
    pub fn new(name: &str, value: f64, threshold: f64, comparison: Comparison) -> Check {
        let pass = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Below => value < threshold,
            Comparison::Contrast => true,
        };
        Check {
            name: name.to_string(),
            anchor: anchor_for(name).unwrap_or("").to_string(),
            value,
            threshold: Some(threshold),
            comparison,
            pass: Some(pass),
        }
    }

    pub fn contrast(name: &str, value: f64) -> Check {
        Check {
            name: name.to_string(),
            anchor: anchor_for(name).unwrap_or("").to_string(),
            value,
            threshold: None,
            comparison: Comparison::Contrast,
            pass: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub seed: u64,
    pub curve_hash: String,
    pub genus: usize,
    pub kappa_characteristic: (Vec<f64>, Vec<f64>),
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub environment: Option<Environment>,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub exit_code: i32,
    pub error: Option<String>,
}

impl Report {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(|s| s.checks.iter())
    }

    pub fn check_count(&self) -> usize {
        self.checks().count()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks().find(|c| c.name == name)
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            for c in &s.checks {
                let tag = match c.pass {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "info",
                };
                let thr = c.threshold.map(|t| format!(" (threshold {t:.1e})")).unwrap_or_default();
                out.push_str(&format!("{tag}  {:<10} {:<34} {:.3e}{thr}\n", s.name, c.name, c.value));
            }
            if let Some(e) = &s.error {
                out.push_str(&format!("ERR   {:<10} {e}\n", s.name));
            }
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out.push_str(&format!("{} checks, exit code {}\n", self.check_count(), self.exit_code));
        out
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub seed: Option<u64>,
    pub suites: Option<Vec<String>>,
    pub k: Option<Vec<f64>>,
}

impl RunFlags {
    pub fn apply(&self, s: &mut Scenario) {
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(su) = &self.suites {
            s.suites = su.clone();
        }
        if let Some(k) = &self.k {
            s.k = k.clone();
        }
    }
}

fn failure_report(name: &str, code: i32, e: &Error) -> Report {
    Report { schema: REPORT_SCHEMA, scenario: name.to_string(), environment: None, suites: vec![], pass: false, exit_code: code, error: Some(e.to_string()) }
}

fn error_code(e: &Error) -> i32 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

fn run_suite(name: &str, ctx: &suites::Ctx) -> Result<Vec<Check>> {
    match name {
        "theta" => suites::theta_suite(ctx),
        "periods" => suites::periods_suite(ctx),
        "green" => suites::green_suite(ctx),
        "hecke" => suites::hecke_suite(ctx),
        "hitchin" => suites::hitchin_suite(ctx),
        "kzb" => suites::kzb_suite(ctx),
        "variation" => suites::variation_suite(ctx),
        other => Err(Error::Invalid(format!("unknown suite '{other}'"))),
    }
}

/// Run a parsed scenario. Never panics on bad input; errors land in the
/// report with the matching exit code.
pub fn run_scenario(scenario: &Scenario, flags: &RunFlags) -> Report {
    let mut s = scenario.clone();
    flags.apply(&mut s);
    let name = s.name.clone();
    if let Err(e) = s.validate() {
        return failure_report(&name, 2, &e);
    }
    let pd = match s.period_data() {
        Ok(pd) => Arc::new(pd),
        Err(e) => return failure_report(&name, error_code(&e), &e),
    };
    let cfg: Option<HeckeConfig> = if s.needs_config() {
        match s.hecke_config(pd.clone()) {
            Ok(c) => Some(c),
            Err(e) => return failure_report(&name, error_code(&e), &e),
        }
    } else {
        None
    };
    let env = Environment {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: s.seed,
        curve_hash: pd.hash(),
        genus: pd.genus(),
        kappa_characteristic: pd.kappa_characteristic.clone(),
        timestamp: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let ctx = suites::Ctx { scenario: &s, pd: pd.clone(), cfg, seed: s.seed };
    let order: Vec<&str> = SUITES.iter().copied().filter(|n| s.suites.iter().any(|x| x == n)).collect();
    let results: Vec<(String, Result<Vec<Check>>)> =
        order.par_iter().map(|n| (n.to_string(), run_suite(n, &ctx))).collect();
    let mut reports = Vec::new();
    let mut numeric_error: Option<String> = None;
    for (n, r) in results {
        match r {
            Ok(mut checks) => {
                checks.sort_by(|a, b| a.name.cmp(&b.name));
                reports.push(SuiteReport { name: n, checks, error: None });
            }
            Err(e) => {
                if numeric_error.is_none() {
                    numeric_error = Some(format!("{n}: {e}"));
                }
                reports.push(SuiteReport { name: n, checks: vec![], error: Some(e.to_string()) });
            }
        }
    }
    let any_fail = reports.iter().flat_map(|r| r.checks.iter()).any(|c| c.failed());
    let exit_code = if numeric_error.is_some() {
        3
    } else if any_fail {
        1
    } else {
        0
    };
    Report { schema: REPORT_SCHEMA, scenario: name, environment: Some(env), suites: reports, pass: exit_code == 0, exit_code, error: numeric_error }
}

/// Load, run and write the report. Returns the exit code.
pub fn run(scenario_path: &Path, output_path: Option<&Path>, flags: &RunFlags) -> (Report, i32) {
    let report = match Scenario::load(scenario_path) {
        Ok(s) => run_scenario(&s, flags),
        Err(e) => {
            let code = if matches!(e, Error::Io(_)) { 2 } else { error_code(&e).max(2) };
            failure_report(&scenario_path.display().to_string(), code, &e)
        }
    };
    let code = report.exit_code;
    if let Some(out) = output_path {
        if let Err(e) = write_report(&report, out) {
            eprintln!("could not write report: {e}");
        }
    }
    (report, code)
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Report JSON without the timestamp, for determinism comparisons.
pub fn canonical_json(report: &Report) -> String {
    let mut r = report.clone();
    if let Some(e) = r.environment.as_mut() {
        e.timestamp = 0;
    }
    serde_json::to_string(&r).unwrap_or_default()
}

/// Commutator residuals of the T_alpha at each level, for the contrast run.
pub fn contrast(scenario: &Scenario, ks: &[f64]) -> Result<Vec<(f64, f64)>> {
    let pd = Arc::new(scenario.period_data()?);
    let cfg = scenario.hecke_config(pd)?;
    cfg.require_den()?;
    let monos: Vec<_> = crate::kzb::default_monomials(cfg.n()).iter().map(|e| crate::kzb::monomial(&cfg.ell, e, 4)).collect();
    ks.iter()
        .map(|&k| {
            let t = crate::kzb::t_diff_alpha(&cfg, C64::new(k, 0.0), 2)?;
            Ok((k, suites::commutator_max(&t.ops, &monos)?))
        })
        .collect()
}
