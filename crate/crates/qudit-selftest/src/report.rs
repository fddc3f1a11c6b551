//! Machine-readable report types shared by the library and the CLI, plus the
//! float formatting used for CSV output.

use crate::lhv::LhvCertificate;
use serde::{Deserialize, Serialize};

/// 17 significant digits: enough for a bit-exact f64 round trip, fixed width
/// in the exponent form so identical runs produce byte-identical files.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The fully resolved run configuration, embedded verbatim in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub d: u64,
    pub nu: String,
    pub tol_identity: f64,
    pub tol_eig: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub magnitudes: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub noise: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threads: Option<usize>,
    /// The robustness constant for this dimension: sqrt(d)(sqrt(d)+2) for
    /// d > 3; for d = 3 the epsilon-dependent prefactor 9(sqrt(3)+2).
    pub mu_coefficient: f64,
    pub mu_formula: String,
}

impl ResolvedConfig {
    pub fn new(d: u64, nu_id: String) -> ResolvedConfig {
        let (mu_coefficient, mu_formula) = if d == 3 {
            (9.0 * (3f64.sqrt() + 2.0), "mu_3 = 9 sqrt(eps) (sqrt(3)+2)".to_string())
        } else {
            let sd = (d as f64).sqrt();
            (sd * (sd + 2.0), "mu_d = sqrt(d) (sqrt(d)+2)".to_string())
        };
        ResolvedConfig {
            d,
            nu: nu_id,
            tol_identity: 1e-9,
            tol_eig: 1e-7,
            seeds: Vec::new(),
            magnitudes: Vec::new(),
            noise: None,
            method: None,
            threads: None,
            mu_coefficient,
            mu_formula,
        }
    }
}

/// Output of the `identities` verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentitiesReport {
    pub config: ResolvedConfig,
    /// || d(d-1) I - B_d - sum C^dag C ||_max and the D-family analog.
    pub sopo_c_residual: f64,
    pub sopo_d_residual: f64,
    /// max_n || G_n^dag G_n - I ||_max.
    pub g_unitarity_defect: f64,
    /// Worst folding-identity deviation (exhaustive); absent for d = 3.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub folding_max_deviation: Option<f64>,
    /// Frobenius norm of the diagonal part of B_d.
    pub diagonal_projection_norm: f64,
    /// || B_full(from chi) - (1 + S + B_d) ||_max; absent for d = 3.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split_vs_chi_max_diff: Option<f64>,
    /// Qutrit phase-constraint residuals (difference, cubic); d = 3 only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qutrit_phase_residuals: Option<[f64; 2]>,
    /// <Phi| B_d |Phi> and <Phi| B_full |Phi> on the rotated Bell state.
    pub bell_value_bd: f64,
    pub bell_value_full: f64,
    pub pass: bool,
    #[serde(default)]
    pub failures: Vec<String>,
}

/// Output of the `bounds` verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsReport {
    pub config: ResolvedConfig,
    pub certificates: Vec<LhvCertificate>,
    /// Largest eigenvalue of B_d and its distance from d(d-1).
    pub max_eigenvalue: f64,
    pub tsirelson_value: f64,
    pub eig_defect: f64,
    pub pass: bool,
    #[serde(default)]
    pub failures: Vec<String>,
}

/// Qutrit extras attached to a selftest row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QutritSummary {
    pub in_regime: bool,
    pub all_ok: bool,
    pub k_star_alice: u64,
    pub k_star_bob: u64,
}

/// One (seed, magnitude) row of the `selftest` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestRow {
    pub seed: u64,
    pub magnitude: f64,
    pub noise: String,
    pub epsilon: f64,
    pub gamma: f64,
    pub max_c_norm: f64,
    pub max_d_norm: f64,
    pub max_pair_residual: f64,
    pub max_commutator_residual: f64,
    pub c_bound_ok: bool,
    pub pair_bound_ok: bool,
    pub commutator_bound_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qutrit: Option<QutritSummary>,
    pub state_distance: f64,
    pub max_op_distance: f64,
    pub delta_bound: f64,
    pub mu: f64,
    pub aux_norm: f64,
    pub in_regime: bool,
    pub bound_satisfied: bool,
    /// Everything gate-worthy on this row holds (out-of-regime rows are
    /// flagged, not failed).
    pub row_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestReport {
    pub config: ResolvedConfig,
    pub rows: Vec<SelftestRow>,
    pub pass: bool,
    #[serde(default)]
    pub failures: Vec<String>,
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: u64,
    pub seed: u64,
    pub magnitude: f64,
    pub epsilon: f64,
    pub state_distance: f64,
    pub delta_bound: f64,
    pub ratio: f64,
    pub max_c_norm: f64,
    pub gamma: f64,
}

pub const SWEEP_CSV_HEADER: &str =
    "d,seed,magnitude,epsilon,state_distance,delta_bound,ratio,max_c_norm,gamma";

impl SweepRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.d,
            self.seed,
            fmt_f64(self.magnitude),
            fmt_f64(self.epsilon),
            fmt_f64(self.state_distance),
            fmt_f64(self.delta_bound),
            fmt_f64(self.ratio),
            fmt_f64(self.max_c_norm),
            fmt_f64(self.gamma)
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
