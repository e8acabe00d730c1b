//! Experiment reports and their CSV / JSON renderings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use vlab_core::asymptotics::{DecayKind, DecayProfile, SchattenOrder};
use vlab_core::volterra::{CriterionReport, VolterraVerdict};
use vlab_core::C64;

use crate::config::ExperimentConfig;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One (parameter tuple, N) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Exact parameters that produced this record.
    pub params: BTreeMap<String, String>,
    pub dim: Option<usize>,
    pub spectral_radius: Option<f64>,
    /// Up to three eigenvalues of largest modulus.
    pub top_eigenvalues: Vec<C64>,
    pub s1: Option<f64>,
    pub fit: Option<DecayProfile>,
    pub schatten_order: Option<SchattenOrder>,
    pub criterion: Option<CriterionReport>,
    /// Verdict of the tuple this record belongs to.
    pub persistent_nonzero: Option<bool>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(params: BTreeMap<String, String>) -> Self {
        Self {
            params,
            dim: None,
            spectral_radius: None,
            top_eigenvalues: Vec::new(),
            s1: None,
            fit: None,
            schatten_order: None,
            criterion: None,
            persistent_nonzero: None,
            error: None,
            wall_time_s: 0.0,
        }
    }

    pub fn failed(params: BTreeMap<String, String>, error: impl ToString) -> Self {
        Self { error: Some(error.to_string()), ..Self::new(params) }
    }
}

/// Verdict over the refinement levels of one parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub params: BTreeMap<String, String>,
    pub verdict: Option<VolterraVerdict>,
    /// Verdict recomputed on the adjoint family.
    pub adjoint_persistent_nonzero: Option<bool>,
    /// Matching distance between conj σ(A) and σ(A*), worst level.
    pub adjoint_mismatch: Option<f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl VerdictRecord {
    pub fn persistent_nonzero(&self) -> Option<bool> {
        self.verdict.as_ref().map(|v| v.persistent_nonzero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
    pub records: Vec<RunRecord>,
    pub verdicts: Vec<VerdictRecord>,
}

pub const CSV_HEADER: [&str; 21] = [
    "experiment",
    "params",
    "dim",
    "spectral_radius",
    "ev1_re",
    "ev1_im",
    "ev2_re",
    "ev2_im",
    "ev3_re",
    "ev3_im",
    "s1",
    "fit_kind",
    "fit_a",
    "fit_exponent",
    "fit_residual",
    "schatten_order",
    "criterion_limit",
    "criterion_rate",
    "divergent",
    "persistent_nonzero",
    "error",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `k=v;k=v` in key order.
pub fn params_string(params: &BTreeMap<String, String>) -> String {
    params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

impl ExperimentReport {
    pub fn has_errors(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some()) || self.verdicts.iter().any(|v| v.error.is_some())
    }

    /// Comment line carrying everything that varies between identical runs.
    pub fn csv_comment(&self) -> String {
        let walls: Vec<String> = self.records.iter().map(|r| format!("{:.6}", r.wall_time_s)).collect();
        format!(
            "# volterra-lab {} {} started_unix_s={} wall_time_s={:.6} record_wall_s={}",
            self.artifact_version,
            self.config.experiment,
            self.started_unix_s,
            self.wall_time_s,
            walls.join(";")
        )
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            let mut row =
                vec![self.config.experiment.to_string(), params_string(&r.params), opt(r.dim), opt(r.spectral_radius)];
            for i in 0..3 {
                let z = r.top_eigenvalues.get(i);
                row.push(opt(z.map(|z| z.re)));
                row.push(opt(z.map(|z| z.im)));
            }
            row.push(opt(r.s1));
            let fit = r.fit.as_ref();
            row.push(
                fit.map(|f| match f.kind {
                    DecayKind::PowerLaw => "power_law",
                    DecayKind::SlowlyVaryingLog => "slowly_varying_log",
                })
                .unwrap_or_default()
                .to_string(),
            );
            row.push(opt(fit.map(|f| f.a)));
            row.push(opt(fit.map(|f| f.exponent)));
            row.push(opt(fit.map(|f| f.residual)));
            row.push(opt(r.schatten_order.map(|o| match o {
                SchattenOrder::Finite(p) => p.to_string(),
                SchattenOrder::Infinite => "inf".to_string(),
            })));
            let crit = r.criterion.as_ref();
            row.push(opt(crit.and_then(|c| c.limit)));
            row.push(opt(crit.and_then(|c| c.divergence_rate)));
            row.push(opt(crit.map(|c| c.divergent)));
            row.push(opt(r.persistent_nonzero));
            row.push(r.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        let body = w.into_inner().map_err(|e| e.into_error())?;
        Ok(format!("{}\n{}", self.csv_comment(), String::from_utf8_lossy(&body)))
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
