//! Benchmark records and their CSV/JSON serialization.
//!
//! One row per evaluated (state, t, lambda) combination, fixed column order,
//! header mandatory. Floats print in Rust's shortest round-trip form so the
//! same configuration always produces byte-identical files.

use serde::Serialize;

/// One evaluation of the commutation residual.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkRecord {
    pub scenario: u8,
    pub generator: String,
    pub state_id: usize,
    pub t: f64,
    /// Werner parameter when applicable.
    pub lambda: Option<f64>,
    /// Trace-norm commutation residual.
    pub residual: f64,
    /// Distance of the evaluated state from the analytic existence
    /// condition of the scenario.
    pub condition_residual: f64,
    pub seed: u64,
}

/// Quantile summary recomputable from the raw records.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub p01: f64,
    pub median: f64,
}

impl Summary {
    pub fn from_residuals(values: &[f64]) -> Self {
        assert!(!values.is_empty());
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |q: f64| -> f64 {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            if lo == hi {
                sorted[lo]
            } else {
                let w = pos - lo as f64;
                sorted[lo] * (1.0 - w) + sorted[hi] * w
            }
        };
        Summary { min: sorted[0], p01: quantile(0.01), median: quantile(0.5) }
    }
}

pub const CSV_HEADER: &str =
    "scenario,generator,state_id,t,lambda,residual,condition_residual,seed";

fn float_field(v: f64) -> String {
    // shortest round-trip representation, deterministic across runs
    format!("{v}")
}

pub fn to_csv(records: &[BenchmarkRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.generator,
            r.state_id,
            float_field(r.t),
            r.lambda.map(float_field).unwrap_or_default(),
            float_field(r.residual),
            float_field(r.condition_residual),
            r.seed,
        ));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct JsonReport<'a> {
    pub records: &'a [BenchmarkRecord],
    pub summary: Summary,
    /// Free-form notes (for example the separability boundary of a Werner
    /// sweep).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn to_json(records: &[BenchmarkRecord], notes: Vec<String>) -> String {
    let summary =
        Summary::from_residuals(&records.iter().map(|r| r.residual).collect::<Vec<_>>());
    serde_json::to_string_pretty(&JsonReport { records, summary, notes })
        .expect("records serialize")
}
