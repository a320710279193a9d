//! Engine feature-support matrices.
//!
//! A payload set is an ordinary benchmark group whose entries are tiny
//! modules exercising one proposal each. An engine supports a payload when
//! it executes it successfully; any execution failure (nonzero exit, output
//! mismatch, hang) counts as lack of support, and a missing engine
//! executable is reported separately as an error.

use crate::csvutil;
use crate::executor::{run_benchmark, RunConfig, RunStatus};
use crate::registry::{runtime_label, BenchmarkGroup, RegistryError, RuntimeSpec};

/// Per-payload timeout applied when the caller did not set one.
pub const DEFAULT_CHECK_TIMEOUT_MS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportVerdict {
    Supported,
    Unsupported,
    Error,
}

impl SupportVerdict {
    pub fn as_cell(self) -> &'static str {
        match self {
            SupportVerdict::Supported => "yes",
            SupportVerdict::Unsupported => "no",
            SupportVerdict::Error => "err",
        }
    }

    /// Total mapping from run status to verdict.
    pub fn from_status(status: RunStatus) -> Self {
        match status {
            RunStatus::Ok => SupportVerdict::Supported,
            RunStatus::NonzeroExit | RunStatus::Timeout | RunStatus::OutputMismatch => {
                SupportVerdict::Unsupported
            }
            RunStatus::SpawnError => SupportVerdict::Error,
        }
    }
}

/// Support matrix for one payload set, indexed `support[engine][payload]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureReport {
    pub payload_set: String,
    pub engines: Vec<String>,
    pub payloads: Vec<String>,
    pub support: Vec<Vec<SupportVerdict>>,
    /// (engine index, payload index) cells whose run timed out; rendered as a
    /// footnote since a hang is reported as non-support.
    pub timed_out: Vec<(usize, usize)>,
}

/// Run every payload of `set` on every selected engine, one execution per
/// cell (repetitions forced to 1).
pub fn run_feature_checks(
    engines: &[(&RuntimeSpec, Option<&str>)],
    set: &BenchmarkGroup,
    cfg: &RunConfig,
) -> Result<FeatureReport, RegistryError> {
    let mut cell_cfg = cfg.clone();
    cell_cfg.repetitions = 1;
    if cell_cfg.timeout_ms.is_none() {
        cell_cfg.timeout_ms = Some(DEFAULT_CHECK_TIMEOUT_MS);
    }

    let labels: Vec<String> = engines
        .iter()
        .map(|(rt, sub)| runtime_label(&rt.name, *sub))
        .collect();
    let payloads: Vec<String> = set.benchmarks.iter().map(|b| b.id.clone()).collect();

    let mut support = Vec::with_capacity(engines.len());
    let mut timed_out = Vec::new();
    for (ei, (rt, sub)) in engines.iter().enumerate() {
        let mut row = Vec::with_capacity(payloads.len());
        for (pi, bench) in set.benchmarks.iter().enumerate() {
            let results = run_benchmark(rt, *sub, bench, &cell_cfg)?;
            let status = results.first().map_or(RunStatus::SpawnError, |r| r.status);
            if status == RunStatus::Timeout {
                timed_out.push((ei, pi));
            }
            row.push(SupportVerdict::from_status(status));
        }
        support.push(row);
    }

    Ok(FeatureReport {
        payload_set: set.name.clone(),
        engines: labels,
        payloads,
        support,
        timed_out,
    })
}

/// Render the matrix as a plain-text table: payload rows, engine columns.
/// Byte-deterministic for a fixed report.
pub fn render_matrix(report: &FeatureReport) -> String {
    let mut widths = Vec::with_capacity(report.engines.len() + 1);
    let payload_width = report
        .payloads
        .iter()
        .map(String::len)
        .chain(std::iter::once("payload".len()))
        .max()
        .unwrap_or(0);
    widths.push(payload_width);
    for (ei, label) in report.engines.iter().enumerate() {
        let cells = report.payloads.len();
        let cell_max = (0..cells)
            .map(|pi| report.support[ei][pi].as_cell().len())
            .max()
            .unwrap_or(0);
        widths.push(label.len().max(cell_max));
    }

    let mut out = String::new();
    let mut header: Vec<String> = vec![pad("payload", widths[0])];
    for (ei, label) in report.engines.iter().enumerate() {
        header.push(pad(label, widths[ei + 1]));
    }
    out.push_str(header.join("  ").trim_end());
    out.push('\n');

    for (pi, payload) in report.payloads.iter().enumerate() {
        let mut row: Vec<String> = vec![pad(payload, widths[0])];
        for ei in 0..report.engines.len() {
            row.push(pad(report.support[ei][pi].as_cell(), widths[ei + 1]));
        }
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
    }

    for (ei, pi) in &report.timed_out {
        out.push_str(&format!(
            "note: {} timed out on {} (reported as no)\n",
            report.engines[*ei], report.payloads[*pi]
        ));
    }
    out
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

/// CSV projection: one row per matrix cell.
pub fn feature_csv(report: &FeatureReport) -> String {
    let mut out = String::new();
    out.push_str("payload,engine,verdict\n");
    for (pi, payload) in report.payloads.iter().enumerate() {
        for (ei, engine) in report.engines.iter().enumerate() {
            csvutil::push_record(
                &mut out,
                &[payload.as_str(), engine.as_str(), report.support[ei][pi].as_cell()],
            );
        }
    }
    out
}
