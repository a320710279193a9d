//! Results persistence, CSV export, and aggregation.
//!
//! One results file corresponds to one `run` invocation. Failed and
//! timed-out repetitions stay in the file and the CSV (status column) but
//! are excluded from all statistics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvutil;
use crate::executor::{RunConfig, RunResult, RunStatus};

/// Only version written and accepted by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Column order of [`export_csv`]; stable public format.
pub const CSV_HEADER: &str =
    "group,benchmark,runtime,subruntime,repetition,status,exit_code,wall_time_ns,peak_rss_bytes,peak_vms_bytes,score";

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("results schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub hostname: String,
}

impl HostInfo {
    pub fn detect() -> Self {
        HostInfo {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            hostname: hostname(),
        }
    }
}

fn hostname() -> String {
    #[cfg(unix)]
    {
        let mut buf = [0u8; 256];
        let r = unsafe { libc::gethostname(buf.as_mut_ptr() as *mut libc::c_char, buf.len()) };
        if r == 0 {
            let end = buf.iter().position(|&b| b == 0).unwrap_or(buf.len());
            if let Ok(name) = std::str::from_utf8(&buf[..end]) {
                if !name.is_empty() {
                    return name.to_string();
                }
            }
        }
    }
    std::env::var("HOSTNAME").unwrap_or_else(|_| "unknown".to_string())
}

/// On-disk structure of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub created_utc: String,
    pub host: HostInfo,
    pub config: RunConfig,
    pub results: Vec<RunResult>,
}

impl ResultsFile {
    pub fn new(config: RunConfig, results: Vec<RunResult>) -> Self {
        ResultsFile {
            schema_version: SCHEMA_VERSION,
            created_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            host: HostInfo::detect(),
            config,
            results,
        }
    }
}

pub fn save_results(file: &ResultsFile, path: &Path) -> Result<(), ResultsError> {
    let mut text = serde_json::to_string_pretty(file)
        .map_err(|e| ResultsError::Schema(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| ResultsError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_results(path: &Path) -> Result<ResultsFile, ResultsError> {
    let text = std::fs::read_to_string(path).map_err(|e| ResultsError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;

    #[derive(Deserialize)]
    struct VersionProbe {
        schema_version: u32,
    }
    let probe: VersionProbe = serde_json::from_str(&text)
        .map_err(|e| ResultsError::Schema(format!("malformed results file: {e}")))?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(ResultsError::Schema(format!(
            "unknown schema_version {} (supported: {SCHEMA_VERSION})",
            probe.schema_version
        )));
    }
    serde_json::from_str(&text).map_err(|e| ResultsError::Schema(format!("malformed results file: {e}")))
}

/// Project every result into RFC 4180 CSV, one row per result in input order.
pub fn export_csv(file: &ResultsFile) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &file.results {
        csvutil::push_record(
            &mut out,
            &[
                r.group.clone(),
                r.benchmark_id.clone(),
                r.runtime.clone(),
                r.subruntime.clone().unwrap_or_default(),
                r.repetition.to_string(),
                r.status.to_string(),
                csvutil::opt_field(&r.exit_code),
                r.wall_time_ns.to_string(),
                csvutil::opt_field(&r.peak_rss_bytes),
                csvutil::opt_field(&r.peak_vms_bytes),
                csvutil::opt_field(&r.score),
            ],
        );
    }
    out
}

/// Aggregated statistics for one (group, benchmark, runtime, subruntime)
/// cell, computed over ok runs only.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub group: String,
    pub benchmark_id: String,
    pub runtime: String,
    pub subruntime: Option<String>,
    pub n_ok: usize,
    pub mean_time_ns: Option<f64>,
    pub min_time_ns: Option<f64>,
    pub max_time_ns: Option<f64>,
    pub stddev_time_ns: Option<f64>,
    pub mean_rss_bytes: Option<f64>,
    pub mean_vms_bytes: Option<f64>,
    pub mean_score: Option<f64>,
}

impl Summary {
    /// Display label of the runtime(/subruntime) this summary belongs to.
    pub fn runtime_label(&self) -> String {
        crate::registry::runtime_label(&self.runtime, self.subruntime.as_deref())
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (denominator n−1); 0 for a single observation.
fn sample_stddev(values: &[f64]) -> Option<f64> {
    match values.len() {
        0 => None,
        1 => Some(0.0),
        n => {
            let m = values.iter().sum::<f64>() / n as f64;
            let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
            Some((ss / (n as f64 - 1.0)).sqrt())
        }
    }
}

/// One summary per distinct (group, benchmark, runtime, subruntime), sorted
/// by that key. Permutation-invariant over the input order.
pub fn summarize(file: &ResultsFile) -> Vec<Summary> {
    type Key = (String, String, String, Option<String>);
    let mut cells: BTreeMap<Key, Vec<&RunResult>> = BTreeMap::new();
    for r in &file.results {
        cells
            .entry((
                r.group.clone(),
                r.benchmark_id.clone(),
                r.runtime.clone(),
                r.subruntime.clone(),
            ))
            .or_default()
            .push(r);
    }

    cells
        .into_iter()
        .map(|((group, benchmark_id, runtime, subruntime), runs)| {
            let ok: Vec<&&RunResult> = runs.iter().filter(|r| r.status == RunStatus::Ok).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.wall_time_ns as f64).collect();
            let rss: Vec<f64> = ok.iter().filter_map(|r| r.peak_rss_bytes).map(|v| v as f64).collect();
            let vms: Vec<f64> = ok.iter().filter_map(|r| r.peak_vms_bytes).map(|v| v as f64).collect();
            let scores: Vec<f64> = ok.iter().filter_map(|r| r.score).collect();
            Summary {
                group,
                benchmark_id,
                runtime,
                subruntime,
                n_ok: ok.len(),
                mean_time_ns: mean(&times),
                min_time_ns: times.iter().copied().fold(None, fold_min),
                max_time_ns: times.iter().copied().fold(None, fold_max),
                stddev_time_ns: sample_stddev(&times),
                mean_rss_bytes: mean(&rss),
                mean_vms_bytes: mean(&vms),
                mean_score: mean(&scores),
            }
        })
        .collect()
}

fn fold_min(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.min(v)))
}

fn fold_max(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(time: u64, status: RunStatus) -> RunResult {
        RunResult {
            group: "g".into(),
            benchmark_id: "b".into(),
            runtime: "rt".into(),
            subruntime: None,
            repetition: 0,
            status,
            exit_code: Some(if status == RunStatus::Ok { 0 } else { 1 }),
            wall_time_ns: time,
            peak_rss_bytes: None,
            peak_vms_bytes: None,
            score: None,
            stdout_excerpt: String::new(),
            stderr_excerpt: String::new(),
            timestamp_utc: "2026-01-01T00:00:00.000Z".into(),
        }
    }

    #[test]
    fn summary_mean_and_stddev() {
        // Hand check: mean 200, stddev = sqrt(((100-200)^2 + (300-200)^2)/1)
        //           = sqrt(20000) = 141.4213562...
        let file = ResultsFile::new(
            RunConfig::default(),
            vec![result(100, RunStatus::Ok), result(300, RunStatus::Ok)],
        );
        let s = summarize(&file);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n_ok, 2);
        assert_eq!(s[0].mean_time_ns, Some(200.0));
        assert_eq!(s[0].min_time_ns, Some(100.0));
        assert_eq!(s[0].max_time_ns, Some(300.0));
        assert!((s[0].stddev_time_ns.unwrap() - 141.4213562373095).abs() < 1e-9);
    }

    #[test]
    fn summary_filters_non_ok() {
        let file = ResultsFile::new(
            RunConfig::default(),
            vec![
                result(100, RunStatus::Ok),
                result(999, RunStatus::Timeout),
                result(300, RunStatus::Ok),
            ],
        );
        let s = summarize(&file);
        assert_eq!(s[0].n_ok, 2);
        assert_eq!(s[0].mean_time_ns, Some(200.0));
    }

    #[test]
    fn summary_single_run_has_zero_stddev() {
        let file = ResultsFile::new(RunConfig::default(), vec![result(50, RunStatus::Ok)]);
        let s = summarize(&file);
        assert_eq!(s[0].mean_time_ns, Some(50.0));
        assert_eq!(s[0].stddev_time_ns, Some(0.0));
    }

    #[test]
    fn summary_all_failed_is_empty_stats() {
        let file = ResultsFile::new(RunConfig::default(), vec![result(50, RunStatus::NonzeroExit)]);
        let s = summarize(&file);
        assert_eq!(s[0].n_ok, 0);
        assert_eq!(s[0].mean_time_ns, None);
        assert_eq!(s[0].stddev_time_ns, None);
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let mut a = vec![result(100, RunStatus::Ok), result(300, RunStatus::Ok), result(200, RunStatus::Ok)];
        let file1 = ResultsFile::new(RunConfig::default(), a.clone());
        a.reverse();
        let file2 = ResultsFile::new(RunConfig::default(), a);
        assert_eq!(summarize(&file1), summarize(&file2));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut r = result(5_000_000, RunStatus::Ok);
        r.peak_rss_bytes = Some(1_048_576);
        let file = ResultsFile::new(RunConfig::default(), vec![r]);
        let csv = export_csv(&file);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "g,b,rt,,0,ok,0,5000000,1048576,,");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn csv_empty_results_is_header_only() {
        let file = ResultsFile::new(RunConfig::default(), vec![]);
        assert_eq!(export_csv(&file), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_quotes_embedded_comma() {
        let mut r = result(1, RunStatus::Ok);
        r.benchmark_id = "a,b".into();
        let file = ResultsFile::new(RunConfig::default(), vec![r]);
        let csv = export_csv(&file);
        assert!(csv.lines().nth(1).unwrap().starts_with("g,\"a,b\",rt,"));
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let mut r2 = result(77, RunStatus::Ok);
        r2.score = Some(42.5);
        r2.subruntime = Some("aot".into());
        let file = ResultsFile::new(RunConfig::default(), vec![result(5, RunStatus::Ok), r2]);
        save_results(&file, &path).unwrap();
        let loaded = load_results(&path).unwrap();
        assert_eq!(file, loaded);
    }

    #[test]
    fn unknown_schema_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let file = ResultsFile::new(RunConfig::default(), vec![]);
        let mut value = serde_json::to_value(&file).unwrap();
        value["schema_version"] = serde_json::json!(99);
        std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        assert!(matches!(load_results(&path), Err(ResultsError::Schema(_))));
    }

    #[test]
    fn empty_results_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let file = ResultsFile::new(RunConfig::default(), vec![]);
        save_results(&file, &path).unwrap();
        assert!(load_results(&path).unwrap().results.is_empty());
    }
}
