//! Dynamic-execution metrics computed from instruction profiles.
//!
//! A profile carries the static shape of a module (function, instruction and
//! block totals) plus dynamic execution counters per instruction site and per
//! block. From it this module derives the per-benchmark metric vector:
//! hotness reach (the number of distinct sites needed to cover a percentage
//! of all executed instructions, hottest first), coverage percentages,
//! opcode-class tallies, the share of execution spent in the hottest
//! function, loop-entry counts, and the function/execution CDF.
//!
//! Execution "time" in the reach metrics is count-weighted: the profile
//! carries execution counts, not cycle timings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvutil;
use crate::results::Summary;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("malformed profile {path}: {reason}")]
    MalformedProfile { path: PathBuf, reason: String },
    #[error("profile invariant violated in {path}: {reason}")]
    InvariantViolation { path: PathBuf, reason: String },
    #[error("profile has no executed instructions")]
    EmptyProfile,
    #[error("degenerate module: static {what} total is zero")]
    DegenerateModule { what: &'static str },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticTotals {
    pub functions: u64,
    pub instructions: u64,
    pub blocks: u64,
}

/// One instruction site: a (function, byte offset) location with its opcode
/// and dynamic execution count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub func: u32,
    pub offset: u32,
    pub opcode: String,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Block,
    Loop,
    If,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub func: u32,
    pub block: u32,
    pub kind: BlockKind,
    pub count: u64,
}

/// Parsed dynamic profile of one benchmark. Counts of zero are permitted and
/// treated as not covered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileData {
    pub benchmark_id: String,
    pub group: String,
    pub static_totals: StaticTotals,
    pub sites: Vec<Site>,
    pub blocks: Vec<BlockEntry>,
}

/// Opcode classification used for the dynamic-count tallies. `Other` absorbs
/// every mnemonic the specific classes do not claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpClass {
    GlobalRead,
    GlobalWrite,
    MemRead,
    MemWrite,
    IndirectCall,
    Int,
    Float,
    Other,
}

/// Classify a mnemonic. Priority order matters: memory accesses win over the
/// numeric-type prefixes (`i32.load` is a read, not an int op).
pub fn classify_opcode(mnemonic: &str) -> OpClass {
    if mnemonic == "global.get" {
        OpClass::GlobalRead
    } else if mnemonic == "global.set" {
        OpClass::GlobalWrite
    } else if mnemonic.contains(".load") {
        OpClass::MemRead
    } else if mnemonic.contains(".store") {
        OpClass::MemWrite
    } else if mnemonic == "call_indirect" {
        OpClass::IndirectCall
    } else if mnemonic.starts_with("i32.") || mnemonic.starts_with("i64.") {
        OpClass::Int
    } else if mnemonic.starts_with("f32.") || mnemonic.starts_with("f64.") {
        OpClass::Float
    } else {
        OpClass::Other
    }
}

/// The per-benchmark metric vector. `time_ns`/`rss`/`vms` come from run
/// results and are absent when the benchmark has no ok runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub benchmark_id: String,
    pub group: String,
    pub reach_50: u64,
    pub reach_75: u64,
    pub reach_90: u64,
    pub reach_95: u64,
    pub reach_99: u64,
    pub reach_100: u64,
    pub instr_cov: f64,
    pub block_cov: f64,
    pub func_cov: f64,
    pub exec_funcs: u64,
    pub exec_inst: u64,
    pub total_funcs: u64,
    pub g_reads: u64,
    pub g_writes: u64,
    pub int_ops: u64,
    pub float_ops: u64,
    pub ind_call: u64,
    pub writes: u64,
    pub reads: u64,
    pub in_first: f64,
    pub total_cycles: u64,
    pub time_ns: Option<f64>,
    pub rss: Option<f64>,
    pub vms: Option<f64>,
}

/// Metric column names in table order (after the benchmark_id/group keys).
pub const METRIC_COLUMNS: [&str; 24] = [
    "reach_50",
    "reach_75",
    "reach_90",
    "reach_95",
    "reach_99",
    "reach_100",
    "instr_cov",
    "block_cov",
    "func_cov",
    "exec_funcs",
    "exec_inst",
    "total_funcs",
    "g_reads",
    "g_writes",
    "int_ops",
    "float_ops",
    "ind_call",
    "writes",
    "reads",
    "in_first",
    "total_cycles",
    "time_ns",
    "rss",
    "vms",
];

// ---------------------------------------------------------------------------
// Parsing.

/// Parse and validate one profile file.
pub fn parse_profile(path: &Path) -> Result<ProfileData, AnalysisError> {
    let text = std::fs::read_to_string(path).map_err(|e| AnalysisError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let profile: ProfileData =
        serde_json::from_str(&text).map_err(|e| AnalysisError::MalformedProfile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    validate_profile(&profile, path)?;
    Ok(profile)
}

fn validate_profile(p: &ProfileData, path: &Path) -> Result<(), AnalysisError> {
    let malformed = |reason: String| AnalysisError::MalformedProfile {
        path: path.to_path_buf(),
        reason,
    };
    let violated = |reason: String| AnalysisError::InvariantViolation {
        path: path.to_path_buf(),
        reason,
    };

    let mut site_keys = BTreeSet::new();
    for s in &p.sites {
        if !site_keys.insert((s.func, s.offset)) {
            return Err(malformed(format!("duplicate site (func {}, offset {})", s.func, s.offset)));
        }
    }
    let mut block_keys = BTreeSet::new();
    for b in &p.blocks {
        if !block_keys.insert((b.func, b.block)) {
            return Err(malformed(format!("duplicate block (func {}, block {})", b.func, b.block)));
        }
    }

    if p.sites.len() as u64 > p.static_totals.instructions {
        return Err(violated(format!(
            "{} sites exceed {} static instructions",
            p.sites.len(),
            p.static_totals.instructions
        )));
    }
    if p.blocks.len() as u64 > p.static_totals.blocks {
        return Err(violated(format!(
            "{} block entries exceed {} static blocks",
            p.blocks.len(),
            p.static_totals.blocks
        )));
    }
    let funcs: BTreeSet<u32> = p
        .sites
        .iter()
        .map(|s| s.func)
        .chain(p.blocks.iter().map(|b| b.func))
        .collect();
    if funcs.len() as u64 > p.static_totals.functions {
        return Err(violated(format!(
            "{} distinct functions referenced but module has {}",
            funcs.len(),
            p.static_totals.functions
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Metric computations.

fn covered_sites(sites: &[Site]) -> u64 {
    sites.iter().filter(|s| s.count > 0).count() as u64
}

fn total_count(sites: &[Site]) -> u64 {
    sites.iter().map(|s| s.count).sum()
}

/// Hotness-ordered view of the covered sites: count descending, ties by
/// (func, offset) ascending.
fn hotness_order(sites: &[Site]) -> Vec<&Site> {
    let mut covered: Vec<&Site> = sites.iter().filter(|s| s.count > 0).collect();
    covered.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| (a.func, a.offset).cmp(&(b.func, b.offset)))
    });
    covered
}

/// Smallest number of distinct sites, hottest first, whose cumulative count
/// reaches `percent` of the total executed instructions. Exact integer
/// arithmetic: `k` satisfies `100·cum ≥ percent·total`.
pub fn compute_reach(sites: &[Site], percent: u32) -> Result<u64, AnalysisError> {
    assert!((1..=100).contains(&percent), "percent must be in 1..=100");
    let total = total_count(sites);
    if total == 0 {
        return Err(AnalysisError::EmptyProfile);
    }
    let threshold = u128::from(percent) * u128::from(total);
    let mut cum: u128 = 0;
    for (k, site) in hotness_order(sites).iter().enumerate() {
        cum += u128::from(site.count);
        if cum * 100 >= threshold {
            return Ok(k as u64 + 1);
        }
    }
    // Unreachable: the full cumulative sum always reaches 100%.
    Ok(covered_sites(sites))
}

/// Percentage of static instructions / blocks / functions executed at least
/// once.
pub fn compute_coverage(p: &ProfileData) -> Result<(f64, f64, f64), AnalysisError> {
    if p.static_totals.instructions == 0 {
        return Err(AnalysisError::DegenerateModule { what: "instruction" });
    }
    if p.static_totals.blocks == 0 {
        return Err(AnalysisError::DegenerateModule { what: "block" });
    }
    if p.static_totals.functions == 0 {
        return Err(AnalysisError::DegenerateModule { what: "function" });
    }
    let instr_cov = 100.0 * covered_sites(&p.sites) as f64 / p.static_totals.instructions as f64;
    let covered_blocks = p.blocks.iter().filter(|b| b.count > 0).count() as f64;
    let block_cov = 100.0 * covered_blocks / p.static_totals.blocks as f64;
    let func_cov = 100.0 * executed_functions(p).len() as f64 / p.static_totals.functions as f64;
    Ok((instr_cov, block_cov, func_cov))
}

/// Per-function dynamic instruction counts, functions with count > 0 only.
fn executed_functions(p: &ProfileData) -> BTreeMap<u32, u64> {
    let mut totals: BTreeMap<u32, u64> = BTreeMap::new();
    for s in &p.sites {
        if s.count > 0 {
            *totals.entry(s.func).or_insert(0) += s.count;
        }
    }
    totals
}

/// Assemble the full metric vector for one benchmark.
///
/// `summaries` are this benchmark's per-runtime aggregates; their means are
/// averaged unweighted across runtimes, skipping runtimes without ok runs.
pub fn compute_metrics_row(
    p: &ProfileData,
    summaries: &[Summary],
) -> Result<MetricsRow, AnalysisError> {
    let exec_inst = total_count(&p.sites);
    if exec_inst == 0 {
        return Err(AnalysisError::EmptyProfile);
    }
    let (instr_cov, block_cov, func_cov) = compute_coverage(p)?;

    let mut tallies: BTreeMap<OpClass, u64> = BTreeMap::new();
    for s in &p.sites {
        *tallies.entry(classify_opcode(&s.opcode)).or_insert(0) += s.count;
    }
    let tally = |class: OpClass| tallies.get(&class).copied().unwrap_or(0);

    let func_totals = executed_functions(p);
    let hottest = func_totals.values().copied().max().unwrap_or(0);
    let in_first = 100.0 * hottest as f64 / exec_inst as f64;

    let total_cycles = p
        .blocks
        .iter()
        .filter(|b| b.kind == BlockKind::Loop)
        .map(|b| b.count)
        .sum();

    let times: Vec<f64> = summaries.iter().filter_map(|s| s.mean_time_ns).collect();
    let rss: Vec<f64> = summaries.iter().filter_map(|s| s.mean_rss_bytes).collect();
    let vms: Vec<f64> = summaries.iter().filter_map(|s| s.mean_vms_bytes).collect();
    let unweighted_mean = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    };

    Ok(MetricsRow {
        benchmark_id: p.benchmark_id.clone(),
        group: p.group.clone(),
        reach_50: compute_reach(&p.sites, 50)?,
        reach_75: compute_reach(&p.sites, 75)?,
        reach_90: compute_reach(&p.sites, 90)?,
        reach_95: compute_reach(&p.sites, 95)?,
        reach_99: compute_reach(&p.sites, 99)?,
        reach_100: compute_reach(&p.sites, 100)?,
        instr_cov,
        block_cov,
        func_cov,
        exec_funcs: func_totals.len() as u64,
        exec_inst,
        total_funcs: p.static_totals.functions,
        g_reads: tally(OpClass::GlobalRead),
        g_writes: tally(OpClass::GlobalWrite),
        int_ops: tally(OpClass::Int),
        float_ops: tally(OpClass::Float),
        ind_call: tally(OpClass::IndirectCall),
        writes: tally(OpClass::MemWrite),
        reads: tally(OpClass::MemRead),
        in_first,
        total_cycles,
        time_ns: unweighted_mean(&times),
        rss: unweighted_mean(&rss),
        vms: unweighted_mean(&vms),
    })
}

/// Cumulative share of execution as a function of the share of executed
/// functions, hottest function first. Ends at exactly (1.0, 1.0).
pub fn function_time_cdf(p: &ProfileData) -> Result<Vec<(f64, f64)>, AnalysisError> {
    let exec_inst = total_count(&p.sites);
    if exec_inst == 0 {
        return Err(AnalysisError::EmptyProfile);
    }
    let func_totals = executed_functions(p);
    let mut counts: Vec<(u32, u64)> = func_totals.into_iter().collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let n = counts.len() as f64;
    let mut points = Vec::with_capacity(counts.len());
    let mut cum: u64 = 0;
    for (i, (_, count)) in counts.iter().enumerate() {
        cum += count;
        points.push(((i as f64 + 1.0) / n, cum as f64 / exec_inst as f64));
    }
    Ok(points)
}

/// CSV projection of metric rows: benchmark_id, group, then the 24 metric
/// columns in table order.
pub fn metrics_table(rows: &[MetricsRow]) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = vec!["benchmark_id", "group"];
    header.extend(METRIC_COLUMNS);
    csvutil::push_record(&mut out, &header);
    for r in rows {
        csvutil::push_record(
            &mut out,
            &[
                r.benchmark_id.clone(),
                r.group.clone(),
                r.reach_50.to_string(),
                r.reach_75.to_string(),
                r.reach_90.to_string(),
                r.reach_95.to_string(),
                r.reach_99.to_string(),
                r.reach_100.to_string(),
                r.instr_cov.to_string(),
                r.block_cov.to_string(),
                r.func_cov.to_string(),
                r.exec_funcs.to_string(),
                r.exec_inst.to_string(),
                r.total_funcs.to_string(),
                r.g_reads.to_string(),
                r.g_writes.to_string(),
                r.int_ops.to_string(),
                r.float_ops.to_string(),
                r.ind_call.to_string(),
                r.writes.to_string(),
                r.reads.to_string(),
                r.in_first.to_string(),
                r.total_cycles.to_string(),
                csvutil::opt_field(&r.time_ns),
                csvutil::opt_field(&r.rss),
                csvutil::opt_field(&r.vms),
            ],
        );
    }
    out
}
