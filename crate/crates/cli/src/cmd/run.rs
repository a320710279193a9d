//! `run` subcommand: the measured execution phase.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use wasubench_core::executor::{run_benchmark, RunConfig};
use wasubench_core::registry::{
    load_registry, resolve_invocation, runtime_label, BenchmarkSpec, RuntimeSpec,
};
use wasubench_core::results::{save_results, ResultsFile};

use crate::opts::RunArgs;

pub fn run(registry: &Path, output_dir: &Path, args: &RunArgs) -> Result<()> {
    let (runtimes, groups) = load_registry(registry)?;

    // Fail-fast validation: every selector must resolve before anything runs.
    let mut selected_runtimes: Vec<(&RuntimeSpec, Option<String>)> = if args.runtimes.is_empty() {
        let mut all: Vec<(&RuntimeSpec, Option<String>)> =
            runtimes.iter().map(|rt| (rt, None)).collect();
        all.sort_by_key(|(rt, _)| rt.name.clone());
        all
    } else {
        let mut picked = Vec::new();
        for selector in &args.runtimes {
            picked.push(super::resolve_selector(&runtimes, selector)?);
        }
        picked.sort_by_key(|(rt, sub)| runtime_label(&rt.name, sub.as_deref()));
        picked.dedup_by_key(|(rt, sub)| runtime_label(&rt.name, sub.as_deref()));
        picked
    };
    if selected_runtimes.is_empty() {
        return Err(anyhow!("no runtimes registered; use `runtimes add`"));
    }
    selected_runtimes.sort_by_key(|(rt, sub)| runtime_label(&rt.name, sub.as_deref()));

    let mut selected_benches: Vec<&BenchmarkSpec> = Vec::new();
    if args.groups.is_empty() && args.benches.is_empty() {
        for group in &groups {
            selected_benches.extend(group.benchmarks.iter());
        }
    } else {
        for name in &args.groups {
            let group = super::find_group(&groups, name)?;
            selected_benches.extend(group.benchmarks.iter());
        }
        for target in &args.benches {
            let (group_name, id) = target
                .split_once('/')
                .ok_or_else(|| anyhow!("benchmark selector must be GROUP/ID, got {target}"))?;
            let group = super::find_group(&groups, group_name)?;
            let bench = group
                .benchmark(id)
                .ok_or_else(|| anyhow!("unknown benchmark: {target}"))?;
            selected_benches.push(bench);
        }
    }
    selected_benches.sort_by_key(|b| (b.group.clone(), b.id.clone()));
    selected_benches.dedup_by_key(|b| (b.group.clone(), b.id.clone()));
    if selected_benches.is_empty() {
        return Err(anyhow!("no benchmarks selected"));
    }

    let cfg = RunConfig {
        repetitions: args.repetitions.max(1),
        timeout_ms: args.timeout,
        track_memory: !args.no_mem,
        ..RunConfig::default()
    };

    if args.dry_run {
        for bench in &selected_benches {
            for (rt, sub) in &selected_runtimes {
                let cmd = resolve_invocation(rt, sub.as_deref(), bench)?;
                let label = runtime_label(&rt.name, sub.as_deref());
                println!(
                    "{}/{} @ {label}: {} {}",
                    bench.group,
                    bench.id,
                    cmd.exec.display(),
                    cmd.argv.join(" ")
                );
            }
        }
        return Ok(());
    }

    let mut all_results = Vec::new();
    for bench in &selected_benches {
        for (rt, sub) in &selected_runtimes {
            let label = runtime_label(&rt.name, sub.as_deref());
            let results = run_benchmark(rt, sub.as_deref(), bench, &cfg)?;
            for r in &results {
                println!(
                    "{}/{} @ {label} rep {}: {} ({:.3} ms)",
                    r.group,
                    r.benchmark_id,
                    r.repetition,
                    r.status,
                    r.wall_time_ns as f64 / 1e6
                );
            }
            all_results.extend(results);
        }
    }

    let file = ResultsFile::new(cfg, all_results);
    let path = match &args.output {
        Some(p) => p.clone(),
        None => default_results_path(output_dir),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            super::ensure_dir(parent)?;
        }
    }
    save_results(&file, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn default_results_path(output_dir: &Path) -> PathBuf {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    output_dir.join(format!("results-{stamp}.json"))
}
