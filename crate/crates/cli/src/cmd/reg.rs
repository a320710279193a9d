//! `benchmarks` and `runtimes` subcommands.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use wasubench_core::registry::{
    load_registry, register_runtime, remove_runtime, runtime_label, BenchmarkSpec, RuntimeSpec,
};

use crate::opts::{BenchmarksAction, RuntimesAction};

pub fn benchmarks(registry: &Path, action: &BenchmarksAction) -> Result<()> {
    let (_, mut groups) = load_registry(registry)?;
    groups.sort_by(|a, b| a.name.cmp(&b.name));
    match action {
        BenchmarksAction::List => {
            for group in &groups {
                println!("{} ({} benchmarks)", group.name, group.benchmarks.len());
                let mut ids: Vec<&str> = group.benchmarks.iter().map(|b| b.id.as_str()).collect();
                ids.sort();
                for id in ids {
                    println!("  {}/{id}", group.name);
                }
            }
        }
        BenchmarksAction::Show { target } => match target.split_once('/') {
            Some((group_name, id)) => {
                let group = super::find_group(&groups, group_name)?;
                let bench = group
                    .benchmark(id)
                    .ok_or_else(|| anyhow!("unknown benchmark: {target}"))?;
                print_benchmark(bench);
            }
            None => {
                let group = super::find_group(&groups, target)?;
                println!("group: {}", group.name);
                for bench in &group.benchmarks {
                    print_benchmark(bench);
                }
            }
        },
    }
    Ok(())
}

fn print_benchmark(bench: &BenchmarkSpec) {
    println!("{}/{}", bench.group, bench.id);
    println!("  module: {}", bench.module_path.display());
    if !bench.args.is_empty() {
        println!("  args: {}", bench.args.join(" "));
    }
    if let Some(stdin) = &bench.stdin_path {
        println!("  stdin: {}", stdin.display());
    }
    if let Some(rule) = &bench.expected_output {
        println!("  expected_output: {:?} {:?}", rule.kind, rule.value);
    }
    if let Some(rule) = &bench.score_rule {
        println!(
            "  score_rule: {:?} ({})",
            rule.pattern,
            if rule.higher_is_better { "higher is better" } else { "lower is better" }
        );
    }
}

pub fn runtimes(registry: &Path, action: &RuntimesAction) -> Result<()> {
    match action {
        RuntimesAction::List => {
            let (mut runtimes, _) = load_registry(registry)?;
            runtimes.sort_by(|a, b| a.name.cmp(&b.name));
            for rt in &runtimes {
                println!("{}", rt.name);
                for sub in &rt.subruntimes {
                    println!("  {}", runtime_label(&rt.name, Some(&sub.name)));
                }
            }
        }
        RuntimesAction::Add { spec } => {
            let text = std::fs::read_to_string(spec)
                .with_context(|| format!("cannot read {}", spec.display()))?;
            let parsed: RuntimeSpec = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse {}", spec.display()))?;
            let path = register_runtime(registry, &parsed)?;
            println!("registered {} at {}", parsed.name, path.display());
        }
        RuntimesAction::Remove { name } => {
            remove_runtime(registry, name)?;
            println!("removed {name}");
        }
        RuntimesAction::Show { name } => {
            let (runtimes, _) = load_registry(registry)?;
            let rt = runtimes
                .iter()
                .find(|r| r.name == *name)
                .ok_or_else(|| anyhow!("unknown runtime: {name}"))?;
            println!("{}", serde_json::to_string_pretty(rt)?);
        }
    }
    Ok(())
}
