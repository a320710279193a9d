//! `check` subcommand: engine feature-support matrix.

use std::path::Path;

use anyhow::Result;
use wasubench_core::check::{feature_csv, render_matrix, run_feature_checks};
use wasubench_core::executor::RunConfig;
use wasubench_core::registry::load_registry;

use crate::opts::CheckArgs;

pub fn check(registry: &Path, args: &CheckArgs) -> Result<()> {
    let (runtimes, groups) = load_registry(registry)?;
    let set = super::find_group(&groups, &args.set)?;

    let mut engines = Vec::new();
    for selector in &args.runtimes {
        engines.push(super::resolve_selector(&runtimes, selector)?);
    }
    let engine_refs: Vec<(&_, Option<&str>)> = engines
        .iter()
        .map(|(rt, sub)| (*rt, sub.as_deref()))
        .collect();

    let cfg = RunConfig {
        timeout_ms: args.timeout,
        ..RunConfig::default()
    };
    let report = run_feature_checks(&engine_refs, set, &cfg)?;
    print!("{}", render_matrix(&report));

    if let Some(path) = &args.csv {
        super::write_output(path, &feature_csv(&report))?;
    }
    Ok(())
}
