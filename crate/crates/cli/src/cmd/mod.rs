pub mod check;
pub mod eval;
pub mod reg;
pub mod run;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use wasubench_core::registry::{BenchmarkGroup, RuntimeSpec};

/// Parse a `NAME` or `NAME:SUBRUNTIME` selector against the loaded runtimes.
/// Fails before anything executes so bad selectors cost nothing.
pub fn resolve_selector<'a>(
    runtimes: &'a [RuntimeSpec],
    selector: &str,
) -> Result<(&'a RuntimeSpec, Option<String>)> {
    let (name, sub) = match selector.split_once(':') {
        Some((name, sub)) => (name, Some(sub)),
        None => (selector, None),
    };
    let rt = runtimes
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| anyhow!("unknown runtime: {name}"))?;
    if let Some(sub) = sub {
        if rt.subruntime(sub).is_none() {
            return Err(anyhow!("runtime {name} has no subruntime named {sub}"));
        }
        return Ok((rt, Some(sub.to_string())));
    }
    Ok((rt, None))
}

pub fn find_group<'a>(groups: &'a [BenchmarkGroup], name: &str) -> Result<&'a BenchmarkGroup> {
    groups
        .iter()
        .find(|g| g.name == name)
        .ok_or_else(|| anyhow!("unknown benchmark group: {name}"))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| anyhow!("cannot create directory {}: {e}", dir.display()))
}

/// Write a file, creating parent directories, and report it on stdout.
pub fn write_output(path: &PathBuf, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    std::fs::write(path, contents).map_err(|e| anyhow!("cannot write {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}
