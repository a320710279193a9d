//! Engine and benchmark registries.
//!
//! A registry is a directory with two kinds of JSON configuration:
//!
//! * `<dir>/runtimes/<name>.json` — one file per engine ([`RuntimeSpec`]).
//! * `<dir>/benchmarks/<group>/group.json` — one file per benchmark group,
//!   with the wasm payloads stored beside it.
//!
//! Parsing is strict: unknown keys are rejected so typos surface as errors
//! instead of silently changing behavior. Relative paths inside a config are
//! resolved against the directory of the file that declared them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Placeholder token replaced by the path of the wasm payload.
pub const MODULE_PLACEHOLDER: &str = "{module}";
/// Placeholder token replaced by the benchmark's argument list.
pub const ARGS_PLACEHOLDER: &str = "{args}";

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("malformed config {path}: {reason}")]
    MalformedConfig { path: PathBuf, reason: String },
    #[error("duplicate name: {0}")]
    DuplicateName(String),
    #[error("args template of {name} must contain exactly one {MODULE_PLACEHOLDER} token")]
    MissingPlaceholder { name: String },
    #[error("runtime {runtime} has no subruntime named {sub}")]
    UnknownSubruntime { runtime: String, sub: String },
    #[error("unknown runtime: {0}")]
    UnknownRuntime(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How to invoke one engine executable on a wasm module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeSpec {
    pub name: String,
    /// Path to the engine executable. Relative paths are resolved against the
    /// config file's directory at load time.
    pub exec: PathBuf,
    /// Ordered invocation tokens; must contain exactly one `{module}` and at
    /// most one `{args}` placeholder.
    pub args_template: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub env: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subruntimes: Vec<SubruntimeSpec>,
    /// Free-text note on how to obtain the engine; never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub install_hint: Option<String>,
}

/// A named flag/mode variant of a runtime reusing the same executable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubruntimeSpec {
    pub name: String,
    /// Full replacement for the parent template (same placeholder rules).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub args_template_override: Option<Vec<String>>,
    /// Literal tokens inserted before `{module}` when no override is given.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_args: Vec<String>,
    /// Merged over the parent env; entries here win.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub env_override: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Exact,
    Regex,
}

/// Rule deciding whether a benchmark's stdout counts as correct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRule {
    pub kind: OutputKind,
    pub value: String,
}

/// Rule extracting a numeric score from stdout. The pattern must contain
/// exactly one capture group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRule {
    pub pattern: String,
    #[serde(default = "default_true")]
    pub higher_is_better: bool,
}

fn default_true() -> bool {
    true
}

/// One wasm payload plus how to run and judge it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkSpec {
    pub id: String,
    pub group: String,
    pub module_path: PathBuf,
    pub args: Vec<String>,
    pub stdin_path: Option<PathBuf>,
    pub expected_output: Option<OutputRule>,
    pub score_rule: Option<ScoreRule>,
}

/// A named suite of benchmarks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkGroup {
    pub name: String,
    pub benchmarks: Vec<BenchmarkSpec>,
}

impl BenchmarkGroup {
    pub fn benchmark(&self, id: &str) -> Option<&BenchmarkSpec> {
        self.benchmarks.iter().find(|b| b.id == id)
    }
}

/// A fully resolved invocation: no placeholder tokens remain in `argv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandLine {
    pub exec: PathBuf,
    pub argv: Vec<String>,
    pub env: BTreeMap<String, String>,
    pub stdin_path: Option<PathBuf>,
}

/// Display label for a runtime or runtime:subruntime selection.
pub fn runtime_label(runtime: &str, sub: Option<&str>) -> String {
    match sub {
        Some(s) => format!("{runtime}:{s}"),
        None => runtime.to_string(),
    }
}

impl RuntimeSpec {
    pub fn subruntime(&self, name: &str) -> Option<&SubruntimeSpec> {
        self.subruntimes.iter().find(|s| s.name == name)
    }
}

// ---------------------------------------------------------------------------
// Wire format of group.json.

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    name: String,
    benchmarks: Vec<BenchmarkEntry>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkEntry {
    id: String,
    module: PathBuf,
    #[serde(default)]
    args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stdin: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected_output: Option<OutputRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score_rule: Option<ScoreRule>,
}

// ---------------------------------------------------------------------------
// Validation.

fn malformed(path: &Path, reason: impl Into<String>) -> RegistryError {
    RegistryError::MalformedConfig {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> RegistryError {
    RegistryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Check the exactly-one-`{module}` / at-most-one-`{args}` rule.
fn validate_template(owner: &str, path: &Path, template: &[String]) -> Result<(), RegistryError> {
    let modules = template.iter().filter(|t| *t == MODULE_PLACEHOLDER).count();
    let args = template.iter().filter(|t| *t == ARGS_PLACEHOLDER).count();
    if modules == 0 {
        return Err(RegistryError::MissingPlaceholder {
            name: owner.to_string(),
        });
    }
    if modules > 1 {
        return Err(malformed(
            path,
            format!("args template of {owner} contains {modules} {MODULE_PLACEHOLDER} tokens, expected exactly one"),
        ));
    }
    if args > 1 {
        return Err(malformed(
            path,
            format!("args template of {owner} contains {args} {ARGS_PLACEHOLDER} tokens, expected at most one"),
        ));
    }
    Ok(())
}

fn validate_runtime(spec: &RuntimeSpec, path: &Path) -> Result<(), RegistryError> {
    if spec.name.is_empty() {
        return Err(malformed(path, "runtime name must be nonempty"));
    }
    if spec.name.contains('/') || spec.name == "." || spec.name == ".." {
        return Err(malformed(path, "runtime name must not contain path separators"));
    }
    validate_template(&spec.name, path, &spec.args_template)?;
    let mut seen = std::collections::BTreeSet::new();
    for sub in &spec.subruntimes {
        if sub.name.is_empty() {
            return Err(malformed(path, "subruntime name must be nonempty"));
        }
        if sub.name == spec.name {
            return Err(RegistryError::DuplicateName(sub.name.clone()));
        }
        if !seen.insert(sub.name.clone()) {
            return Err(RegistryError::DuplicateName(sub.name.clone()));
        }
        if let Some(tpl) = &sub.args_template_override {
            validate_template(&format!("{}:{}", spec.name, sub.name), path, tpl)?;
        }
    }
    Ok(())
}

/// Compile-check a score/validation regex; scores additionally need exactly
/// one capture group.
fn validate_rules(bench: &BenchmarkSpec, path: &Path) -> Result<(), RegistryError> {
    if let Some(rule) = &bench.expected_output {
        if rule.kind == OutputKind::Regex {
            regex::Regex::new(&rule.value).map_err(|e| {
                malformed(path, format!("benchmark {}: invalid expected_output regex: {e}", bench.id))
            })?;
        }
    }
    if let Some(rule) = &bench.score_rule {
        let re = regex::Regex::new(&rule.pattern).map_err(|e| {
            malformed(path, format!("benchmark {}: invalid score pattern: {e}", bench.id))
        })?;
        // captures_len counts the implicit whole-match group.
        if re.captures_len() != 2 {
            return Err(malformed(
                path,
                format!(
                    "benchmark {}: score pattern must have exactly one capture group, found {}",
                    bench.id,
                    re.captures_len() - 1
                ),
            ));
        }
    }
    Ok(())
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

// ---------------------------------------------------------------------------
// Loading.

/// Load every runtime and benchmark group definition under `dir`.
///
/// Missing `runtimes/` or `benchmarks/` subdirectories yield empty lists, so
/// partially populated registries load fine.
pub fn load_registry(dir: &Path) -> Result<(Vec<RuntimeSpec>, Vec<BenchmarkGroup>), RegistryError> {
    if !dir.is_dir() {
        return Err(io_err(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "registry directory not found"),
        ));
    }
    Ok((load_runtimes(&dir.join("runtimes"))?, load_groups(&dir.join("benchmarks"))?))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, RegistryError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        out.push(entry.map_err(|e| io_err(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn load_runtimes(dir: &Path) -> Result<Vec<RuntimeSpec>, RegistryError> {
    let mut runtimes: Vec<RuntimeSpec> = Vec::new();
    if !dir.is_dir() {
        return Ok(runtimes);
    }
    for path in sorted_entries(dir)? {
        if path.extension().map_or(true, |e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let mut spec: RuntimeSpec =
            serde_json::from_str(&text).map_err(|e| malformed(&path, e.to_string()))?;
        validate_runtime(&spec, &path)?;
        spec.exec = resolve_path(dir, &spec.exec);
        if runtimes.iter().any(|r| r.name == spec.name) {
            return Err(RegistryError::DuplicateName(spec.name));
        }
        runtimes.push(spec);
    }
    Ok(runtimes)
}

fn load_groups(dir: &Path) -> Result<Vec<BenchmarkGroup>, RegistryError> {
    let mut groups: Vec<BenchmarkGroup> = Vec::new();
    if !dir.is_dir() {
        return Ok(groups);
    }
    for group_dir in sorted_entries(dir)? {
        if !group_dir.is_dir() {
            continue;
        }
        let path = group_dir.join("group.json");
        if !path.is_file() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let file: GroupFile =
            serde_json::from_str(&text).map_err(|e| malformed(&path, e.to_string()))?;
        if file.name.is_empty() {
            return Err(malformed(&path, "group name must be nonempty"));
        }
        let mut benchmarks = Vec::with_capacity(file.benchmarks.len());
        for entry in file.benchmarks {
            if entry.id.is_empty() {
                return Err(malformed(&path, "benchmark id must be nonempty"));
            }
            if benchmarks.iter().any(|b: &BenchmarkSpec| b.id == entry.id) {
                return Err(RegistryError::DuplicateName(format!("{}/{}", file.name, entry.id)));
            }
            let bench = BenchmarkSpec {
                id: entry.id,
                group: file.name.clone(),
                module_path: resolve_path(&group_dir, &entry.module),
                args: entry.args,
                stdin_path: entry.stdin.map(|p| resolve_path(&group_dir, &p)),
                expected_output: entry.expected_output,
                score_rule: entry.score_rule,
            };
            validate_rules(&bench, &path)?;
            benchmarks.push(bench);
        }
        if groups.iter().any(|g| g.name == file.name) {
            return Err(RegistryError::DuplicateName(file.name));
        }
        groups.push(BenchmarkGroup {
            name: file.name,
            benchmarks,
        });
    }
    Ok(groups)
}

// ---------------------------------------------------------------------------
// Registration.

/// Persist `spec` as `<dir>/runtimes/<name>.json`.
///
/// The spec is written verbatim; use absolute paths in `exec` if the loaded
/// copy must compare equal (load resolves relative paths).
pub fn register_runtime(dir: &Path, spec: &RuntimeSpec) -> Result<PathBuf, RegistryError> {
    let runtimes_dir = dir.join("runtimes");
    let probe = runtimes_dir.join(format!("{}.json", spec.name));
    validate_runtime(spec, &probe)?;
    fs::create_dir_all(&runtimes_dir).map_err(|e| io_err(&runtimes_dir, e))?;
    if probe.exists() {
        return Err(RegistryError::DuplicateName(spec.name.clone()));
    }
    // A file with a different stem may still declare the same name.
    for existing in load_runtimes(&runtimes_dir)? {
        if existing.name == spec.name {
            return Err(RegistryError::DuplicateName(spec.name.clone()));
        }
    }
    let mut text = serde_json::to_string_pretty(spec).expect("runtime spec serializes");
    text.push('\n');
    fs::write(&probe, text).map_err(|e| io_err(&probe, e))?;
    Ok(probe)
}

/// Delete the config file that declares runtime `name`.
pub fn remove_runtime(dir: &Path, name: &str) -> Result<(), RegistryError> {
    let runtimes_dir = dir.join("runtimes");
    if runtimes_dir.is_dir() {
        for path in sorted_entries(&runtimes_dir)? {
            if path.extension().map_or(true, |e| e != "json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let spec: RuntimeSpec =
                serde_json::from_str(&text).map_err(|e| malformed(&path, e.to_string()))?;
            if spec.name == name {
                fs::remove_file(&path).map_err(|e| io_err(&path, e))?;
                return Ok(());
            }
        }
    }
    Err(RegistryError::UnknownRuntime(name.to_string()))
}

// ---------------------------------------------------------------------------
// Invocation resolution.

/// Expand placeholders and subruntime overrides into a runnable command line.
pub fn resolve_invocation(
    rt: &RuntimeSpec,
    sub: Option<&str>,
    bench: &BenchmarkSpec,
) -> Result<CommandLine, RegistryError> {
    let sub_spec = match sub {
        Some(name) => Some(rt.subruntime(name).ok_or_else(|| RegistryError::UnknownSubruntime {
            runtime: rt.name.clone(),
            sub: name.to_string(),
        })?),
        None => None,
    };

    let template: Vec<String> = match sub_spec {
        Some(s) => match &s.args_template_override {
            Some(tpl) => tpl.clone(),
            None => {
                let mut tpl = Vec::with_capacity(rt.args_template.len() + s.extra_args.len());
                for tok in &rt.args_template {
                    if tok == MODULE_PLACEHOLDER {
                        tpl.extend(s.extra_args.iter().cloned());
                    }
                    tpl.push(tok.clone());
                }
                tpl
            }
        },
        None => rt.args_template.clone(),
    };

    let mut env = rt.env.clone();
    if let Some(s) = sub_spec {
        for (k, v) in &s.env_override {
            env.insert(k.clone(), v.clone());
        }
    }

    let mut argv = Vec::with_capacity(template.len() + bench.args.len());
    for tok in &template {
        if tok == MODULE_PLACEHOLDER {
            argv.push(bench.module_path.to_string_lossy().into_owned());
        } else if tok == ARGS_PLACEHOLDER {
            argv.extend(bench.args.iter().cloned());
        } else {
            argv.push(tok.clone());
        }
    }

    Ok(CommandLine {
        exec: rt.exec.clone(),
        argv,
        env,
        stdin_path: bench.stdin_path.clone(),
    })
}
