//! Measured execution of resolved command lines.
//!
//! Each run spawns one child at a time, measures wall time on a monotonic
//! clock from just before spawn to reap, samples `/proc/<pid>/status` for
//! peak RSS/VMS while the child lives, and folds in the kernel's high-water
//! mark (`ru_maxrss`) collected at reap. Timeouts terminate the whole child
//! process group: politely first, forcibly after a grace period.
//!
//! Nothing here returns an error for a failed run — every failure mode is
//! encoded in the result's status.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::registry::{
    resolve_invocation, BenchmarkSpec, CommandLine, OutputKind, OutputRule, RegistryError,
    RuntimeSpec, ScoreRule,
};

/// Validation and score extraction read at most this much of the stream;
/// the pipes are drained to EOF regardless so the child never blocks.
const HARD_CAPTURE_LIMIT: usize = 16 * 1024 * 1024;
/// Time between SIGTERM and SIGKILL when enforcing a timeout.
const KILL_GRACE_MS: u64 = 1000;
/// Marker appended to truncated stdout/stderr excerpts.
const TRUNCATION_MARKER: &str = "…[truncated]";
/// The child environment is wiped except for these inherited variables.
const PASSTHROUGH_ENV: [&str; 3] = ["PATH", "HOME", "LANG"];

/// Knobs for one measured execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub repetitions: u32,
    pub timeout_ms: Option<u64>,
    pub track_memory: bool,
    pub sample_interval_ms: u64,
    pub capture_output_limit_bytes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            repetitions: 1,
            timeout_ms: None,
            track_memory: true,
            sample_interval_ms: 10,
            capture_output_limit_bytes: 65536,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Timeout,
    NonzeroExit,
    OutputMismatch,
    SpawnError,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Timeout => "timeout",
            RunStatus::NonzeroExit => "nonzero_exit",
            RunStatus::OutputMismatch => "output_mismatch",
            RunStatus::SpawnError => "spawn_error",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured execution of one benchmark on one runtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub group: String,
    pub benchmark_id: String,
    pub runtime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subruntime: Option<String>,
    pub repetition: u32,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    pub wall_time_ns: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_rss_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_vms_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    pub stdout_excerpt: String,
    pub stderr_excerpt: String,
    pub timestamp_utc: String,
}

/// Raw outcome of a single spawn, before validation/score extraction.
#[derive(Debug, Clone)]
pub struct RawRun {
    pub status: RunStatus,
    pub exit_code: Option<i32>,
    pub wall_time_ns: u64,
    pub peak_rss_bytes: Option<u64>,
    pub peak_vms_bytes: Option<u64>,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Default, Clone, Copy)]
struct MemPeaks {
    rss: Option<u64>,
    vms: Option<u64>,
}

impl MemPeaks {
    fn bump_rss(&mut self, v: u64) {
        self.rss = Some(self.rss.map_or(v, |cur| cur.max(v)));
    }
    fn bump_vms(&mut self, v: u64) {
        self.vms = Some(self.vms.map_or(v, |cur| cur.max(v)));
    }
}

struct Reaped {
    /// Exit code; signal terminations map to `128 + signal`. `None` when the
    /// wait status could not be decoded.
    exit_code: Option<i32>,
    /// Kernel-reported peak RSS in bytes, where the platform provides one.
    maxrss_bytes: Option<u64>,
}

struct Supervised {
    timed_out: bool,
    exit_code: Option<i32>,
    wall_time_ns: u64,
    peaks: MemPeaks,
}

/// Execute one resolved command line and measure it.
pub fn run_once(cmd: &CommandLine, cfg: &RunConfig) -> RawRun {
    let clock = Instant::now();

    let stdin = match &cmd.stdin_path {
        Some(path) => match File::open(path) {
            Ok(f) => Stdio::from(f),
            Err(_) => return spawn_failure(clock),
        },
        None => Stdio::null(),
    };

    let mut command = Command::new(&cmd.exec);
    command
        .args(&cmd.argv)
        .stdin(stdin)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .env_clear();
    for key in PASSTHROUGH_ENV {
        if let Ok(v) = std::env::var(key) {
            command.env(key, v);
        }
    }
    command.envs(cmd.env.iter());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }

    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(_) => return spawn_failure(clock),
    };

    let stdout_reader = drain_thread(child.stdout.take());
    let stderr_reader = drain_thread(child.stderr.take());

    let sup = supervise(&mut child, cfg, clock);

    let stdout = String::from_utf8_lossy(&stdout_reader.join().unwrap_or_default()).into_owned();
    let stderr = String::from_utf8_lossy(&stderr_reader.join().unwrap_or_default()).into_owned();

    let status = if sup.timed_out {
        RunStatus::Timeout
    } else if sup.exit_code == Some(0) {
        RunStatus::Ok
    } else {
        RunStatus::NonzeroExit
    };

    RawRun {
        status,
        exit_code: sup.exit_code,
        wall_time_ns: sup.wall_time_ns,
        peak_rss_bytes: if cfg.track_memory { sup.peaks.rss } else { None },
        peak_vms_bytes: if cfg.track_memory { sup.peaks.vms } else { None },
        stdout,
        stderr,
    }
}

fn spawn_failure(clock: Instant) -> RawRun {
    RawRun {
        status: RunStatus::SpawnError,
        exit_code: None,
        wall_time_ns: clock.elapsed().as_nanos() as u64,
        peak_rss_bytes: None,
        peak_vms_bytes: None,
        stdout: String::new(),
        stderr: String::new(),
    }
}

/// Wait for the child while sampling memory and enforcing the timeout.
fn supervise(child: &mut Child, cfg: &RunConfig, clock: Instant) -> Supervised {
    let interval = Duration::from_millis(cfg.sample_interval_ms.max(1));
    let timeout = cfg.timeout_ms.map(Duration::from_millis);
    let mut peaks = MemPeaks::default();
    let mut timed_out = false;

    let reaped = loop {
        match poll_child(child) {
            Some(r) => break r,
            None => {
                if cfg.track_memory {
                    sample_proc_memory(child.id(), &mut peaks);
                }
                let elapsed = clock.elapsed();
                if let Some(limit) = timeout {
                    if elapsed >= limit {
                        timed_out = true;
                        break kill_and_reap(child);
                    }
                    thread::sleep(interval.min(limit - elapsed));
                } else {
                    thread::sleep(interval);
                }
            }
        }
    };

    let wall_time_ns = clock.elapsed().as_nanos() as u64;
    if cfg.track_memory {
        if let Some(rss) = reaped.maxrss_bytes {
            peaks.bump_rss(rss);
        }
    }
    Supervised {
        timed_out,
        exit_code: reaped.exit_code,
        wall_time_ns,
        peaks,
    }
}

// --- unix wait/kill plumbing -----------------------------------------------

/// Non-blocking reap. `Some` once the child has exited.
#[cfg(unix)]
fn poll_child(child: &mut Child) -> Option<Reaped> {
    wait4_once(child.id() as libc::pid_t, libc::WNOHANG)
}

#[cfg(unix)]
fn wait4_once(pid: libc::pid_t, flags: libc::c_int) -> Option<Reaped> {
    let mut status: libc::c_int = 0;
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let ret = unsafe { libc::wait4(pid, &mut status, flags, &mut usage) };
    if ret == pid {
        Some(Reaped {
            exit_code: decode_wait_status(status),
            maxrss_bytes: maxrss_to_bytes(usage.ru_maxrss),
        })
    } else if ret == -1 && std::io::Error::last_os_error().raw_os_error() == Some(libc::ECHILD) {
        // Already reaped elsewhere; nothing more to learn.
        Some(Reaped {
            exit_code: None,
            maxrss_bytes: None,
        })
    } else {
        None
    }
}

#[cfg(unix)]
fn decode_wait_status(status: libc::c_int) -> Option<i32> {
    if libc::WIFEXITED(status) {
        Some(libc::WEXITSTATUS(status))
    } else if libc::WIFSIGNALED(status) {
        Some(128 + libc::WTERMSIG(status))
    } else {
        None
    }
}

#[cfg(unix)]
fn maxrss_to_bytes(maxrss: libc::c_long) -> Option<u64> {
    if maxrss <= 0 {
        return None;
    }
    // ru_maxrss is kilobytes on Linux, bytes on macOS.
    #[cfg(target_os = "macos")]
    return Some(maxrss as u64);
    #[cfg(not(target_os = "macos"))]
    Some(maxrss as u64 * 1024)
}

/// Terminate the child's whole process group, then reap the child.
#[cfg(unix)]
fn kill_and_reap(child: &mut Child) -> Reaped {
    let pid = child.id() as libc::pid_t;
    signal_group(pid, libc::SIGTERM);
    let grace_deadline = Instant::now() + Duration::from_millis(KILL_GRACE_MS);
    while Instant::now() < grace_deadline {
        if let Some(r) = wait4_once(pid, libc::WNOHANG) {
            return r;
        }
        thread::sleep(Duration::from_millis(5));
    }
    signal_group(pid, libc::SIGKILL);
    loop {
        // Blocking wait; retried on EINTR. SIGKILL cannot be ignored, so this
        // terminates.
        if let Some(r) = wait4_once(pid, 0) {
            return r;
        }
    }
}

/// Signal the process group led by `pid`, falling back to the single process
/// if the group no longer exists.
#[cfg(unix)]
fn signal_group(pid: libc::pid_t, sig: libc::c_int) {
    let r = unsafe { libc::kill(-pid, sig) };
    if r == -1 {
        unsafe { libc::kill(pid, sig) };
    }
}

// --- portable fallbacks -----------------------------------------------------

#[cfg(not(unix))]
fn poll_child(child: &mut Child) -> Option<Reaped> {
    match child.try_wait() {
        Ok(Some(status)) => Some(Reaped {
            exit_code: status.code(),
            maxrss_bytes: None,
        }),
        Ok(None) => None,
        Err(_) => Some(Reaped {
            exit_code: None,
            maxrss_bytes: None,
        }),
    }
}

#[cfg(not(unix))]
fn kill_and_reap(child: &mut Child) -> Reaped {
    let _ = child.kill();
    match child.wait() {
        Ok(status) => Reaped {
            exit_code: status.code(),
            maxrss_bytes: None,
        },
        Err(_) => Reaped {
            exit_code: None,
            maxrss_bytes: None,
        },
    }
}

// --- memory sampling ---------------------------------------------------------

/// Fold one `/proc/<pid>/status` sample into the running peaks. The kernel's
/// own high-water marks (VmHWM/VmPeak) are preferred; instantaneous values
/// are taken as well in case the status file lacks them.
#[cfg(target_os = "linux")]
fn sample_proc_memory(pid: u32, peaks: &mut MemPeaks) {
    let Ok(text) = std::fs::read_to_string(format!("/proc/{pid}/status")) else {
        return;
    };
    for line in text.lines() {
        let mut bump: Option<(&str, fn(&mut MemPeaks, u64))> = None;
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            bump = Some((rest, MemPeaks::bump_rss));
        } else if let Some(rest) = line.strip_prefix("VmRSS:") {
            bump = Some((rest, MemPeaks::bump_rss));
        } else if let Some(rest) = line.strip_prefix("VmPeak:") {
            bump = Some((rest, MemPeaks::bump_vms));
        } else if let Some(rest) = line.strip_prefix("VmSize:") {
            bump = Some((rest, MemPeaks::bump_vms));
        }
        if let Some((rest, apply)) = bump {
            if let Some(kb) = rest.split_whitespace().next().and_then(|v| v.parse::<u64>().ok()) {
                apply(peaks, kb.saturating_mul(1024));
            }
        }
    }
}

#[cfg(not(target_os = "linux"))]
fn sample_proc_memory(_pid: u32, _peaks: &mut MemPeaks) {}

// --- output draining ----------------------------------------------------------

/// Read a pipe to EOF on a helper thread, keeping at most the hard capture
/// limit. Draining past the limit keeps the child from blocking on a full
/// pipe buffer.
fn drain_thread<R: Read + Send + 'static>(src: Option<R>) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut out = Vec::new();
        let Some(mut src) = src else {
            return out;
        };
        let mut buf = [0u8; 8192];
        loop {
            match src.read(&mut buf) {
                Ok(0) => break,
                Ok(n) => {
                    let room = HARD_CAPTURE_LIMIT.saturating_sub(out.len());
                    out.extend_from_slice(&buf[..n.min(room)]);
                }
                Err(ref e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(_) => break,
            }
        }
        out
    })
}

// --- validation and scoring ----------------------------------------------------

/// Extract the first score match from stdout. Absence (no match, bad parse,
/// non-finite value) means "no score", never an error.
pub fn extract_score(stdout: &str, rule: &ScoreRule) -> Option<f64> {
    let re = regex::Regex::new(&rule.pattern).ok()?;
    let caps = re.captures(stdout)?;
    let value: f64 = caps.get(1)?.as_str().parse().ok()?;
    value.is_finite().then_some(value)
}

/// Judge stdout against the benchmark's expected-output rule.
pub fn validate_output(stdout: &str, rule: &OutputRule) -> bool {
    match rule.kind {
        OutputKind::Exact => {
            trim_trailing_newlines(stdout) == trim_trailing_newlines(&rule.value)
        }
        OutputKind::Regex => regex::Regex::new(&rule.value)
            .map(|re| re.is_match(stdout))
            .unwrap_or(false),
    }
}

fn trim_trailing_newlines(s: &str) -> &str {
    s.trim_end_matches(['\n', '\r'])
}

fn truncate_excerpt(s: &str, limit: usize) -> String {
    if s.len() <= limit {
        return s.to_string();
    }
    let mut cut = limit;
    while cut > 0 && !s.is_char_boundary(cut) {
        cut -= 1;
    }
    let mut out = String::with_capacity(cut + TRUNCATION_MARKER.len());
    out.push_str(&s[..cut]);
    out.push_str(TRUNCATION_MARKER);
    out
}

fn now_iso8601() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Run one benchmark `cfg.repetitions` times, strictly sequentially.
///
/// A failed repetition never aborts the remaining ones; every failure mode is
/// recorded in the per-repetition status.
pub fn run_benchmark(
    rt: &RuntimeSpec,
    sub: Option<&str>,
    bench: &BenchmarkSpec,
    cfg: &RunConfig,
) -> Result<Vec<RunResult>, RegistryError> {
    let cmd = resolve_invocation(rt, sub, bench)?;
    let reps = cfg.repetitions.max(1);
    let mut results = Vec::with_capacity(reps as usize);
    for repetition in 0..reps {
        results.push(finish_run(run_once(&cmd, cfg), rt, sub, bench, cfg, repetition));
    }
    Ok(results)
}

fn finish_run(
    raw: RawRun,
    rt: &RuntimeSpec,
    sub: Option<&str>,
    bench: &BenchmarkSpec,
    cfg: &RunConfig,
    repetition: u32,
) -> RunResult {
    let mut status = raw.status;
    if status == RunStatus::Ok {
        if let Some(rule) = &bench.expected_output {
            if !validate_output(&raw.stdout, rule) {
                status = RunStatus::OutputMismatch;
            }
        }
    }
    let score = if status == RunStatus::Ok {
        bench
            .score_rule
            .as_ref()
            .and_then(|rule| extract_score(&raw.stdout, rule))
    } else {
        None
    };
    RunResult {
        group: bench.group.clone(),
        benchmark_id: bench.id.clone(),
        runtime: rt.name.clone(),
        subruntime: sub.map(str::to_string),
        repetition,
        status,
        exit_code: raw.exit_code,
        wall_time_ns: raw.wall_time_ns,
        peak_rss_bytes: raw.peak_rss_bytes,
        peak_vms_bytes: raw.peak_vms_bytes,
        score,
        stdout_excerpt: truncate_excerpt(&raw.stdout, cfg.capture_output_limit_bytes),
        stderr_excerpt: truncate_excerpt(&raw.stderr, cfg.capture_output_limit_bytes),
        timestamp_utc: now_iso8601(),
    }
}

/// Helper used by callers that need a command line without a full benchmark,
/// e.g. ad-hoc module execution.
pub fn command_for(exec: &Path, argv: Vec<String>) -> CommandLine {
    CommandLine {
        exec: exec.to_path_buf(),
        argv,
        env: BTreeMap::new(),
        stdin_path: None,
    }
}
