//! Evaluation-phase subcommands: `export`, `plot`, `analyze`, `pca`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use wasubench_core::analysis::{
    compute_metrics_row, function_time_cdf, metrics_table, parse_profile,
};
use wasubench_core::pca::{
    fit_model, load_metrics_csv, loading_table, loadings_csv, render_loading_table, scatter_data,
    scores_csv, variance_csv,
};
use wasubench_core::plot::{
    export_distribution, render_cdf, render_grouped_bars, render_scatter, select_mode,
    series_from_summaries, PlotMode, ValueKind,
};
use wasubench_core::results::{export_csv, load_results, summarize, Summary};

use crate::opts::{AnalyzeArgs, ExportArgs, PcaArgs, PlotArgs};

pub fn export(args: &ExportArgs) -> Result<()> {
    let file = load_results(&args.results)?;
    let csv = export_csv(&file);
    match &args.output {
        Some(path) => super::write_output(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn plot(output_dir: &Path, args: &PlotArgs) -> Result<()> {
    let file = load_results(&args.results)?;
    let summaries = summarize(&file);
    if summaries.iter().all(|s| s.n_ok == 0) {
        return Err(anyhow!("no successful runs in {}", args.results.display()));
    }
    let mode = select_mode(&summaries);
    let out_dir = args.output.clone().unwrap_or_else(|| output_dir.to_path_buf());
    super::ensure_dir(&out_dir)?;

    let charts: [(ValueKind, &str, &str, fn(&Summary) -> Option<f64>); 4] = [
        (ValueKind::TimeNs, "time.svg", "Wall time per benchmark", |s| s.mean_time_ns),
        (ValueKind::Score, "score.svg", "Score per benchmark", |s| s.mean_score),
        (ValueKind::Rss, "rss.svg", "Peak RSS per benchmark", |s| s.mean_rss_bytes),
        (ValueKind::Vms, "vms.svg", "Peak VMS per benchmark", |s| s.mean_vms_bytes),
    ];
    for (kind, filename, title, value_of) in charts {
        if !summaries.iter().any(|s| value_of(s).is_some()) {
            continue;
        }
        let series = series_from_summaries(&summaries, kind, mode)?;
        let title = match mode {
            PlotMode::Normalized => format!("{title} (normalized)"),
            PlotMode::Absolute => title.to_string(),
        };
        let svg = render_grouped_bars(&series, &title, args.log)?;
        super::write_output(&out_dir.join(filename), &svg)?;
    }

    // Raw distributions for the value kinds whose shape matters beyond the
    // per-benchmark means: one value per ok run, keyed by engine label.
    let mut times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut rss: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &file.results {
        if r.status != wasubench_core::executor::RunStatus::Ok {
            continue;
        }
        let label = wasubench_core::registry::runtime_label(&r.runtime, r.subruntime.as_deref());
        times.entry(label.clone()).or_default().push(r.wall_time_ns as f64);
        if let Some(bytes) = r.peak_rss_bytes {
            rss.entry(label).or_default().push(bytes as f64);
        }
    }
    if !times.is_empty() {
        super::write_output(&out_dir.join("time_distribution.csv"), &export_distribution(&times)?)?;
    }
    if rss.values().any(|v| !v.is_empty()) {
        super::write_output(&out_dir.join("rss_distribution.csv"), &export_distribution(&rss)?)?;
    }
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let mut profile_paths: Vec<PathBuf> = std::fs::read_dir(&args.profiles)
        .with_context(|| format!("cannot read profiles directory {}", args.profiles.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    profile_paths.sort();
    if profile_paths.is_empty() {
        return Err(anyhow!("no .json profiles in {}", args.profiles.display()));
    }

    // Per-benchmark summaries keyed by (group, benchmark) feed the
    // time_ns/rss/vms columns.
    let mut summaries_by_bench: BTreeMap<(String, String), Vec<Summary>> = BTreeMap::new();
    if let Some(results_path) = &args.results {
        let file = load_results(results_path)?;
        for s in summarize(&file) {
            summaries_by_bench
                .entry((s.group.clone(), s.benchmark_id.clone()))
                .or_default()
                .push(s);
        }
    }

    let mut rows = Vec::with_capacity(profile_paths.len());
    let mut cdf_outputs = Vec::new();
    for path in &profile_paths {
        let profile = parse_profile(path)?;
        let empty = Vec::new();
        let summaries = summaries_by_bench
            .get(&(profile.group.clone(), profile.benchmark_id.clone()))
            .unwrap_or(&empty);
        let row = compute_metrics_row(&profile, summaries)
            .with_context(|| format!("metrics for {}", path.display()))?;
        if args.cdf.is_some() {
            let points = function_time_cdf(&profile)?;
            let title = format!("Function execution CDF: {}/{}", profile.group, profile.benchmark_id);
            cdf_outputs.push((
                format!("cdf-{}-{}.svg", profile.group, profile.benchmark_id),
                render_cdf(&points, &title)?,
            ));
        }
        rows.push(row);
    }
    rows.sort_by(|a, b| (&a.group, &a.benchmark_id).cmp(&(&b.group, &b.benchmark_id)));

    let csv = metrics_table(&rows);
    match &args.output {
        Some(path) => super::write_output(path, &csv)?,
        None => print!("{csv}"),
    }

    if let Some(cdf_dir) = &args.cdf {
        super::ensure_dir(cdf_dir)?;
        for (name, svg) in cdf_outputs {
            super::write_output(&cdf_dir.join(name), &svg)?;
        }
    }
    Ok(())
}

pub fn pca(output_dir: &Path, args: &PcaArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.metrics)
        .with_context(|| format!("cannot read {}", args.metrics.display()))?;
    let (matrix, dropped_rows) = load_metrics_csv(&text)?;
    for label in &dropped_rows {
        eprintln!("note: dropped {label} (incomplete metrics)");
    }
    let model = fit_model(&matrix, dropped_rows)?;
    for col in &model.dropped_cols {
        eprintln!("note: dropped zero-variance metric {col}");
    }

    let k = model.n_components();
    let mut components = args.components.max(1);
    if components > k {
        eprintln!("note: only {k} components available, requested {}", args.components);
        components = k;
    }

    let out_dir = args.output.clone().unwrap_or_else(|| output_dir.to_path_buf());
    super::ensure_dir(&out_dir)?;
    super::write_output(&out_dir.join("loadings.csv"), &loadings_csv(&model))?;
    super::write_output(&out_dir.join("scores.csv"), &scores_csv(&model))?;
    super::write_output(&out_dir.join("variance.csv"), &variance_csv(&model))?;

    // Scatter plots over consecutive component pairs: (1,2), (3,4), ...
    let mut pair_start = 1;
    while pair_start + 1 <= components {
        let (a, b) = (pair_start, pair_start + 1);
        let points = scatter_data(&model, a, b)?;
        let axis = |idx: usize| format!("PC{idx} ({:.1}%)", model.explained_ratio[idx - 1] * 100.0);
        let svg = render_scatter(
            &points,
            &format!("Benchmark scores: PC{a} vs PC{b}"),
            &axis(a),
            &axis(b),
        )?;
        super::write_output(&out_dir.join(format!("scatter_pc{a}_pc{b}.svg")), &svg)?;
        pair_start += 2;
    }

    let table = loading_table(&model, components)?;
    print!("{}", render_loading_table(&table));
    println!(
        "first {components} components explain {:.1}% of the variance",
        wasubench_core::pca::cumulative_variance(&model, components) * 100.0
    );
    Ok(())
}
