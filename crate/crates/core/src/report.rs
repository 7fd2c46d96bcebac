//! Report emission: CSV tables, the mean/rank summary table, and SVG plots.
//!
//! Everything derived from scores alone is byte-deterministic for a given
//! result. Wall-clock timings (the query-seconds column of `curves.csv` and
//! the runtime bar chart) naturally vary between runs, so those files are
//! auxiliary rather than primary artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::ExperimentResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Svg,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<ReportFormat> {
        match s {
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

/// A written report file and whether its bytes are deterministic for a
/// given configuration (timing-bearing files are not).
#[derive(Debug, Clone)]
pub struct ReportFile {
    pub path: PathBuf,
    pub primary: bool,
}

/// Render "74.2 (0)" style cells: the mean in percent with one decimal and
/// the zero-based rank in parentheses. Missing cells render blank.
pub fn format_cell(mean: Option<f64>, rank: Option<usize>) -> String {
    match (mean, rank) {
        (Some(m), Some(r)) => format!("{:.1} ({})", m * 100.0, r),
        _ => String::new(),
    }
}

/// Per-cell mean AUC-F1 values at full precision.
pub fn render_cells_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("dataset,strategy,mean_auc_f1,completed_repeats\n");
    for dataset in &result.datasets {
        for strategy in &result.strategies {
            let completed = result
                .runs
                .iter()
                .filter(|r| &r.dataset == dataset && &r.strategy == strategy)
                .count();
            let mean = result
                .cell_mean(dataset, strategy)
                .map(|m| m.to_string())
                .unwrap_or_default();
            let _ = writeln!(out, "{dataset},{strategy},{mean},{completed}");
        }
    }
    out
}

/// Every learning curve, one row per cycle. The query-seconds column is
/// blank on the final row of each run (no query follows the last fit).
pub fn render_curves_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("run_id,strategy,dataset,cycle,labeled,f1,query_seconds\n");
    for run in &result.runs {
        let run_id = format!("{}:{}:{}", run.dataset, run.strategy, run.repeat);
        for (cycle, (&f1, &labeled)) in run
            .curve
            .f1
            .iter()
            .zip(&run.curve.labeled_counts)
            .enumerate()
        {
            let secs = run
                .curve
                .query_seconds
                .get(cycle)
                .map(|s| s.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{run_id},{},{},{cycle},{labeled},{f1},{secs}",
                run.strategy, run.dataset
            );
        }
    }
    out
}

/// The summary table: one row per dataset with "mean% (rank)" cells and a
/// final mean-rank row. Ranks come from full-precision means.
pub fn render_rank_table(result: &ExperimentResult) -> String {
    let means = result.mean_rows();
    let ranks = result.rank_rows();
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header = vec![String::from("dataset")];
    header.extend(result.strategies.iter().cloned());
    rows.push(header);
    for (i, dataset) in result.datasets.iter().enumerate() {
        let mut row = vec![dataset.clone()];
        for s in 0..result.strategies.len() {
            row.push(format_cell(means[i][s], ranks[i][s]));
        }
        rows.push(row);
    }
    let mut mean_rank_row = vec![String::from("mean rank")];
    for mr in result.mean_ranks() {
        mean_rank_row.push(match mr {
            Some(r) => format!("{r:.2}"),
            None => String::new(),
        });
    }
    rows.push(mean_rank_row);

    // Pad columns for alignment.
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Color cycle for strategy series.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn svg_header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" \
         viewBox=\"0 0 {SVG_W} {SVG_H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n",
        SVG_W / 2.0
    )
}

/// Learning-curve plot for one dataset: mean F1 per cycle, one polyline per
/// strategy. The y axis is fixed to [0, 1].
pub fn render_curve_svg(result: &ExperimentResult, dataset: &str) -> String {
    let mut out = svg_header(&format!("Learning curves: {dataset}"));
    // Axes.
    let x0 = MARGIN;
    let x1 = SVG_W - MARGIN;
    let y0 = SVG_H - MARGIN;
    let y1 = 40.0;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );

    let max_len = result
        .runs
        .iter()
        .filter(|r| r.dataset == dataset)
        .map(|r| r.curve.f1.len())
        .max()
        .unwrap_or(2);
    for (si, strategy) in result.strategies.iter().enumerate() {
        // Pointwise mean across repeats; shorter curves contribute to the
        // cycles they reached.
        let mut sums = vec![0.0f64; max_len];
        let mut counts = vec![0usize; max_len];
        for run in result
            .runs
            .iter()
            .filter(|r| r.dataset == dataset && &r.strategy == strategy)
        {
            for (t, &f1) in run.curve.f1.iter().enumerate() {
                sums[t] += f1;
                counts[t] += 1;
            }
        }
        let points: Vec<(usize, f64)> = sums
            .iter()
            .zip(&counts)
            .enumerate()
            .filter(|(_, (_, &c))| c > 0)
            .map(|(t, (&s, &c))| (t, s / c as f64))
            .collect();
        if points.is_empty() {
            continue;
        }
        let denom = (max_len - 1).max(1) as f64;
        let coords: Vec<String> = points
            .iter()
            .map(|&(t, f1)| {
                let x = x0 + (x1 - x0) * t as f64 / denom;
                let y = y0 - (y0 - y1) * f1;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let color = PALETTE[si % PALETTE.len()];
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        // Legend entry.
        let ly = y1 + 14.0 * si as f64;
        let _ = writeln!(
            out,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{lx2}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n\
             <text x=\"{tx}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\">{strategy}</text>",
            lx = x1 - 110.0,
            lx2 = x1 - 90.0,
            tx = x1 - 85.0,
            ty = ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of mean per-query wall-clock seconds per strategy.
pub fn render_runtime_svg(result: &ExperimentResult) -> String {
    let mut out = svg_header("Mean query time per strategy (seconds)");
    let x0 = MARGIN;
    let y0 = SVG_H - MARGIN;
    let y1 = 40.0;
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"black\"/>",
        SVG_W - MARGIN
    );

    let means: Vec<f64> = result
        .strategies
        .iter()
        .map(|strategy| {
            let secs: Vec<f64> = result
                .runs
                .iter()
                .filter(|r| &r.strategy == strategy)
                .flat_map(|r| r.curve.query_seconds.iter().cloned())
                .collect();
            if secs.is_empty() {
                0.0
            } else {
                secs.iter().sum::<f64>() / secs.len() as f64
            }
        })
        .collect();
    let max = means.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let slot = (SVG_W - 2.0 * MARGIN) / result.strategies.len() as f64;
    for (i, (strategy, &mean)) in result.strategies.iter().zip(&means).enumerate() {
        let h = (y0 - y1) * mean / max;
        let x = x0 + slot * i as f64 + slot * 0.15;
        let w = slot * 0.7;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{color}\"/>\n\
             <text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{strategy}</text>",
            y0 - h,
            x + w / 2.0,
            y0 + 16.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Write the full report into `out_dir` and return the files written.
pub fn write_report(
    result: &ExperimentResult,
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<ReportFile>> {
    let ReportFormat::Svg = format;
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut emit = |name: String, content: String, primary: bool| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, content)?;
        files.push(ReportFile { path, primary });
        Ok(())
    };
    emit("cells.csv".into(), render_cells_csv(result), true)?;
    emit("rank_table.txt".into(), render_rank_table(result), true)?;
    emit("curves.csv".into(), render_curves_csv(result), false)?;
    for dataset in &result.datasets {
        emit(
            format!("curve-{dataset}.svg"),
            render_curve_svg(result, dataset),
            true,
        )?;
    }
    emit("runtime.svg".into(), render_runtime_svg(result), false)?;
    Ok(files)
}
