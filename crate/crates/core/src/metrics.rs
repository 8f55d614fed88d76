//! ROC-AUC and report rendering.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::RunReport;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AucResult {
    /// `None` when the labels hold a single class.
    pub value: Option<f64>,
    pub num_pos: usize,
    pub num_neg: usize,
    /// Number of distinct score values shared by two or more samples.
    pub tie_groups: usize,
}

/// Mann-Whitney AUC with average ranks for tied scores.
///
/// A tied positive/negative pair contributes one half. Any nonzero label
/// counts as positive.
pub fn auc(scores: &[f64], labels: &[u8]) -> AucResult {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let num_pos = labels.iter().filter(|&&y| y != 0).count();
    let num_neg = labels.len() - num_pos;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut tie_groups = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            tie_groups += 1;
        }
        // 1-based ranks start+1..=end share their average.
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let positives = order[start..end].iter().filter(|&&i| labels[i] != 0).count();
        pos_rank_sum += avg_rank * positives as f64;
        start = end;
    }

    let value = (num_pos > 0 && num_neg > 0).then(|| {
        let p = num_pos as f64;
        (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * num_neg as f64)
    });
    AucResult { value, num_pos, num_neg, tie_groups }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanAuc {
    pub value: f64,
    pub excluded: usize,
}

/// Arithmetic mean over the defined AUCs.
pub fn mean_auc(per_disease: &[AucResult]) -> Result<MeanAuc> {
    let defined: Vec<f64> = per_disease.iter().filter_map(|r| r.value).collect();
    if defined.is_empty() {
        return Err(Error::AllUndefined);
    }
    Ok(MeanAuc {
        value: defined.iter().sum::<f64>() / defined.len() as f64,
        excluded: per_disease.len() - defined.len(),
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Writes an SVG line chart of mean AUC per task and the CSV it was drawn from.
///
/// The CSV sits next to the SVG with a `.csv` extension and has one row per
/// task: `task, seed_<s>..., mean`. Returns the CSV path.
pub fn render_curves(report: &RunReport, joint_baseline: Option<f64>, out_path: impl AsRef<Path>) -> Result<PathBuf> {
    let out_path = out_path.as_ref();
    if report.seeds.is_empty() || report.seeds.iter().all(|s| s.tasks.is_empty()) {
        return Err(Error::EmptyReport);
    }
    let tasks: Vec<usize> = report.aggregate.iter().map(|a| a.task_index).collect();
    let means: Vec<f64> = report.aggregate.iter().map(|a| a.mean).collect();

    let mut csv = String::from("task");
    for s in &report.seeds {
        write!(csv, ",seed_{}", s.seed).unwrap();
    }
    csv.push_str(",mean\n");
    for (k, task) in tasks.iter().enumerate() {
        write!(csv, "{task}").unwrap();
        for s in &report.seeds {
            write!(csv, ",{}", s.tasks[k].mean_auc).unwrap();
        }
        writeln!(csv, ",{}", means[k]).unwrap();
    }

    let all_values = report.seeds.iter().flat_map(|s| s.tasks.iter().map(|t| t.mean_auc)).chain(joint_baseline);
    let (mut lo, mut hi) = all_values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    lo = (lo - 0.02).max(0.0);
    hi = (hi + 0.02).min(1.0);
    if hi - lo < 1e-6 {
        lo = (lo - 0.05).max(0.0);
        hi = (hi + 0.05).min(1.0);
    }
    let (t0, t1) = (tasks[0] as f64, *tasks.last().unwrap() as f64);
    let x = |t: usize| {
        if t1 > t0 {
            MARGIN + (t as f64 - t0) / (t1 - t0) * (WIDTH - 2.0 * MARGIN)
        } else {
            WIDTH / 2.0
        }
    };
    let y = |v: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN);
    let points = |values: &mut dyn Iterator<Item = (usize, f64)>| {
        values.map(|(t, v)| format!("{:.2},{:.2}", x(t), y(v))).collect::<Vec<_>>().join(" ")
    };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{} / {} / {}</text>"#,
        WIDTH / 2.0,
        report.scenario,
        report.placement,
        report.prompt_style
    )
    .unwrap();
    let axis = format!(
        r#"<path class="axis" d="M{m},{top} L{m},{bottom} L{right},{bottom}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        top = MARGIN,
        bottom = HEIGHT - MARGIN,
        right = WIDTH - MARGIN
    );
    svg.push_str(&axis);
    svg.push('\n');
    for (label, v) in [(lo, lo), (hi, hi)] {
        writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{label:.3}</text>"#,
            MARGIN - 4.0,
            y(v)
        )
        .unwrap();
    }
    for &t in &tasks {
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{t}</text>"#,
            x(t),
            HEIGHT - MARGIN + 14.0
        )
        .unwrap();
    }
    if let Some(b) = joint_baseline {
        writeln!(
            svg,
            r#"<line class="baseline" x1="{MARGIN}" y1="{yb:.2}" x2="{}" y2="{yb:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            WIDTH - MARGIN,
            yb = y(b)
        )
        .unwrap();
    }
    for s in &report.seeds {
        let pts = points(&mut s.tasks.iter().map(|t| (t.task_index, t.mean_auc)));
        writeln!(
            svg,
            r##"<polyline class="seed" data-seed="{}" points="{pts}" fill="none" stroke="#7aa6d6" stroke-width="1"/>"##,
            s.seed
        )
        .unwrap();
    }
    let pts = points(&mut tasks.iter().copied().zip(means.iter().copied()));
    writeln!(svg, r##"<polyline class="mean" points="{pts}" fill="none" stroke="#1f4e8c" stroke-width="3"/>"##).unwrap();
    svg.push_str("</svg>\n");

    if let Some(parent) = out_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(out_path, svg).map_err(|e| Error::io(out_path, e))?;
    let csv_path = out_path.with_extension("csv");
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    Ok(csv_path)
}
