//! CSV and manifest writers. Column orders are fixed and documented in the
//! README; scores are formatted with six decimals so identical runs emit
//! identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;
use siot_trust::metrics::{
    ComparisonRow, DetectionReport, ExperimentConfig, SweepRow, TrajectoryRow,
};
use siot_trust::engine::TrustSnapshot;

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "run_manifest.json";

fn opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub fn snapshot_csv(snapshot: &TrustSnapshot) -> String {
    let mut out = String::from("node,global_trust,label\n");
    for (node, score) in &snapshot.global_scores {
        let _ = writeln!(out, "{},{:.6},{}", node, score.get(), snapshot.labels[node]);
    }
    out
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("checkpoint,node,score\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{:.6}", row.checkpoint, row.node, row.score);
    }
    out
}

pub fn detection_csv(reports: &[&DetectionReport], theta: f64) -> String {
    let mut out = String::from(
        "scheme,theta,true_malicious,detected,accuracy,good_total,false_positives,false_positive_rate\n",
    );
    for report in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            report.scheme,
            theta,
            report.true_malicious,
            report.detected,
            opt(report.accuracy),
            report.good_total,
            report.false_positives,
            opt(report.false_positive_rate),
        );
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("scheme,node,checkpoint,score\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{},{:.6}", row.scheme, row.node, row.checkpoint, row.score);
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("fraction,scheme,detection_accuracy,mean_good_score\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.fraction,
            row.scheme,
            opt(row.detection_accuracy),
            opt(row.mean_good_score),
        );
    }
    out
}

/// Writes every output file plus the manifest that pins the full config,
/// seed and schema versions.
pub fn write_outputs(
    command: &str,
    cfg: &ExperimentConfig,
    files: &[(String, String)],
) -> Result<PathBuf> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating output dir {}", dir.display()))?;
    for (name, contents) in files {
        write_file(&dir.join(name), contents)?;
    }
    let manifest = json!({
        "manifest_version": 1,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "outputs": files.iter().map(|(name, _)| name.clone()).collect::<Vec<_>>(),
    });
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest).context("serializing manifest")?;
    write_file(&path, &(text + "\n"))?;
    Ok(dir.clone())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
