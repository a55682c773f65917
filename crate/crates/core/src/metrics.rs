//! Experiment drivers and reporting: detection accuracy against
//! ground-truth behaviours, trust trajectories for tracked nodes,
//! weight-scheme comparisons and malicious-fraction sweeps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{default_policies, BehaviorKind, BehaviorModel};
use crate::engine::{self, EngineError, EngineParams, LedgerMode, TrustSnapshot};
use crate::graph::ObjectId;
use crate::rng::derive;
use crate::trace::{generate_trace, load_trace, GeneratorConfig, TraceData, TraceError};
use crate::trust::{TrustError, TrustValue, Trustworthiness, WeightScheme};

/// Stream index separating replay randomness from trace generation.
const REPLAY_STREAM: u64 = 17;
/// Base stream index for independent sweep cells.
const SWEEP_CELL_BASE: u64 = 1000;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("unknown node {0}")]
    UnknownNode(ObjectId),
    #[error("scheme comparison needs at least two schemes")]
    NeedTwoSchemes,
    #[error("sweep requires at least one malicious fraction")]
    EmptySweep,
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Trust(#[from] TrustError),
}

/// Which behaviour kinds count as ground-truth malicious when scoring
/// detection. The default follows end-state reputation: an actor that
/// finishes malicious (or keeps oscillating) belongs to the malicious
/// family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub malicious_kinds: BTreeSet<BehaviorKind>,
}

impl Default for GroundTruth {
    fn default() -> Self {
        GroundTruth {
            malicious_kinds: [
                BehaviorKind::Malicious,
                BehaviorKind::GoodToMalicious,
                BehaviorKind::OnOff,
            ]
            .into(),
        }
    }
}

impl GroundTruth {
    pub fn is_malicious(&self, kind: BehaviorKind) -> bool {
        self.malicious_kinds.contains(&kind)
    }
}

/// Detection outcome of one run: how many ground-truth malicious objects
/// were labeled untrustworthy, and how many good objects were caught in
/// the net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub scheme: String,
    pub true_malicious: usize,
    pub detected: usize,
    /// `detected / true_malicious`; absent when the run has no malicious
    /// objects.
    pub accuracy: Option<f64>,
    pub good_total: usize,
    pub false_positives: usize,
    pub false_positive_rate: Option<f64>,
}

/// Scores a snapshot's labels against the ground-truth behaviour map.
pub fn detection_accuracy(
    snapshot: &TrustSnapshot,
    behaviors: &BTreeMap<ObjectId, BehaviorModel>,
    truth: &GroundTruth,
    scheme: &str,
) -> DetectionReport {
    let mut true_malicious = 0usize;
    let mut detected = 0usize;
    let mut good_total = 0usize;
    let mut false_positives = 0usize;
    for (id, model) in behaviors {
        let label = snapshot.labels.get(id).copied();
        if truth.is_malicious(model.kind()) {
            true_malicious += 1;
            if label == Some(Trustworthiness::Untrustworthy) {
                detected += 1;
            }
        } else {
            good_total += 1;
            if label == Some(Trustworthiness::Untrustworthy) {
                false_positives += 1;
            }
        }
    }
    DetectionReport {
        scheme: scheme.to_string(),
        true_malicious,
        detected,
        accuracy: (true_malicious > 0).then(|| detected as f64 / true_malicious as f64),
        good_total,
        false_positives,
        false_positive_rate: (good_total > 0).then(|| false_positives as f64 / good_total as f64),
    }
}

/// One plot-ready point: a node's network-wide trust at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub checkpoint: u64,
    pub node: ObjectId,
    pub score: f64,
}

/// Long-format trajectory table, one row per (checkpoint, node).
pub fn trajectory_series(
    snapshots: &[TrustSnapshot],
    nodes: &[ObjectId],
) -> Result<Vec<TrajectoryRow>, MetricsError> {
    let mut rows = Vec::with_capacity(snapshots.len() * nodes.len());
    for snapshot in snapshots {
        for &node in nodes {
            let score = snapshot
                .global_scores
                .get(&node)
                .ok_or(MetricsError::UnknownNode(node))?;
            rows.push(TrajectoryRow { checkpoint: snapshot.at_event, node, score: score.get() });
        }
    }
    Ok(rows)
}

/// Scheme selection: one of the named presets or a custom triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "scheme")]
pub enum SchemeSpec {
    Ws1,
    Ws2,
    Mean,
    Custom { w1: f64, w2: f64, w3: f64 },
}

impl SchemeSpec {
    pub fn resolve(&self) -> Result<WeightScheme, TrustError> {
        match *self {
            SchemeSpec::Ws1 => Ok(WeightScheme::WS1),
            SchemeSpec::Ws2 => Ok(WeightScheme::WS2),
            SchemeSpec::Mean => Ok(WeightScheme::MEAN),
            SchemeSpec::Custom { w1, w2, w3 } => WeightScheme::new(w1, w2, w3),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SchemeSpec::Ws1 => "WS-1".to_string(),
            SchemeSpec::Ws2 => "WS-2".to_string(),
            SchemeSpec::Mean => "Mean".to_string(),
            SchemeSpec::Custom { w1, w2, w3 } => format!("custom({w1},{w2},{w3})"),
        }
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for SchemeSpec {
    type Err = TrustError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ws1" | "ws-1" => Ok(SchemeSpec::Ws1),
            "ws2" | "ws-2" => Ok(SchemeSpec::Ws2),
            "mean" => Ok(SchemeSpec::Mean),
            _ => {
                let scheme = s.parse::<WeightScheme>()?;
                Ok(SchemeSpec::Custom {
                    w1: scheme.direct_weight(),
                    w2: scheme.social_weight(),
                    w3: scheme.recommendation_weight(),
                })
            }
        }
    }
}

/// Where the trace comes from: the seeded generator or a file on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum TraceSource {
    Generate { config: GeneratorConfig },
    File { path: PathBuf },
}

/// Full description of one experiment; together with the seed it pins
/// every output byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: TraceSource,
    pub scheme: SchemeSpec,
    pub schemes: Vec<SchemeSpec>,
    pub theta: f64,
    pub checkpoints: Vec<u64>,
    pub sweep_fractions: Vec<f64>,
    pub tracked_nodes: Vec<ObjectId>,
    /// Sliding-window span in events; `None` keeps cumulative ledgers.
    pub window_events: Option<u64>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            source: TraceSource::Generate { config: GeneratorConfig::default() },
            scheme: SchemeSpec::Ws1,
            schemes: vec![SchemeSpec::Ws1, SchemeSpec::Ws2, SchemeSpec::Mean],
            theta: 0.5,
            checkpoints: vec![4_000, 8_000, 12_000, 16_000, 20_000],
            sweep_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            tracked_nodes: Vec::new(),
            window_events: None,
            out_dir: PathBuf::from("results"),
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(MetricsError::InvalidConfig(format!("theta {} outside [0, 1]", self.theta)));
        }
        self.scheme.resolve()?;
        for scheme in &self.schemes {
            scheme.resolve()?;
        }
        for &fraction in &self.sweep_fractions {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(MetricsError::InvalidConfig(format!(
                    "sweep fraction {fraction} outside [0, 1]"
                )));
            }
        }
        if let TraceSource::Generate { config } = &self.source {
            config.validate()?;
        }
        Ok(())
    }

    fn ledger_mode(&self) -> LedgerMode {
        match self.window_events {
            Some(window_events) => LedgerMode::Windowed { window_events },
            None => LedgerMode::Cumulative,
        }
    }

    fn engine_params(&self, scheme: &SchemeSpec, replay_seed: u64) -> Result<EngineParams, MetricsError> {
        Ok(EngineParams {
            scheme: scheme.resolve()?,
            theta: TrustValue::new(self.theta)?,
            mode: self.ledger_mode(),
            seed: replay_seed,
        })
    }

    fn load_source(&self) -> Result<TraceData, MetricsError> {
        match &self.source {
            TraceSource::Generate { config } => Ok(generate_trace(config)?),
            TraceSource::File { path } => Ok(load_trace(path)?),
        }
    }
}

/// Everything a single run produces.
#[derive(Debug)]
pub struct RunOutput {
    pub data: TraceData,
    pub snapshots: Vec<TrustSnapshot>,
    pub detection: DetectionReport,
    pub trajectories: Vec<TrajectoryRow>,
}

/// Replays the configured trace under the configured scheme, snapshotting
/// at each checkpoint. Detection is scored on the final snapshot.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, MetricsError> {
    cfg.validate()?;
    let data = cfg.load_source()?;
    let policies = default_policies(&data.behaviors);
    let params = cfg.engine_params(&cfg.scheme, derive(cfg.seed, REPLAY_STREAM))?;
    let snapshots = engine::run(
        &data.network,
        &data.events,
        &data.behaviors,
        &policies,
        &params,
        &cfg.checkpoints,
    )?;
    let final_snapshot = snapshots.last().expect("run yields at least one snapshot");
    let detection = detection_accuracy(
        final_snapshot,
        &data.behaviors,
        &GroundTruth::default(),
        &cfg.scheme.label(),
    );
    let nodes: Vec<ObjectId> = if cfg.tracked_nodes.is_empty() {
        data.network.roster().collect()
    } else {
        cfg.tracked_nodes.clone()
    };
    let trajectories = trajectory_series(&snapshots, &nodes)?;
    Ok(RunOutput { data, snapshots, detection, trajectories })
}

/// One row of the scheme-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scheme: String,
    pub node: ObjectId,
    pub checkpoint: u64,
    pub score: f64,
}

/// Replays the identical trace and seed under each selected scheme; rows
/// differ only in the scheme column.
pub fn scheme_comparison(cfg: &ExperimentConfig) -> Result<Vec<ComparisonRow>, MetricsError> {
    cfg.validate()?;
    if cfg.schemes.len() < 2 {
        return Err(MetricsError::NeedTwoSchemes);
    }
    let data = cfg.load_source()?;
    let policies = default_policies(&data.behaviors);
    let nodes: Vec<ObjectId> = if cfg.tracked_nodes.is_empty() {
        data.network.roster().collect()
    } else {
        cfg.tracked_nodes.clone()
    };
    let replay_seed = derive(cfg.seed, REPLAY_STREAM);
    let mut rows = Vec::new();
    for scheme in &cfg.schemes {
        let params = cfg.engine_params(scheme, replay_seed)?;
        let snapshots = engine::run(
            &data.network,
            &data.events,
            &data.behaviors,
            &policies,
            &params,
            &cfg.checkpoints,
        )?;
        for &node in &nodes {
            for snapshot in &snapshots {
                let score = snapshot
                    .global_scores
                    .get(&node)
                    .ok_or(MetricsError::UnknownNode(node))?;
                rows.push(ComparisonRow {
                    scheme: scheme.label(),
                    node,
                    checkpoint: snapshot.at_event,
                    score: score.get(),
                });
            }
        }
    }
    Ok(rows)
}

/// One cell of the malicious-fraction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub scheme: String,
    pub detection_accuracy: Option<f64>,
    pub mean_good_score: Option<f64>,
}

/// Runs one full experiment per (fraction, scheme) cell with independent
/// derived seeds, scoring detection on the final state of each run.
pub fn malicious_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, MetricsError> {
    cfg.validate()?;
    if cfg.sweep_fractions.is_empty() {
        return Err(MetricsError::EmptySweep);
    }
    let TraceSource::Generate { config: base } = &cfg.source else {
        return Err(MetricsError::InvalidConfig(
            "sweep varies the malicious fraction and needs a generated source".into(),
        ));
    };
    let truth = GroundTruth::default();
    let mut rows = Vec::new();
    for (fi, &fraction) in cfg.sweep_fractions.iter().enumerate() {
        for (si, scheme) in cfg.schemes.iter().enumerate() {
            let cell = (fi * cfg.schemes.len() + si) as u64;
            let cell_seed = derive(cfg.seed, SWEEP_CELL_BASE + cell);
            let gen_cfg = GeneratorConfig {
                malicious_fraction: fraction,
                seed: derive(cell_seed, 0),
                ..base.clone()
            };
            let data = generate_trace(&gen_cfg)?;
            let policies = default_policies(&data.behaviors);
            let params = cfg.engine_params(scheme, derive(cell_seed, 1))?;
            let snapshots = engine::run(
                &data.network,
                &data.events,
                &data.behaviors,
                &policies,
                &params,
                &[],
            )?;
            let snapshot = snapshots.last().expect("final snapshot");
            let report = detection_accuracy(snapshot, &data.behaviors, &truth, &scheme.label());
            let good_scores: Vec<f64> = data
                .behaviors
                .iter()
                .filter(|(_, m)| !truth.is_malicious(m.kind()))
                .map(|(id, _)| snapshot.global_scores[id].get())
                .collect();
            let mean_good_score = (!good_scores.is_empty())
                .then(|| good_scores.iter().sum::<f64>() / good_scores.len() as f64);
            rows.push(SweepRow {
                fraction,
                scheme: scheme.label(),
                detection_accuracy: report.accuracy,
                mean_good_score,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.fraction
            .partial_cmp(&b.fraction)
            .expect("fractions are finite")
            .then_with(|| a.scheme.cmp(&b.scheme))
    });
    Ok(rows)
}
