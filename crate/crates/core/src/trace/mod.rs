//! Interaction traces: the on-disk format, loading with full validation,
//! and a seeded synthetic generator producing contact-trace-shaped data
//! (social profiles plus timed interactions) at configurable scale.
//!
//! Real contact-trace datasets (conference proximity logs and the like)
//! can be adapted to this format by hand: each proximity contact or
//! message becomes a [`TraceEvent`] with the initiator as trustor, declared
//! friend lists become the `F:` sets, interest groups the `C:` communities
//! and shared application/multicast groups the `M:` sets; behaviours must
//! be assigned separately since real logs carry no ground truth. No such
//! adapter ships here, and this mapping is untested against raw data.

mod format;
mod generate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{BehaviorError, BehaviorModel};
use crate::graph::{GraphError, Network, ObjectId};

pub use format::{load_trace, read_trace, write_trace, FORMAT_VERSION};
pub use generate::{generate_trace, BehaviorMix, GeneratorConfig, ServiceParams};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event {seq}: trustor and trustee are both {id}")]
    SelfInteraction { seq: u64, id: ObjectId },
    #[error("event {seq}: sequence numbers must increase strictly")]
    NonMonotonicSeq { seq: u64 },
    #[error("event {seq}: timestamps must not decrease")]
    NonMonotonicTime { seq: u64 },
    #[error("line {line}: unknown object {id}")]
    UnknownObject { line: usize, id: ObjectId },
    #[error("{what} count mismatch: header declares {declared}, file has {found}")]
    CountMismatch { what: &'static str, declared: usize, found: usize },
    #[error("checkpoint {checkpoint} exceeds event count {events}")]
    CheckpointOutOfRange { checkpoint: u64, events: usize },
    #[error("checkpoints must be strictly increasing and positive")]
    CheckpointsNotIncreasing,
    #[error("infeasible generator config: {0}")]
    InfeasibleConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// One timed interaction: `trustor` requests a service from `trustee`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub tick: u64,
    pub trustor: ObjectId,
    pub trustee: ObjectId,
}

/// Trace file header; counts must match the file body exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceHeader {
    pub object_count: usize,
    pub event_count: usize,
    pub generator_seed: Option<u64>,
    pub format_version: u32,
}

/// A fully loaded or generated trace: the social network, the event list
/// in replay order, and each object's behaviour model.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceData {
    pub header: TraceHeader,
    pub network: Network,
    pub events: Vec<TraceEvent>,
    pub behaviors: BTreeMap<ObjectId, BehaviorModel>,
}

/// Validates checkpoint positions against an event list and returns them as
/// prefix lengths at which the engine snapshots trust state.
pub fn split_checkpoints(events: &[TraceEvent], checkpoints: &[u64]) -> Result<Vec<usize>, TraceError> {
    let mut prev: Option<u64> = None;
    let mut cuts = Vec::with_capacity(checkpoints.len());
    for &cp in checkpoints {
        if cp == 0 || prev.is_some_and(|p| cp <= p) {
            return Err(TraceError::CheckpointsNotIncreasing);
        }
        if cp as usize > events.len() {
            return Err(TraceError::CheckpointOutOfRange { checkpoint: cp, events: events.len() });
        }
        cuts.push(cp as usize);
        prev = Some(cp);
    }
    Ok(cuts)
}
