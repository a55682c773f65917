//! Trust quantification engine and adversarial network simulator for
//! social-IoT-style networks.
//!
//! An object's trust in another is assembled from three features: direct
//! trust derived from a beta-prior over positive/negative interaction
//! counts, recommendation trust relayed by threshold-filtered neighbours,
//! and social similarity over community, friendship and multicast-group
//! overlap. The features are fused by a configurable weighted-sum scheme
//! and classified against a threshold.
//!
//! The crate also ships a synthetic contact-trace generator, a
//! deterministic event replay engine with adversarial behaviour models
//! (on-off, bad-mouthing, ballot-stuffing), and experiment drivers for
//! detection-accuracy and weight-scheme studies.

pub mod behavior;
pub mod engine;
pub mod graph;
pub mod metrics;
pub mod rng;
pub mod trace;
pub mod trust;

pub use behavior::{BehaviorKind, BehaviorModel, Outcome, RecommendationPolicy};
pub use engine::{EngineParams, LedgerMode, Replay, TrustSnapshot, TrustState};
pub use graph::{CommunityId, GroupId, Network, ObjectId, SocialProfile};
pub use trace::{GeneratorConfig, TraceData, TraceEvent, TraceHeader};
pub use trust::{
    EffectiveWeights, InteractionCounts, TrustFeatures, TrustValue, Trustworthiness, WeightScheme,
};
