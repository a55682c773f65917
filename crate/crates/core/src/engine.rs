//! Event replay: applies behaviour models to produce ratings, maintains
//! per-pair interaction ledgers, gathers threshold-filtered
//! recommendations, fuses features into trust scores and snapshots the
//! network's trust state at checkpoints.

use std::collections::{BTreeMap, VecDeque};

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::behavior::{BehaviorModel, Outcome, RecommendationPolicy};
use crate::graph::{GraphError, Network, ObjectId};
use crate::rng::stream_rng;
use crate::trace::{split_checkpoints, TraceError, TraceEvent};
use crate::trust::{
    classify, direct_trust, final_trust, recommendation_trust, InteractionCounts, TrustError,
    TrustFeatures, TrustValue, Trustworthiness, WeightScheme,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("trustor and trustee are both {0}")]
    SelfPair(ObjectId),
    #[error("no behavior model for object {0}")]
    MissingBehavior(ObjectId),
    #[error("cannot advance to event {requested}: {processed} already processed, {available} available")]
    InvalidPrefix { requested: usize, processed: usize, available: usize },
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// How direct-trust evidence accumulates.
///
/// `Cumulative` keeps every outcome forever (the default). `Windowed`
/// derives direct trust from the outcomes recorded within the last
/// `window_events` replay events only, which lets trust track behaviour
/// changes and exposes on-off attacks; cumulative counters are still kept
/// for accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerMode {
    Cumulative,
    Windowed { window_events: u64 },
}

/// Replay parameters: fusion scheme, decision threshold, ledger mode and
/// the seed for the per-actor behaviour streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    pub scheme: WeightScheme,
    pub theta: TrustValue,
    pub mode: LedgerMode,
    pub seed: u64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            scheme: WeightScheme::WS1,
            theta: TrustValue::PRIOR,
            mode: LedgerMode::Cumulative,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct PairLedger {
    counts: InteractionCounts,
    window: VecDeque<(u64, Outcome)>,
}

/// Mutable trust state of one replay: the interaction ledgers plus the
/// assessment parameters.
#[derive(Debug, Clone)]
pub struct TrustState {
    scheme: WeightScheme,
    theta: TrustValue,
    mode: LedgerMode,
    events_processed: u64,
    ledgers: BTreeMap<(ObjectId, ObjectId), PairLedger>,
}

impl TrustState {
    pub fn new(params: &EngineParams) -> Self {
        TrustState {
            scheme: params.scheme,
            theta: params.theta,
            mode: params.mode,
            events_processed: 0,
            ledgers: BTreeMap::new(),
        }
    }

    pub fn scheme(&self) -> &WeightScheme {
        &self.scheme
    }

    pub fn theta(&self) -> TrustValue {
        self.theta
    }

    pub fn mode(&self) -> LedgerMode {
        self.mode
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    /// Records one rated interaction. Ledger counters only ever increase.
    pub fn record_outcome(&mut self, trustor: ObjectId, trustee: ObjectId, outcome: Outcome) {
        let ledger = self.ledgers.entry((trustor, trustee)).or_default();
        match outcome {
            Outcome::Positive => ledger.counts.record_positive(),
            Outcome::Negative => ledger.counts.record_negative(),
        }
        if let LedgerMode::Windowed { window_events } = self.mode {
            ledger.window.push_back((self.events_processed, outcome));
            let horizon = self.events_processed.saturating_sub(window_events);
            while ledger.window.front().is_some_and(|&(at, _)| at < horizon) {
                ledger.window.pop_front();
            }
        }
        self.events_processed += 1;
    }

    /// The counts direct trust is derived from under the active ledger
    /// mode, or `None` when the pair has no (current) direct evidence.
    pub fn effective_counts(&self, trustor: ObjectId, trustee: ObjectId) -> Option<InteractionCounts> {
        let ledger = self.ledgers.get(&(trustor, trustee))?;
        match self.mode {
            LedgerMode::Cumulative => Some(ledger.counts),
            LedgerMode::Windowed { window_events } => {
                let horizon = self.events_processed.saturating_sub(window_events);
                let mut counts = InteractionCounts::default();
                for &(at, outcome) in ledger.window.iter().filter(|&&(at, _)| at >= horizon) {
                    let _ = at;
                    match outcome {
                        Outcome::Positive => counts.record_positive(),
                        Outcome::Negative => counts.record_negative(),
                    }
                }
                (counts.total() > 0).then_some(counts)
            }
        }
    }

    /// Lifetime counters for a pair, independent of ledger mode.
    pub fn cumulative_counts(&self, trustor: ObjectId, trustee: ObjectId) -> Option<InteractionCounts> {
        self.ledgers.get(&(trustor, trustee)).map(|l| l.counts)
    }

    /// Total positive plus negative interactions across all ledgers;
    /// equals `events_processed` since every event lands in one ledger.
    pub fn ledger_mass(&self) -> u64 {
        self.ledgers.values().map(|l| l.counts.total()).sum()
    }

    /// Direct trust used when filtering recommenders: a pair without
    /// evidence sits at the uninformed prior.
    fn filter_direct(&self, trustor: ObjectId, recommender: ObjectId) -> TrustValue {
        direct_trust(self.effective_counts(trustor, recommender).unwrap_or_default())
    }
}

/// Collects threshold-filtered recommendations from the trustor's
/// neighbours about the trustee.
///
/// A neighbour `k` reports only when the trustor's own direct trust in `k`
/// exceeds theta and `k` has direct evidence about the trustee; the report
/// passes through `k`'s recommendation policy. Returns `None` when no
/// neighbour qualifies.
pub fn gather_recommendations(
    state: &TrustState,
    net: &Network,
    trustor: ObjectId,
    trustee: ObjectId,
    policies: &BTreeMap<ObjectId, RecommendationPolicy>,
) -> Result<Option<TrustValue>, EngineError> {
    if trustor == trustee {
        return Err(EngineError::SelfPair(trustor));
    }
    let mut reports = Vec::new();
    for k in net.neighbors_of(trustor)? {
        if k == trustee {
            continue;
        }
        if state.filter_direct(trustor, k).get() <= state.theta().get() {
            continue;
        }
        let Some(counts) = state.effective_counts(k, trustee) else {
            continue;
        };
        let true_score = direct_trust(counts);
        let report = match policies.get(&k) {
            Some(policy) => policy.report(true_score, trustee),
            None => true_score,
        };
        reports.push(report);
    }
    if reports.is_empty() {
        Ok(None)
    } else {
        Ok(Some(recommendation_trust(&reports)?))
    }
}

fn features_with_social(
    state: &TrustState,
    net: &Network,
    trustor: ObjectId,
    trustee: ObjectId,
    policies: &BTreeMap<ObjectId, RecommendationPolicy>,
    social: Option<TrustValue>,
) -> Result<TrustFeatures, EngineError> {
    let direct = state.effective_counts(trustor, trustee).map(direct_trust);
    let recommendation = gather_recommendations(state, net, trustor, trustee, policies)?;
    Ok(TrustFeatures::new(direct, social, recommendation))
}

fn fuse(state: &TrustState, features: &TrustFeatures) -> Result<TrustValue, EngineError> {
    if features.is_empty() {
        // Cold start: no evidence coincides with balanced evidence.
        return Ok(TrustValue::PRIOR);
    }
    Ok(final_trust(features, state.scheme())?)
}

/// The trustor's fused trust in the trustee: direct evidence, social
/// similarity and filtered recommendations combined under the active
/// weight scheme. A pair with no features at all scores the prior 0.5.
pub fn pair_trust(
    state: &TrustState,
    net: &Network,
    trustor: ObjectId,
    trustee: ObjectId,
    policies: &BTreeMap<ObjectId, RecommendationPolicy>,
) -> Result<TrustValue, EngineError> {
    let social = net.similarity_features(trustor, trustee)?;
    let features = features_with_social(state, net, trustor, trustee, policies, social)?;
    fuse(state, &features)
}

/// Network-wide view of one object: the mean of `pair_trust` over every
/// observer that has at least one feature about it, or the prior when
/// nobody does.
pub fn global_trust(
    state: &TrustState,
    net: &Network,
    trustee: ObjectId,
    policies: &BTreeMap<ObjectId, RecommendationPolicy>,
) -> Result<TrustValue, EngineError> {
    net.profile(trustee)?;
    let mut sum = 0.0;
    let mut observers = 0usize;
    for observer in net.roster() {
        if observer == trustee {
            continue;
        }
        let social = net.similarity_features(observer, trustee)?;
        let features = features_with_social(state, net, observer, trustee, policies, social)?;
        if features.is_empty() {
            continue;
        }
        sum += fuse(state, &features)?.get();
        observers += 1;
    }
    if observers == 0 {
        Ok(TrustValue::PRIOR)
    } else {
        Ok(TrustValue::new((sum / observers as f64).clamp(0.0, 1.0)).expect("clamped"))
    }
}

/// Trust state frozen at one checkpoint: every pair score, the per-object
/// network-wide score and the threshold classification.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustSnapshot {
    pub at_event: u64,
    pub scores: BTreeMap<(ObjectId, ObjectId), TrustValue>,
    pub global_scores: BTreeMap<ObjectId, TrustValue>,
    pub labels: BTreeMap<ObjectId, Trustworthiness>,
}

/// A deterministic, resumable replay of an event list.
///
/// Social profiles are fixed for the duration, so pair similarities are
/// computed once up front; only ledgers mutate per event.
pub struct Replay<'a> {
    net: &'a Network,
    events: &'a [TraceEvent],
    behaviors: &'a BTreeMap<ObjectId, BehaviorModel>,
    policies: &'a BTreeMap<ObjectId, RecommendationPolicy>,
    state: TrustState,
    actor_rngs: BTreeMap<ObjectId, ChaCha8Rng>,
    planned_services: BTreeMap<ObjectId, u64>,
    services_rendered: BTreeMap<ObjectId, u64>,
    outcome_log: Vec<Outcome>,
    similarity: BTreeMap<(ObjectId, ObjectId), Option<TrustValue>>,
    cursor: usize,
}

impl<'a> Replay<'a> {
    pub fn new(
        net: &'a Network,
        events: &'a [TraceEvent],
        behaviors: &'a BTreeMap<ObjectId, BehaviorModel>,
        policies: &'a BTreeMap<ObjectId, RecommendationPolicy>,
        params: &EngineParams,
    ) -> Result<Self, EngineError> {
        let mut planned_services: BTreeMap<ObjectId, u64> = BTreeMap::new();
        for event in events {
            if event.trustor == event.trustee {
                return Err(EngineError::SelfPair(event.trustor));
            }
            net.profile(event.trustor)?;
            net.profile(event.trustee)?;
            if !behaviors.contains_key(&event.trustee) {
                return Err(EngineError::MissingBehavior(event.trustee));
            }
            *planned_services.entry(event.trustee).or_insert(0) += 1;
        }
        let actor_rngs = net
            .roster()
            .map(|id| (id, stream_rng(params.seed, u64::from(id.0))))
            .collect();
        let mut similarity = BTreeMap::new();
        let roster: Vec<ObjectId> = net.roster().collect();
        for (ai, &a) in roster.iter().enumerate() {
            for &b in &roster[ai + 1..] {
                let sim = net.similarity_features(a, b)?;
                similarity.insert((a, b), sim);
                similarity.insert((b, a), sim);
            }
        }
        Ok(Replay {
            net,
            events,
            behaviors,
            policies,
            state: TrustState::new(params),
            actor_rngs,
            planned_services,
            services_rendered: BTreeMap::new(),
            outcome_log: Vec::with_capacity(events.len()),
            similarity,
            cursor: 0,
        })
    }

    pub fn state(&self) -> &TrustState {
        &self.state
    }

    pub fn position(&self) -> usize {
        self.cursor
    }

    /// Ratings produced so far, aligned with the event list.
    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcome_log
    }

    /// Applies the next event: the trustee's behaviour model rates the
    /// service and the pair's ledger absorbs the outcome. Returns `false`
    /// at the end of the event list.
    pub fn step(&mut self) -> Result<bool, EngineError> {
        let Some(event) = self.events.get(self.cursor) else {
            return Ok(false);
        };
        let model = self.behaviors.get(&event.trustee).expect("validated in new");
        let index = self.services_rendered.entry(event.trustee).or_insert(0);
        let total = self.planned_services[&event.trustee];
        let rng = self.actor_rngs.get_mut(&event.trustee).expect("roster ids have rngs");
        let outcome = model.service_outcome(*index, total, rng);
        *index += 1;
        self.state.record_outcome(event.trustor, event.trustee, outcome);
        self.outcome_log.push(outcome);
        self.cursor += 1;
        Ok(true)
    }

    /// Replays forward until `event_count` events have been processed.
    pub fn advance_to(&mut self, event_count: usize) -> Result<(), EngineError> {
        if event_count < self.cursor || event_count > self.events.len() {
            return Err(EngineError::InvalidPrefix {
                requested: event_count,
                processed: self.cursor,
                available: self.events.len(),
            });
        }
        while self.cursor < event_count {
            self.step()?;
        }
        Ok(())
    }

    pub fn pair_trust(&self, trustor: ObjectId, trustee: ObjectId) -> Result<TrustValue, EngineError> {
        let social = match self.similarity.get(&(trustor, trustee)) {
            Some(&sim) => sim,
            None => self.net.similarity_features(trustor, trustee)?,
        };
        let features =
            features_with_social(&self.state, self.net, trustor, trustee, self.policies, social)?;
        fuse(&self.state, &features)
    }

    pub fn global_trust(&self, trustee: ObjectId) -> Result<TrustValue, EngineError> {
        global_trust(&self.state, self.net, trustee, self.policies)
    }

    /// Freezes the current trust state: all pair scores, per-object global
    /// scores (mean over observers holding at least one feature) and
    /// threshold labels.
    pub fn snapshot(&self) -> Result<TrustSnapshot, EngineError> {
        let roster: Vec<ObjectId> = self.net.roster().collect();
        let mut scores = BTreeMap::new();
        let mut sums: BTreeMap<ObjectId, (f64, usize)> = BTreeMap::new();
        for &i in &roster {
            for &j in &roster {
                if i == j {
                    continue;
                }
                let social = self.similarity[&(i, j)];
                let features =
                    features_with_social(&self.state, self.net, i, j, self.policies, social)?;
                let value = fuse(&self.state, &features)?;
                scores.insert((i, j), value);
                if !features.is_empty() {
                    let entry = sums.entry(j).or_insert((0.0, 0));
                    entry.0 += value.get();
                    entry.1 += 1;
                }
            }
        }
        let mut global_scores = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for &j in &roster {
            let score = match sums.get(&j) {
                Some(&(sum, count)) => {
                    TrustValue::new((sum / count as f64).clamp(0.0, 1.0)).expect("clamped")
                }
                None => TrustValue::PRIOR,
            };
            global_scores.insert(j, score);
            labels.insert(j, classify(score, self.state.theta()));
        }
        Ok(TrustSnapshot {
            at_event: self.state.events_processed(),
            scores,
            global_scores,
            labels,
        })
    }
}

/// Replays the events in order, snapshotting after each checkpoint prefix.
/// An empty checkpoint list yields a single final snapshot.
pub fn run(
    net: &Network,
    events: &[TraceEvent],
    behaviors: &BTreeMap<ObjectId, BehaviorModel>,
    policies: &BTreeMap<ObjectId, RecommendationPolicy>,
    params: &EngineParams,
    checkpoints: &[u64],
) -> Result<Vec<TrustSnapshot>, EngineError> {
    let cuts = if checkpoints.is_empty() {
        vec![events.len()]
    } else {
        split_checkpoints(events, checkpoints)?
    };
    let mut replay = Replay::new(net, events, behaviors, policies, params)?;
    let mut snapshots = Vec::with_capacity(cuts.len());
    for cut in cuts {
        replay.advance_to(cut)?;
        snapshots.push(replay.snapshot()?);
    }
    Ok(snapshots)
}
