//! Actor behaviour policies: service quality over time (good, malicious,
//! switching, on-off) and recommendation honesty (bad-mouthing,
//! ballot-stuffing).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ObjectId;
use crate::trust::TrustValue;

#[derive(Debug, Error, PartialEq)]
pub enum BehaviorError {
    #[error("service rates must satisfy 0 <= p_bad < p_good <= 1, got p_good={p_good}, p_bad={p_bad}")]
    InvalidServiceRates { p_good: f64, p_bad: f64 },
    #[error("switch point must lie strictly inside (0, 1), got {0}")]
    InvalidSwitchPoint(f64),
    #[error("on-off period must be at least 1")]
    InvalidPeriod,
    #[error("unknown behavior kind `{0}`")]
    UnknownKind(String),
}

/// Rating of a single service interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Positive,
    Negative,
}

/// Which service phase an actor is in for a given interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Good,
    Bad,
}

/// The five service behaviours an actor can follow over its lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorKind {
    Good,
    Malicious,
    GoodToMalicious,
    MaliciousToGood,
    OnOff,
}

impl BehaviorKind {
    /// Ground-truth family used for attack-detection scoring: behaviours
    /// whose end-state reputation is malicious.
    pub fn is_malicious_family(&self) -> bool {
        matches!(self, BehaviorKind::Malicious | BehaviorKind::GoodToMalicious | BehaviorKind::OnOff)
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BehaviorKind::Good => "good",
            BehaviorKind::Malicious => "malicious",
            BehaviorKind::GoodToMalicious => "good-to-malicious",
            BehaviorKind::MaliciousToGood => "malicious-to-good",
            BehaviorKind::OnOff => "on-off",
        };
        f.write_str(s)
    }
}

impl FromStr for BehaviorKind {
    type Err = BehaviorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "good" => Ok(BehaviorKind::Good),
            "malicious" => Ok(BehaviorKind::Malicious),
            "good-to-malicious" => Ok(BehaviorKind::GoodToMalicious),
            "malicious-to-good" => Ok(BehaviorKind::MaliciousToGood),
            "on-off" => Ok(BehaviorKind::OnOff),
            other => Err(BehaviorError::UnknownKind(other.to_string())),
        }
    }
}

/// An actor's service-quality policy over its planned interactions.
///
/// `p_good_service` / `p_bad_service` are the probabilities that an
/// interaction served in the good / malicious phase is rated positive.
/// Two-phase behaviours flip at `switch_point` (a fraction of the actor's
/// planned interactions); on-off behaviour alternates phases every
/// `on_off_period` interactions, starting good.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorModel {
    kind: BehaviorKind,
    p_good_service: f64,
    p_bad_service: f64,
    switch_point: f64,
    on_off_period: u64,
}

impl BehaviorModel {
    pub fn new(
        kind: BehaviorKind,
        p_good_service: f64,
        p_bad_service: f64,
        switch_point: f64,
        on_off_period: u64,
    ) -> Result<Self, BehaviorError> {
        if !(p_good_service.is_finite() && p_bad_service.is_finite())
            || p_bad_service < 0.0
            || p_good_service > 1.0
            || p_bad_service >= p_good_service
        {
            return Err(BehaviorError::InvalidServiceRates {
                p_good: p_good_service,
                p_bad: p_bad_service,
            });
        }
        if !switch_point.is_finite() || switch_point <= 0.0 || switch_point >= 1.0 {
            return Err(BehaviorError::InvalidSwitchPoint(switch_point));
        }
        if on_off_period == 0 {
            return Err(BehaviorError::InvalidPeriod);
        }
        Ok(BehaviorModel { kind, p_good_service, p_bad_service, switch_point, on_off_period })
    }

    pub fn kind(&self) -> BehaviorKind {
        self.kind
    }

    pub fn p_good_service(&self) -> f64 {
        self.p_good_service
    }

    pub fn p_bad_service(&self) -> f64 {
        self.p_bad_service
    }

    pub fn switch_point(&self) -> f64 {
        self.switch_point
    }

    pub fn on_off_period(&self) -> u64 {
        self.on_off_period
    }

    /// The phase governing the actor's `interaction_index`-th service out
    /// of `total_planned`.
    pub fn phase_at(&self, interaction_index: u64, total_planned: u64) -> Phase {
        match self.kind {
            BehaviorKind::Good => Phase::Good,
            BehaviorKind::Malicious => Phase::Bad,
            BehaviorKind::GoodToMalicious => {
                if interaction_index < self.switch_index(total_planned) {
                    Phase::Good
                } else {
                    Phase::Bad
                }
            }
            BehaviorKind::MaliciousToGood => {
                if interaction_index < self.switch_index(total_planned) {
                    Phase::Bad
                } else {
                    Phase::Good
                }
            }
            BehaviorKind::OnOff => {
                if (interaction_index / self.on_off_period).is_multiple_of(2) {
                    Phase::Good
                } else {
                    Phase::Bad
                }
            }
        }
    }

    fn switch_index(&self, total_planned: u64) -> u64 {
        (self.switch_point * total_planned as f64).floor() as u64
    }

    /// Draws the rating of one service interaction from the
    /// phase-appropriate positive probability.
    pub fn service_outcome<R: Rng>(
        &self,
        interaction_index: u64,
        total_planned: u64,
        rng: &mut R,
    ) -> Outcome {
        let p = match self.phase_at(interaction_index, total_planned) {
            Phase::Good => self.p_good_service,
            Phase::Bad => self.p_bad_service,
        };
        if rng.gen::<f64>() < p {
            Outcome::Positive
        } else {
            Outcome::Negative
        }
    }
}

/// How an actor answers recommendation queries about other objects.
///
/// The combined `Dishonest` form models the default adversary, which
/// bad-mouths its victims and ballot-stuffs its accomplices at the same
/// time; the single-attack forms isolate one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecommendationPolicy {
    Honest,
    BadMouthing { targets: BTreeSet<ObjectId> },
    BallotStuffing { targets: BTreeSet<ObjectId> },
    Dishonest { victims: BTreeSet<ObjectId>, accomplices: BTreeSet<ObjectId> },
}

impl RecommendationPolicy {
    /// The direct-trust score the actor reports about `about`, given the
    /// score it actually holds.
    pub fn report(&self, true_score: TrustValue, about: ObjectId) -> TrustValue {
        match self {
            RecommendationPolicy::Honest => true_score,
            RecommendationPolicy::BadMouthing { targets } if targets.contains(&about) => {
                TrustValue::new(0.0).expect("0.0 is in range")
            }
            RecommendationPolicy::BallotStuffing { targets } if targets.contains(&about) => {
                TrustValue::new(1.0).expect("1.0 is in range")
            }
            RecommendationPolicy::Dishonest { victims, .. } if victims.contains(&about) => {
                TrustValue::new(0.0).expect("0.0 is in range")
            }
            RecommendationPolicy::Dishonest { accomplices, .. } if accomplices.contains(&about) => {
                TrustValue::new(1.0).expect("1.0 is in range")
            }
            _ => true_score,
        }
    }
}

/// The default policy assignment for a behaviour map: good-family actors
/// answer honestly; malicious-family actors bad-mouth every good-family
/// object and ballot-stuff their fellow attackers.
pub fn default_policies(
    behaviors: &BTreeMap<ObjectId, BehaviorModel>,
) -> BTreeMap<ObjectId, RecommendationPolicy> {
    let malicious: BTreeSet<ObjectId> = behaviors
        .iter()
        .filter(|(_, model)| model.kind().is_malicious_family())
        .map(|(id, _)| *id)
        .collect();
    let good: BTreeSet<ObjectId> =
        behaviors.keys().filter(|id| !malicious.contains(id)).copied().collect();
    behaviors
        .keys()
        .map(|&id| {
            let policy = if malicious.contains(&id) {
                let mut accomplices = malicious.clone();
                accomplices.remove(&id);
                RecommendationPolicy::Dishonest { victims: good.clone(), accomplices }
            } else {
                RecommendationPolicy::Honest
            };
            (id, policy)
        })
        .collect()
}
