//! Core trust formulas: direct trust from interaction counts, recommendation
//! and similarity aggregation, weighted-sum fusion and threshold
//! classification.
//!
//! Everything here is a pure function of its inputs; no state, no I/O.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when validating weight sums.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum TrustError {
    #[error("trust value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("weights ({w1}, {w2}, {w3}) are invalid: {reason}")]
    InvalidWeights { w1: f64, w2: f64, w3: f64, reason: &'static str },
    #[error("no recommenders available")]
    NoRecommenders,
    #[error("no similarity data available")]
    NoSimilarityData,
    #[error("no trust evidence: all features absent")]
    NoTrustEvidence,
}

/// A trust score in `[0, 1]`. Scores near 0 mark an object untrustworthy,
/// scores near 1 trustworthy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrustValue(f64);

impl TrustValue {
    /// The uninformed prior: the direct-trust formula evaluated on an
    /// empty interaction ledger.
    pub const PRIOR: TrustValue = TrustValue(0.5);

    pub fn new(value: f64) -> Result<Self, TrustError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(TrustValue(value))
        } else {
            Err(TrustError::OutOfRange(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for TrustValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Positive/negative interaction counters for one (trustor, trustee) pair.
/// Counters are monotone: they only ever increase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionCounts {
    positive: u64,
    negative: u64,
}

impl InteractionCounts {
    pub fn new(positive: u64, negative: u64) -> Self {
        InteractionCounts { positive, negative }
    }

    pub fn positive(&self) -> u64 {
        self.positive
    }

    pub fn negative(&self) -> u64 {
        self.negative
    }

    pub fn total(&self) -> u64 {
        self.positive + self.negative
    }

    pub fn record_positive(&mut self) {
        self.positive += 1;
    }

    pub fn record_negative(&mut self) {
        self.negative += 1;
    }
}

/// Direct trust from interaction history: `(P + 1) / (P + N + 2)`, the mean
/// of a Beta(P+1, N+1) posterior over the trustee's service quality.
///
/// Total on all inputs; an empty ledger yields the uninformed prior 0.5.
pub fn direct_trust(counts: InteractionCounts) -> TrustValue {
    let p = counts.positive() as f64;
    let n = counts.negative() as f64;
    TrustValue((p + 1.0) / (p + n + 2.0))
}

/// Recommendation trust: the mean of the recommenders' reported direct
/// trust scores toward the trustee.
///
/// Callers are expected to have filtered the recommender set already (only
/// neighbours the trustor itself trusts above the threshold report).
pub fn recommendation_trust(scores: &[TrustValue]) -> Result<TrustValue, TrustError> {
    if scores.is_empty() {
        return Err(TrustError::NoRecommenders);
    }
    let sum: f64 = scores.iter().map(|s| s.get()).sum();
    Ok(TrustValue(sum / scores.len() as f64))
}

/// Community-of-interest similarity: Jaccard overlap of the two objects'
/// community sets. Both sets empty yields 0 (no evidence of similarity).
pub fn coi_similarity<T: Ord>(communities_i: &BTreeSet<T>, communities_j: &BTreeSet<T>) -> TrustValue {
    jaccard(communities_i, communities_j)
}

/// Friendship similarity: Jaccard overlap of the two objects' friend sets.
pub fn friendship_similarity<T: Ord>(friends_i: &BTreeSet<T>, friends_j: &BTreeSet<T>) -> TrustValue {
    jaccard(friends_i, friends_j)
}

/// Co-work similarity: cosine overlap of the two objects' multicast-group
/// sets, `|Mi ∩ Mj| / sqrt(|Mi|·|Mj|)`. Zero when either set is empty.
pub fn cowork_similarity<T: Ord>(groups_i: &BTreeSet<T>, groups_j: &BTreeSet<T>) -> TrustValue {
    if groups_i.is_empty() || groups_j.is_empty() {
        return TrustValue(0.0);
    }
    let common = groups_i.intersection(groups_j).count() as f64;
    let denom = ((groups_i.len() * groups_j.len()) as f64).sqrt();
    TrustValue(common / denom)
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> TrustValue {
    if a.is_empty() && b.is_empty() {
        return TrustValue(0.0);
    }
    let common = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    TrustValue(common / union)
}

/// Social similarity: the mean of whichever similarity measures are
/// available for the pair. The divisor is the count of provided measures.
pub fn social_similarity(measures: &[TrustValue]) -> Result<TrustValue, TrustError> {
    if measures.is_empty() {
        return Err(TrustError::NoSimilarityData);
    }
    let sum: f64 = measures.iter().map(|m| m.get()).sum();
    Ok(TrustValue(sum / measures.len() as f64))
}

/// A weight triple (direct, social, recommendation) fusing the three trust
/// features. Weights are non-negative and sum to 1 within `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    w1: f64,
    w2: f64,
    w3: f64,
}

impl WeightScheme {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Result<Self, TrustError> {
        if !(w1.is_finite() && w2.is_finite() && w3.is_finite()) || w1 < 0.0 || w2 < 0.0 || w3 < 0.0
        {
            return Err(TrustError::InvalidWeights { w1, w2, w3, reason: "weights must be non-negative" });
        }
        if ((w1 + w2 + w3) - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(TrustError::InvalidWeights { w1, w2, w3, reason: "weights must sum to 1" });
        }
        Ok(WeightScheme { w1, w2, w3 })
    }

    /// WS-1: direct trust dominates (0.5, 0.3, 0.2).
    pub const WS1: WeightScheme = WeightScheme { w1: 0.5, w2: 0.3, w3: 0.2 };

    /// WS-2: a flatter split (0.4, 0.3, 0.3).
    pub const WS2: WeightScheme = WeightScheme { w1: 0.4, w2: 0.3, w3: 0.3 };

    /// Equal weights. Exact thirds rather than the rounded 0.33, so the
    /// sum-to-one invariant holds.
    pub const MEAN: WeightScheme = WeightScheme { w1: 1.0 / 3.0, w2: 1.0 / 3.0, w3: 1.0 / 3.0 };

    pub fn direct_weight(&self) -> f64 {
        self.w1
    }

    pub fn social_weight(&self) -> f64 {
        self.w2
    }

    pub fn recommendation_weight(&self) -> f64 {
        self.w3
    }
}

impl FromStr for WeightScheme {
    type Err = TrustError;

    /// Accepts `ws1`, `ws2`, `mean`, or a custom `w1,w2,w3` triple.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ws1" | "ws-1" => Ok(WeightScheme::WS1),
            "ws2" | "ws-2" => Ok(WeightScheme::WS2),
            "mean" => Ok(WeightScheme::MEAN),
            other => {
                let parts: Vec<&str> = other.split(',').collect();
                if parts.len() != 3 {
                    return Err(TrustError::InvalidWeights {
                        w1: f64::NAN,
                        w2: f64::NAN,
                        w3: f64::NAN,
                        reason: "expected ws1, ws2, mean or w1,w2,w3",
                    });
                }
                let parse = |p: &str| {
                    p.trim().parse::<f64>().map_err(|_| TrustError::InvalidWeights {
                        w1: f64::NAN,
                        w2: f64::NAN,
                        w3: f64::NAN,
                        reason: "weights must be numbers",
                    })
                };
                WeightScheme::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
            }
        }
    }
}

/// The optional feature triple feeding the weighted-sum fusion.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrustFeatures {
    pub direct: Option<TrustValue>,
    pub social: Option<TrustValue>,
    pub recommendation: Option<TrustValue>,
}

impl TrustFeatures {
    pub fn new(
        direct: Option<TrustValue>,
        social: Option<TrustValue>,
        recommendation: Option<TrustValue>,
    ) -> Self {
        TrustFeatures { direct, social, recommendation }
    }

    pub fn is_empty(&self) -> bool {
        self.direct.is_none() && self.social.is_none() && self.recommendation.is_none()
    }

    /// The feature values that are present, in (direct, social,
    /// recommendation) order.
    pub fn present(&self) -> Vec<TrustValue> {
        [self.direct, self.social, self.recommendation].into_iter().flatten().collect()
    }
}

/// Which feature-availability row the fusion falls into.
///
/// Rows 1–6 follow the scenario table; `SocialOnly` is an extension for the
/// combination the table leaves out (similarity data but neither direct
/// evidence nor recommenders).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    AllPresent,
    NoSocial,
    NoRecommendation,
    NoDirect,
    DirectOnly,
    RecommendationOnly,
    SocialOnly,
}

impl Scenario {
    pub fn of(features: &TrustFeatures) -> Result<Scenario, TrustError> {
        match (
            features.direct.is_some(),
            features.social.is_some(),
            features.recommendation.is_some(),
        ) {
            (true, true, true) => Ok(Scenario::AllPresent),
            (true, false, true) => Ok(Scenario::NoSocial),
            (true, true, false) => Ok(Scenario::NoRecommendation),
            (false, true, true) => Ok(Scenario::NoDirect),
            (true, false, false) => Ok(Scenario::DirectOnly),
            (false, false, true) => Ok(Scenario::RecommendationOnly),
            (false, true, false) => Ok(Scenario::SocialOnly),
            (false, false, false) => Err(TrustError::NoTrustEvidence),
        }
    }

    /// True for the one availability pattern the scenario table does not
    /// list (similarity only).
    pub fn is_extension(&self) -> bool {
        matches!(self, Scenario::SocialOnly)
    }
}

/// Per-scenario effective weights: the scheme's weights redistributed onto
/// the features that are actually present. Always sums to 1; a weight is 0
/// exactly when its feature is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveWeights {
    pub wd: f64,
    pub ws: f64,
    pub wr: f64,
}

impl EffectiveWeights {
    pub fn sum(&self) -> f64 {
        self.wd + self.ws + self.wr
    }
}

/// Redistributes the scheme's weights according to which features are
/// present.
pub fn resolve_scenario(
    features: &TrustFeatures,
    scheme: &WeightScheme,
) -> Result<EffectiveWeights, TrustError> {
    let (w1, w2, w3) = (scheme.direct_weight(), scheme.social_weight(), scheme.recommendation_weight());
    let weights = match Scenario::of(features)? {
        Scenario::AllPresent => EffectiveWeights { wd: w1, ws: w2, wr: w3 },
        Scenario::NoSocial => EffectiveWeights { wd: w1 + w2, ws: 0.0, wr: w3 },
        Scenario::NoRecommendation => EffectiveWeights { wd: w1 + w3, ws: w2, wr: 0.0 },
        Scenario::NoDirect => EffectiveWeights { wd: 0.0, ws: w2, wr: w3 + w1 },
        Scenario::DirectOnly => EffectiveWeights { wd: 1.0, ws: 0.0, wr: 0.0 },
        Scenario::RecommendationOnly => EffectiveWeights { wd: 0.0, ws: 0.0, wr: 1.0 },
        Scenario::SocialOnly => EffectiveWeights { wd: 0.0, ws: 1.0, wr: 0.0 },
    };
    Ok(weights)
}

/// Final trust: the dot product of the effective weights with the present
/// features. A convex combination, so the result lies within the range of
/// the present feature values.
pub fn final_trust(features: &TrustFeatures, scheme: &WeightScheme) -> Result<TrustValue, TrustError> {
    let w = resolve_scenario(features, scheme)?;
    let d = features.direct.map_or(0.0, TrustValue::get);
    let s = features.social.map_or(0.0, TrustValue::get);
    let r = features.recommendation.map_or(0.0, TrustValue::get);
    let score = w.wd * d + w.ws * s + w.wr * r;
    // Guard against the weight-sum tolerance nudging the combination a hair
    // outside [0, 1].
    Ok(TrustValue(score.clamp(0.0, 1.0)))
}

/// Trust decision for one object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trustworthiness {
    Trustworthy,
    Untrustworthy,
}

impl fmt::Display for Trustworthiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trustworthiness::Trustworthy => write!(f, "trustworthy"),
            Trustworthiness::Untrustworthy => write!(f, "untrustworthy"),
        }
    }
}

/// Classifies a score against the threshold. Strictly greater than theta is
/// trustworthy; a tie is untrustworthy (fail-safe).
pub fn classify(score: TrustValue, theta: TrustValue) -> Trustworthiness {
    if score.get() > theta.get() {
        Trustworthiness::Trustworthy
    } else {
        Trustworthiness::Untrustworthy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn tv(v: f64) -> TrustValue {
        TrustValue::new(v).unwrap()
    }

    const TOL: f64 = 1e-9;

    #[test]
    fn direct_trust_uninformed_prior_is_exactly_half() {
        assert_eq!(direct_trust(InteractionCounts::new(0, 0)).get(), 0.5);
    }

    #[test]
    fn direct_trust_worked_examples() {
        assert!((direct_trust(InteractionCounts::new(3, 1)).get() - 2.0 / 3.0).abs() < TOL);
        assert!((direct_trust(InteractionCounts::new(0, 8)).get() - 0.1).abs() < TOL);
    }

    #[test]
    fn direct_trust_is_strictly_inside_unit_interval() {
        let lo = direct_trust(InteractionCounts::new(0, 1_000_000));
        let hi = direct_trust(InteractionCounts::new(1_000_000, 0));
        assert!(lo.get() > 0.0 && hi.get() < 1.0);
    }

    #[test]
    fn recommendation_trust_examples() {
        let mean = recommendation_trust(&[tv(0.8), tv(0.6)]).unwrap();
        assert!((mean.get() - 0.7).abs() < TOL);
        assert_eq!(recommendation_trust(&[tv(0.42)]).unwrap().get(), 0.42);
        assert_eq!(recommendation_trust(&[tv(0.5), tv(0.5), tv(0.5)]).unwrap().get(), 0.5);
        assert_eq!(recommendation_trust(&[]), Err(TrustError::NoRecommenders));
    }

    #[test]
    fn coi_similarity_examples() {
        assert!((coi_similarity(&set(&["a", "b"]), &set(&["b", "c"])).get() - 1.0 / 3.0).abs() < TOL);
        let s = set(&["a", "b", "c"]);
        assert_eq!(coi_similarity(&s, &s).get(), 1.0);
        assert_eq!(coi_similarity(&set(&["a"]), &set(&["b"])).get(), 0.0);
        assert_eq!(coi_similarity(&set(&[]), &set(&[])).get(), 0.0);
    }

    #[test]
    fn friendship_similarity_examples() {
        let fi = set(&["n1", "n2", "n3"]);
        let fj = set(&["n2", "n3", "n4"]);
        assert!((friendship_similarity(&fi, &fj).get() - 0.5).abs() < TOL);
        assert_eq!(friendship_similarity(&fi, &fi).get(), 1.0);
        assert_eq!(friendship_similarity(&set(&[]), &set(&[])).get(), 0.0);
    }

    #[test]
    fn cowork_similarity_examples() {
        let ab = set(&["a", "b"]);
        assert_eq!(cowork_similarity(&ab, &ab).get(), 1.0);
        let abcd = set(&["a", "b", "c", "d"]);
        assert!((cowork_similarity(&abcd, &ab).get() - 0.7071067811865475).abs() < TOL);
        assert_eq!(cowork_similarity(&set(&["a"]), &set(&["b"])).get(), 0.0);
        assert_eq!(cowork_similarity(&set(&[]), &ab).get(), 0.0);
    }

    #[test]
    fn social_similarity_mean_of_worked_examples() {
        // Mean of the three similarity examples above: 1/3, 1/2, 2/sqrt(8).
        let measures = [tv(1.0 / 3.0), tv(0.5), tv(2.0 / 8.0_f64.sqrt())];
        let mean = social_similarity(&measures).unwrap();
        assert!((mean.get() - 0.513480038).abs() < TOL);
        assert_eq!(social_similarity(&[tv(0.37)]).unwrap().get(), 0.37);
        assert_eq!(social_similarity(&[tv(0.0), tv(0.0), tv(0.0)]).unwrap().get(), 0.0);
        assert_eq!(social_similarity(&[]), Err(TrustError::NoSimilarityData));
    }

    #[test]
    fn weight_scheme_presets_sum_to_one() {
        for scheme in [WeightScheme::WS1, WeightScheme::WS2, WeightScheme::MEAN] {
            let sum = scheme.direct_weight() + scheme.social_weight() + scheme.recommendation_weight();
            assert!((sum - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn weight_scheme_rejects_bad_triples() {
        assert!(WeightScheme::new(0.5, 0.3, 0.3).is_err());
        assert!(WeightScheme::new(-0.1, 0.6, 0.5).is_err());
        assert!(WeightScheme::new(f64::NAN, 0.5, 0.5).is_err());
    }

    #[test]
    fn weight_scheme_parses_names_and_triples() {
        assert_eq!("ws1".parse::<WeightScheme>().unwrap(), WeightScheme::WS1);
        assert_eq!("WS-2".parse::<WeightScheme>().unwrap(), WeightScheme::WS2);
        assert_eq!("mean".parse::<WeightScheme>().unwrap(), WeightScheme::MEAN);
        let custom = "0.6,0.2,0.2".parse::<WeightScheme>().unwrap();
        assert_eq!(custom.direct_weight(), 0.6);
        assert!("0.6,0.2".parse::<WeightScheme>().is_err());
        assert!("0.9,0.9,0.9".parse::<WeightScheme>().is_err());
    }

    #[test]
    fn resolve_scenario_matches_redistribution_rows() {
        let ws1 = WeightScheme::WS1;
        let all = TrustFeatures::new(Some(tv(0.8)), Some(tv(0.6)), Some(tv(0.7)));
        let w = resolve_scenario(&all, &ws1).unwrap();
        assert_eq!((w.wd, w.ws, w.wr), (0.5, 0.3, 0.2));

        let no_social = TrustFeatures::new(Some(tv(0.8)), None, Some(tv(0.7)));
        let w = resolve_scenario(&no_social, &ws1).unwrap();
        assert!((w.wd - 0.8).abs() < TOL && w.ws == 0.0 && (w.wr - 0.2).abs() < TOL);

        let no_rec = TrustFeatures::new(Some(tv(0.8)), Some(tv(0.6)), None);
        let w = resolve_scenario(&no_rec, &ws1).unwrap();
        assert!((w.wd - 0.7).abs() < TOL && (w.ws - 0.3).abs() < TOL && w.wr == 0.0);

        let no_direct = TrustFeatures::new(None, Some(tv(0.6)), Some(tv(0.7)));
        let w = resolve_scenario(&no_direct, &ws1).unwrap();
        assert!(w.wd == 0.0 && (w.ws - 0.3).abs() < TOL && (w.wr - 0.7).abs() < TOL);

        let only_direct = TrustFeatures::new(Some(tv(0.8)), None, None);
        let w = resolve_scenario(&only_direct, &ws1).unwrap();
        assert_eq!((w.wd, w.ws, w.wr), (1.0, 0.0, 0.0));

        let only_rec = TrustFeatures::new(None, None, Some(tv(0.7)));
        let w = resolve_scenario(&only_rec, &ws1).unwrap();
        assert_eq!((w.wd, w.ws, w.wr), (0.0, 0.0, 1.0));

        let only_social = TrustFeatures::new(None, Some(tv(0.6)), None);
        let w = resolve_scenario(&only_social, &ws1).unwrap();
        assert_eq!((w.wd, w.ws, w.wr), (0.0, 1.0, 0.0));
        assert!(Scenario::of(&only_social).unwrap().is_extension());

        let none = TrustFeatures::default();
        assert_eq!(resolve_scenario(&none, &ws1), Err(TrustError::NoTrustEvidence));
    }

    #[test]
    fn final_trust_worked_examples() {
        let all = TrustFeatures::new(Some(tv(0.8)), Some(tv(0.6)), Some(tv(0.7)));
        assert!((final_trust(&all, &WeightScheme::WS1).unwrap().get() - 0.72).abs() < TOL);
        assert!((final_trust(&all, &WeightScheme::MEAN).unwrap().get() - 0.7).abs() < TOL);

        let only_direct = TrustFeatures::new(Some(tv(0.31)), None, None);
        assert_eq!(final_trust(&only_direct, &WeightScheme::WS2).unwrap().get(), 0.31);

        let scen4 = TrustFeatures::new(None, Some(tv(0.6)), Some(tv(0.7)));
        assert!((final_trust(&scen4, &WeightScheme::WS1).unwrap().get() - 0.67).abs() < TOL);
    }

    #[test]
    fn classify_uses_strict_threshold() {
        let theta = TrustValue::PRIOR;
        assert_eq!(classify(tv(0.72), theta), Trustworthiness::Trustworthy);
        assert_eq!(classify(tv(0.5), theta), Trustworthiness::Untrustworthy);
        assert_eq!(classify(tv(0.1), theta), Trustworthiness::Untrustworthy);
    }

    #[test]
    fn trust_value_rejects_out_of_range() {
        assert!(TrustValue::new(-0.01).is_err());
        assert!(TrustValue::new(1.01).is_err());
        assert!(TrustValue::new(f64::NAN).is_err());
        assert!(TrustValue::new(0.0).is_ok());
        assert!(TrustValue::new(1.0).is_ok());
    }
}
