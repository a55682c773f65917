//! Property tests for the trust formulas, graph invariants, generator
//! determinism and the recommendation threshold filter.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use siot_trust::behavior::{Outcome, RecommendationPolicy};
use siot_trust::engine::{pair_trust, EngineParams, TrustState};
use siot_trust::graph::{CommunityId, GroupId, Network, ObjectId, SocialProfile};
use siot_trust::trace::{generate_trace, write_trace, GeneratorConfig};
use siot_trust::trust::{
    coi_similarity, cowork_similarity, direct_trust, final_trust, friendship_similarity,
    recommendation_trust, resolve_scenario, social_similarity, InteractionCounts, TrustFeatures,
    TrustValue, WeightScheme,
};

const TOL: f64 = 1e-9;

fn trust_value() -> impl Strategy<Value = TrustValue> {
    (0.0f64..=1.0).prop_map(|v| TrustValue::new(v).unwrap())
}

fn small_set() -> impl Strategy<Value = BTreeSet<u8>> {
    proptest::collection::btree_set(0u8..32, 0..10)
}

fn scheme() -> impl Strategy<Value = WeightScheme> {
    (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0).prop_map(|(a, b, c)| {
        let sum = a + b + c;
        WeightScheme::new(a / sum, b / sum, 1.0 - a / sum - b / sum).unwrap()
    })
}

fn features() -> impl Strategy<Value = TrustFeatures> {
    (
        proptest::option::of(trust_value()),
        proptest::option::of(trust_value()),
        proptest::option::of(trust_value()),
    )
        .prop_filter("at least one feature", |(d, s, r)| {
            d.is_some() || s.is_some() || r.is_some()
        })
        .prop_map(|(d, s, r)| TrustFeatures::new(d, s, r))
}

proptest! {
    #[test]
    fn every_formula_stays_in_the_unit_interval(
        p in 0u64..1_000_000,
        n in 0u64..1_000_000,
        scores in proptest::collection::vec(trust_value(), 1..8),
        a in small_set(),
        b in small_set(),
        feats in features(),
        ws in scheme(),
    ) {
        let in_unit = |v: TrustValue| v.get() >= 0.0 && v.get() <= 1.0;
        prop_assert!(in_unit(direct_trust(InteractionCounts::new(p, n))));
        prop_assert!(in_unit(recommendation_trust(&scores).unwrap()));
        prop_assert!(in_unit(social_similarity(&scores).unwrap()));
        prop_assert!(in_unit(coi_similarity(&a, &b)));
        prop_assert!(in_unit(friendship_similarity(&a, &b)));
        prop_assert!(in_unit(cowork_similarity(&a, &b)));
        prop_assert!(in_unit(final_trust(&feats, &ws).unwrap()));
    }

    #[test]
    fn direct_trust_is_strictly_monotone(p in 0u64..10_000, n in 0u64..10_000) {
        let base = direct_trust(InteractionCounts::new(p, n)).get();
        prop_assert!(direct_trust(InteractionCounts::new(p + 1, n)).get() > base);
        prop_assert!(direct_trust(InteractionCounts::new(p, n + 1)).get() < base);
    }

    #[test]
    fn similarities_are_symmetric(a in small_set(), b in small_set()) {
        prop_assert_eq!(
            coi_similarity(&a, &b).get().to_bits(),
            coi_similarity(&b, &a).get().to_bits()
        );
        prop_assert_eq!(
            cowork_similarity(&a, &b).get().to_bits(),
            cowork_similarity(&b, &a).get().to_bits()
        );
    }

    #[test]
    fn similarity_bounds_hold(a in small_set(), b in small_set()) {
        if !a.is_empty() {
            prop_assert_eq!(coi_similarity(&a, &a).get(), 1.0);
            prop_assert_eq!(cowork_similarity(&a, &a).get(), 1.0);
        }
        if a.intersection(&b).next().is_none() {
            prop_assert_eq!(coi_similarity(&a, &b).get(), 0.0);
            prop_assert_eq!(cowork_similarity(&a, &b).get(), 0.0);
        }
        prop_assert!(cowork_similarity(&a, &b).get() <= 1.0);
    }

    #[test]
    fn effective_weights_sum_to_one_for_every_pattern(ws in scheme()) {
        let value = TrustValue::new(0.5).unwrap();
        for pattern in 1u8..8 {
            let feats = TrustFeatures::new(
                (pattern & 1 != 0).then_some(value),
                (pattern & 2 != 0).then_some(value),
                (pattern & 4 != 0).then_some(value),
            );
            let w = resolve_scenario(&feats, &ws).unwrap();
            prop_assert!((w.sum() - 1.0).abs() < TOL, "pattern {pattern}: sum {}", w.sum());
            prop_assert_eq!(w.wd == 0.0, feats.direct.is_none());
            prop_assert_eq!(w.ws == 0.0, feats.social.is_none());
            prop_assert_eq!(w.wr == 0.0, feats.recommendation.is_none());
        }
    }

    #[test]
    fn fusion_is_a_convex_combination(feats in features(), ws in scheme()) {
        let present = feats.present();
        let min = present.iter().map(|v| v.get()).fold(f64::INFINITY, f64::min);
        let max = present.iter().map(|v| v.get()).fold(f64::NEG_INFINITY, f64::max);
        let fused = final_trust(&feats, &ws).unwrap().get();
        prop_assert!(fused >= min - 1e-12 && fused <= max + 1e-12);
    }

    #[test]
    fn mean_scheme_matches_plain_average_when_all_present(
        d in trust_value(),
        s in trust_value(),
        r in trust_value(),
    ) {
        let feats = TrustFeatures::new(Some(d), Some(s), Some(r));
        let fused = final_trust(&feats, &WeightScheme::MEAN).unwrap().get();
        let mean = (d.get() + s.get() + r.get()) / 3.0;
        prop_assert!((fused - mean).abs() < TOL);
    }

    #[test]
    fn singleton_features_pass_through_unchanged(v in trust_value(), ws in scheme()) {
        for feats in [
            TrustFeatures::new(Some(v), None, None),
            TrustFeatures::new(None, Some(v), None),
            TrustFeatures::new(None, None, Some(v)),
        ] {
            prop_assert_eq!(final_trust(&feats, &ws).unwrap().get(), v.get());
        }
    }
}

/// One profile row: (id, friends, communities, multicast groups).
type ProfileRow = (u32, Vec<u32>, Vec<u32>, Vec<u32>);
/// A threshold-filter case: profile batch, interaction history, trustor,
/// recommender, attack target and the injected report outcomes.
type ThetaFilterCase = (Vec<ProfileRow>, Vec<(u32, u32, bool)>, u32, u32, u32, Vec<bool>);

/// Random batch of profiles over `n` objects; friend references may point
/// forward to objects added later in the batch.
fn profile_batch() -> impl Strategy<Value = Vec<ProfileRow>> {
    (4u32..12).prop_flat_map(|n| {
        proptest::collection::vec(
            (
                proptest::collection::vec(0..n, 0..5),
                proptest::collection::vec(0u32..6, 0..4),
                proptest::collection::vec(0u32..6, 0..4),
            ),
            n as usize,
        )
        .prop_map(move |rows| {
            rows.into_iter()
                .enumerate()
                .map(|(id, (friends, communities, groups))| {
                    (id as u32, friends, communities, groups)
                })
                .collect()
        })
    })
}

fn build_network(batch: &[ProfileRow]) -> Network {
    let mut net = Network::new();
    for (id, friends, communities, groups) in batch {
        let profile = SocialProfile {
            friends: friends.iter().filter(|&&f| f != *id).map(|&f| ObjectId(f)).collect(),
            communities: communities.iter().map(|&c| CommunityId(c)).collect(),
            multicast_groups: groups.iter().map(|&g| GroupId(g)).collect(),
        };
        net.add_object(ObjectId(*id), profile).unwrap();
    }
    net.validate().unwrap();
    net
}

proptest! {
    #[test]
    fn friendship_symmetry_survives_any_batch(batch in profile_batch()) {
        let net = build_network(&batch);
        let roster: Vec<ObjectId> = net.roster().collect();
        for &i in &roster {
            for &f in &net.profile(i).unwrap().friends {
                prop_assert!(net.profile(f).unwrap().friends.contains(&i));
            }
        }
    }

    #[test]
    fn similarity_features_are_symmetric(batch in profile_batch()) {
        let net = build_network(&batch);
        let roster: Vec<ObjectId> = net.roster().collect();
        for &i in &roster {
            for &j in &roster {
                if i == j {
                    continue;
                }
                let a = net.similarity_features(i, j).unwrap();
                let b = net.similarity_features(j, i).unwrap();
                match (a, b) {
                    (Some(x), Some(y)) => prop_assert_eq!(x.get().to_bits(), y.get().to_bits()),
                    (None, None) => {}
                    other => prop_assert!(false, "asymmetric availability {other:?}"),
                }
            }
        }
    }
}

fn generator_config() -> impl Strategy<Value = GeneratorConfig> {
    (
        5u32..25,
        50u64..400,
        0.0f64..=1.0,
        3u32..8,
        1u32..6,
        1.0f64..4.0,
        any::<u64>(),
        0.0f64..=1.0,
    )
        .prop_map(
            |(objects, events, fraction, communities, friends, mean_comm, seed, bias)| {
                GeneratorConfig {
                    object_count: objects,
                    target_event_count: events,
                    malicious_fraction: fraction,
                    community_count: communities,
                    mean_friends_per_object: f64::from(friends.min(objects - 1)),
                    mean_communities_per_object: mean_comm.min(f64::from(communities)),
                    multicast_group_count: 6,
                    mean_multicast_groups: 2.0,
                    friend_bias: bias,
                    seed,
                    ..GeneratorConfig::default()
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_traces_are_deterministic_and_loadable(cfg in generator_config()) {
        let a = generate_trace(&cfg).unwrap();
        let b = generate_trace(&cfg).unwrap();
        let text_a = write_trace(&a);
        prop_assert_eq!(&text_a, &write_trace(&b));
        // Full structural validation on reload, and an exact round trip.
        let reloaded = siot_trust::trace::read_trace(&text_a).unwrap();
        prop_assert_eq!(reloaded, a);
    }
}

/// Strategy for the threshold-filter soundness check: a network with at
/// least one friend edge, a base interaction history, and the indices of
/// the trustor, its neighbour and the attack target.
fn theta_filter_case() -> impl Strategy<Value = ThetaFilterCase> {
    profile_batch()
        .prop_filter("needs a friend edge", |batch| {
            batch.iter().any(|(id, friends, ..)| friends.iter().any(|f| f != id))
        })
        .prop_flat_map(|batch| {
            let n = batch.len() as u32;
            let edges: Vec<(u32, u32)> = batch
                .iter()
                .flat_map(|(id, friends, ..)| {
                    friends.iter().filter(|&&f| f != *id).map(move |&f| (*id, f))
                })
                .collect();
            (
                Just(batch),
                proptest::collection::vec((0..n, 0..n, any::<bool>()), 0..40),
                0..edges.len(),
                Just(edges),
                0..n,
                proptest::collection::vec(any::<bool>(), 1..10),
            )
                .prop_map(|(batch, history, edge_idx, edges, target, reports)| {
                    let (trustor, recommender) = edges[edge_idx];
                    (batch, history, trustor, recommender, target, reports)
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Bad-mouthing immunity: a recommender the trustor does not trust
    /// above theta can never move any of the trustor's pair-trust values,
    /// no matter what it reports.
    #[test]
    fn distrusted_bad_mouther_cannot_move_pair_trust(
        (batch, history, trustor, recommender, target, reports) in theta_filter_case(),
    ) {
        let net = build_network(&batch);
        let n = batch.len() as u32;
        let trustor = ObjectId(trustor);
        let recommender = ObjectId(recommender);
        let target = ObjectId(target % n);
        prop_assume!(target != trustor && target != recommender);

        let params = EngineParams::default();
        let mut state = TrustState::new(&params);
        for (i, j, positive) in history {
            let (i, j) = (ObjectId(i), ObjectId(j));
            if i == j {
                continue;
            }
            let outcome = if positive { Outcome::Positive } else { Outcome::Negative };
            state.record_outcome(i, j, outcome);
        }
        // Pin the trustor's direct trust in the recommender at or below
        // theta before taking the baseline.
        while direct_trust(
            state.effective_counts(trustor, recommender).unwrap_or_default(),
        )
        .get()
            > params.theta.get()
        {
            state.record_outcome(trustor, recommender, Outcome::Negative);
        }

        let honest: BTreeMap<ObjectId, RecommendationPolicy> = BTreeMap::new();
        let roster: Vec<ObjectId> = net.roster().collect();
        let baseline: Vec<(ObjectId, u64)> = roster
            .iter()
            .filter(|&&t| t != trustor)
            .map(|&t| (t, pair_trust(&state, &net, trustor, t, &honest).unwrap().get().to_bits()))
            .collect();

        // Inject: the recommender acquires evidence about the target and
        // starts bad-mouthing it.
        for positive in reports {
            let outcome = if positive { Outcome::Positive } else { Outcome::Negative };
            state.record_outcome(recommender, target, outcome);
        }
        let mut policies = BTreeMap::new();
        policies.insert(
            recommender,
            RecommendationPolicy::BadMouthing { targets: [target].into() },
        );

        for (t, expected) in baseline {
            let after = pair_trust(&state, &net, trustor, t, &policies).unwrap().get().to_bits();
            prop_assert_eq!(after, expected, "pair ({}, {}) moved", trustor, t);
        }
    }
}
