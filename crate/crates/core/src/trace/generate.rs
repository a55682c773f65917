//! Seeded synthetic trace generator.
//!
//! Produces a social network (symmetric friendships biased toward shared
//! communities), a behaviour assignment with a configurable malicious
//! fraction, and a timed event list whose trustor-trustee pairs are biased
//! toward friends. Equal seeds produce byte-identical traces.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::behavior::{BehaviorKind, BehaviorModel};
use crate::graph::{CommunityId, GroupId, Network, ObjectId, SocialProfile};
use crate::rng::stream_rng;
use crate::trace::{TraceData, TraceError, TraceEvent, TraceHeader, FORMAT_VERSION};

const STRUCTURE_STREAM: u64 = 1;
const BEHAVIOR_STREAM: u64 = 2;
const EVENT_STREAM: u64 = 3;

/// Probability that a friendship edge is formed inside a shared community
/// rather than uniformly at random.
const COMMUNITY_EDGE_BIAS: f64 = 0.7;

/// Service-quality parameters applied to every generated behaviour model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceParams {
    pub p_good_service: f64,
    pub p_bad_service: f64,
    pub switch_point: f64,
    /// Interactions per on-off phase; `None` derives one sixth of an
    /// actor's expected interaction count.
    pub on_off_period: Option<u64>,
}

impl Default for ServiceParams {
    fn default() -> Self {
        ServiceParams { p_good_service: 0.9, p_bad_service: 0.2, switch_point: 0.5, on_off_period: None }
    }
}

/// How the malicious-family head count splits across behaviour kinds, plus
/// the fraction of good-family objects that redeem themselves over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorMix {
    pub malicious: f64,
    pub good_to_malicious: f64,
    pub on_off: f64,
    pub malicious_to_good: f64,
}

impl Default for BehaviorMix {
    fn default() -> Self {
        BehaviorMix { malicious: 1.0, good_to_malicious: 0.0, on_off: 0.0, malicious_to_good: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub object_count: u32,
    pub target_event_count: u64,
    pub malicious_fraction: f64,
    pub community_count: u32,
    pub mean_friends_per_object: f64,
    pub mean_communities_per_object: f64,
    pub multicast_group_count: u32,
    pub mean_multicast_groups: f64,
    /// Probability that an interaction partner is drawn from the trustor's
    /// friends rather than uniformly.
    pub friend_bias: f64,
    pub service: ServiceParams,
    pub behavior_mix: BehaviorMix,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            object_count: 150,
            target_event_count: 20_000,
            malicious_fraction: 0.10,
            community_count: 6,
            mean_friends_per_object: 18.0,
            mean_communities_per_object: 4.0,
            multicast_group_count: 8,
            mean_multicast_groups: 3.0,
            friend_bias: 0.7,
            service: ServiceParams::default(),
            behavior_mix: BehaviorMix::default(),
            seed: 42,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), TraceError> {
        let fail = |msg: String| Err(TraceError::InfeasibleConfig(msg));
        if self.object_count < 2 {
            return fail("need at least two objects".into());
        }
        if self.target_event_count == 0 {
            return fail("target event count must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.malicious_fraction) {
            return fail(format!("malicious fraction {} outside [0, 1]", self.malicious_fraction));
        }
        if !(0.0..=1.0).contains(&self.friend_bias) {
            return fail(format!("friend bias {} outside [0, 1]", self.friend_bias));
        }
        if self.mean_friends_per_object < 0.0
            || self.mean_friends_per_object >= self.object_count as f64
        {
            return fail(format!(
                "mean friends per object {} must be below the object count {}",
                self.mean_friends_per_object, self.object_count
            ));
        }
        if self.community_count == 0 {
            return fail("need at least one community".into());
        }
        if self.mean_communities_per_object < 1.0
            || self.mean_communities_per_object > self.community_count as f64
        {
            return fail(format!(
                "mean communities per object {} must lie in [1, {}]",
                self.mean_communities_per_object, self.community_count
            ));
        }
        if self.mean_multicast_groups < 0.0
            || self.mean_multicast_groups > self.multicast_group_count as f64
        {
            return fail(format!(
                "mean multicast groups {} must lie in [0, {}]",
                self.mean_multicast_groups, self.multicast_group_count
            ));
        }
        let mix = &self.behavior_mix;
        let family_sum = mix.malicious + mix.good_to_malicious + mix.on_off;
        if mix.malicious < 0.0
            || mix.good_to_malicious < 0.0
            || mix.on_off < 0.0
            || (family_sum - 1.0).abs() > 1e-9
        {
            return fail("malicious-family mix fractions must be non-negative and sum to 1".into());
        }
        if !(0.0..=1.0).contains(&mix.malicious_to_good) {
            return fail("malicious-to-good fraction outside [0, 1]".into());
        }
        Ok(())
    }

    /// Number of objects assigned a malicious-family behaviour.
    pub fn malicious_count(&self) -> usize {
        (self.malicious_fraction * self.object_count as f64).round() as usize
    }

    fn on_off_period(&self) -> u64 {
        self.service
            .on_off_period
            .unwrap_or_else(|| (self.target_event_count / self.object_count as u64 / 6).max(1))
    }
}

/// Generates a full trace from the seeded config.
pub fn generate_trace(cfg: &GeneratorConfig) -> Result<TraceData, TraceError> {
    cfg.validate()?;
    let n = cfg.object_count as usize;
    let ids: Vec<ObjectId> = (0..cfg.object_count).map(ObjectId).collect();

    let mut structure_rng = stream_rng(cfg.seed, STRUCTURE_STREAM);
    let mut profiles = memberships(cfg, &ids, &mut structure_rng);
    add_friendships(cfg, &ids, &mut profiles, &mut structure_rng);

    let mut network = Network::new();
    for (id, profile) in &profiles {
        network.add_object(*id, profile.clone())?;
    }
    network.validate()?;

    let behaviors = assign_behaviors(cfg, &ids)?;
    let events = sample_events(cfg, &ids, &profiles);

    Ok(TraceData {
        header: TraceHeader {
            object_count: n,
            event_count: events.len(),
            generator_seed: Some(cfg.seed),
            format_version: FORMAT_VERSION,
        },
        network,
        events,
        behaviors,
    })
}

fn memberships(
    cfg: &GeneratorConfig,
    ids: &[ObjectId],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<ObjectId, SocialProfile> {
    // Membership sizes are drawn from mean +/- 1 so similarity levels stay
    // stable across objects.
    let community_mean = cfg.mean_communities_per_object.round() as u32;
    let community_lo = community_mean.saturating_sub(1).clamp(1, cfg.community_count);
    let community_hi = (community_mean + 1).clamp(community_lo, cfg.community_count);
    let multicast_mean = cfg.mean_multicast_groups.round() as u32;
    let multicast_lo = multicast_mean.saturating_sub(1).min(cfg.multicast_group_count);
    let multicast_hi = (multicast_mean + 1).clamp(multicast_lo, cfg.multicast_group_count);
    ids.iter()
        .map(|&id| {
            let n_comm = rng.gen_range(community_lo..=community_hi) as usize;
            let communities = rand::seq::index::sample(rng, cfg.community_count as usize, n_comm)
                .into_iter()
                .map(|c| CommunityId(c as u32))
                .collect();
            let n_groups = rng.gen_range(multicast_lo..=multicast_hi) as usize;
            let multicast_groups =
                rand::seq::index::sample(rng, cfg.multicast_group_count as usize, n_groups)
                    .into_iter()
                    .map(|g| GroupId(g as u32))
                    .collect();
            (id, SocialProfile { friends: Default::default(), communities, multicast_groups })
        })
        .collect()
}

fn add_friendships(
    cfg: &GeneratorConfig,
    ids: &[ObjectId],
    profiles: &mut BTreeMap<ObjectId, SocialProfile>,
    rng: &mut ChaCha8Rng,
) {
    let n = ids.len();
    let target_edges = (cfg.mean_friends_per_object * n as f64 / 2.0).round() as usize;
    // Community membership index so edges can prefer socially close pairs.
    let mut members: BTreeMap<CommunityId, Vec<ObjectId>> = BTreeMap::new();
    for (id, profile) in profiles.iter() {
        for &community in &profile.communities {
            members.entry(community).or_default().push(*id);
        }
    }
    let mut placed = 0usize;
    let mut attempts = 0usize;
    let max_attempts = target_edges.saturating_mul(50).max(1000);
    while placed < target_edges && attempts < max_attempts {
        attempts += 1;
        let a = ids[rng.gen_range(0..n)];
        let b = if rng.gen_bool(COMMUNITY_EDGE_BIAS) {
            let communities: Vec<CommunityId> =
                profiles[&a].communities.iter().copied().collect();
            let community = communities[rng.gen_range(0..communities.len())];
            let peers = &members[&community];
            peers[rng.gen_range(0..peers.len())]
        } else {
            ids[rng.gen_range(0..n)]
        };
        if a == b || profiles[&a].friends.contains(&b) {
            continue;
        }
        profiles.get_mut(&a).expect("id exists").friends.insert(b);
        profiles.get_mut(&b).expect("id exists").friends.insert(a);
        placed += 1;
    }
}

fn assign_behaviors(
    cfg: &GeneratorConfig,
    ids: &[ObjectId],
) -> Result<BTreeMap<ObjectId, BehaviorModel>, TraceError> {
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut stream_rng(cfg.seed, BEHAVIOR_STREAM));

    let malicious_total = cfg.malicious_count().min(ids.len());
    let mix = &cfg.behavior_mix;
    let gtm = (mix.good_to_malicious * malicious_total as f64).round() as usize;
    let on_off = ((mix.on_off * malicious_total as f64).round() as usize)
        .min(malicious_total.saturating_sub(gtm));
    let good_total = ids.len() - malicious_total;
    let mtg = (mix.malicious_to_good * good_total as f64).round() as usize;

    let service = &cfg.service;
    let period = cfg.on_off_period();
    let model = |kind| {
        BehaviorModel::new(kind, service.p_good_service, service.p_bad_service, service.switch_point, period)
    };

    let mut behaviors = BTreeMap::new();
    for (slot, &id) in shuffled.iter().enumerate() {
        let kind = if slot < malicious_total {
            if slot < gtm {
                BehaviorKind::GoodToMalicious
            } else if slot < gtm + on_off {
                BehaviorKind::OnOff
            } else {
                BehaviorKind::Malicious
            }
        } else if slot < malicious_total + mtg {
            BehaviorKind::MaliciousToGood
        } else {
            BehaviorKind::Good
        };
        behaviors.insert(id, model(kind)?);
    }
    Ok(behaviors)
}

fn sample_events(
    cfg: &GeneratorConfig,
    ids: &[ObjectId],
    profiles: &BTreeMap<ObjectId, SocialProfile>,
) -> Vec<TraceEvent> {
    let n = ids.len();
    let friend_lists: BTreeMap<ObjectId, Vec<ObjectId>> =
        profiles.iter().map(|(id, p)| (*id, p.friends.iter().copied().collect())).collect();
    let mut rng = stream_rng(cfg.seed, EVENT_STREAM);
    let mut tick = 0u64;
    (0..cfg.target_event_count)
        .map(|seq| {
            let trustor = ids[rng.gen_range(0..n)];
            let friends = &friend_lists[&trustor];
            let trustee = if !friends.is_empty() && rng.gen_bool(cfg.friend_bias) {
                friends[rng.gen_range(0..friends.len())]
            } else {
                loop {
                    let candidate = ids[rng.gen_range(0..n)];
                    if candidate != trustor {
                        break candidate;
                    }
                }
            };
            tick += rng.gen_range(0..=2);
            TraceEvent { seq, tick, trustor, trustee }
        })
        .collect()
}
