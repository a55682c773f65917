//! The network's objects and their social structure: friends, communities
//! and multicast groups, with neighbourhood queries for similarity and
//! recommendation gathering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trust::{self, TrustValue};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("object {0} already exists")]
    DuplicateObject(ObjectId),
    #[error("object {0} lists itself as a friend")]
    SelfFriendship(ObjectId),
    #[error("friend reference from {from} to unknown object {to}")]
    DanglingFriend { from: ObjectId, to: ObjectId },
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("self-similarity of {0} is undefined")]
    SelfSimilarity(ObjectId),
}

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse::<u32>().map($name)
            }
        }
    };
}

id_newtype!(
    /// Identifier of one object (node) in the network.
    ObjectId
);
id_newtype!(
    /// Identifier of a community of interest.
    CommunityId
);
id_newtype!(
    /// Identifier of a multicast / co-work group.
    GroupId
);

/// An object's social structure: who it is friends with, which communities
/// it belongs to and which multicast groups it participates in.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SocialProfile {
    pub friends: BTreeSet<ObjectId>,
    pub communities: BTreeSet<CommunityId>,
    pub multicast_groups: BTreeSet<GroupId>,
}

/// The full network: a deterministic-order map from object id to profile.
///
/// Friendship symmetry is enforced on insertion in both directions; friend
/// references to objects added later in the same batch are held as pending
/// until [`Network::validate`] confirms every reference resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Network {
    profiles: BTreeMap<ObjectId, SocialProfile>,
    pending_friends: BTreeMap<ObjectId, BTreeSet<ObjectId>>,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    pub fn add_object(&mut self, id: ObjectId, mut profile: SocialProfile) -> Result<(), GraphError> {
        if self.profiles.contains_key(&id) {
            return Err(GraphError::DuplicateObject(id));
        }
        if profile.friends.contains(&id) {
            return Err(GraphError::SelfFriendship(id));
        }
        // Friends that referenced this object before it existed.
        if let Some(backrefs) = self.pending_friends.remove(&id) {
            profile.friends.extend(backrefs);
        }
        for friend in profile.friends.clone() {
            match self.profiles.get_mut(&friend) {
                Some(other) => {
                    other.friends.insert(id);
                }
                None => {
                    self.pending_friends.entry(friend).or_default().insert(id);
                }
            }
        }
        self.profiles.insert(id, profile);
        Ok(())
    }

    /// Checks that every friend reference resolved to a known object.
    pub fn validate(&self) -> Result<(), GraphError> {
        if let Some((to, froms)) = self.pending_friends.iter().next() {
            let from = *froms.iter().next().expect("pending set is never empty");
            return Err(GraphError::DanglingFriend { from, to: *to });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.profiles.contains_key(&id)
    }

    pub fn profile(&self, id: ObjectId) -> Result<&SocialProfile, GraphError> {
        self.profiles.get(&id).ok_or(GraphError::UnknownObject(id))
    }

    /// All object ids in ascending order.
    pub fn roster(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.profiles.keys().copied()
    }

    /// The trustor's friend set in ascending id order; these are the
    /// objects asked for recommendations.
    pub fn neighbors_of(&self, id: ObjectId) -> Result<Vec<ObjectId>, GraphError> {
        Ok(self.profile(id)?.friends.iter().copied().collect())
    }

    /// The social-similarity feature for a pair, or `None` when no
    /// similarity metric has data on both sides.
    ///
    /// A metric whose underlying set is empty on either side is excluded
    /// from the mean rather than counted as zero; the divisor shrinks to
    /// the number of metrics actually integrated.
    pub fn similarity_features(
        &self,
        i: ObjectId,
        j: ObjectId,
    ) -> Result<Option<TrustValue>, GraphError> {
        if i == j {
            return Err(GraphError::SelfSimilarity(i));
        }
        let a = self.profile(i)?;
        let b = self.profile(j)?;
        let mut measures = Vec::with_capacity(3);
        if !a.communities.is_empty() && !b.communities.is_empty() {
            measures.push(trust::coi_similarity(&a.communities, &b.communities));
        }
        if !a.friends.is_empty() && !b.friends.is_empty() {
            measures.push(trust::friendship_similarity(&a.friends, &b.friends));
        }
        if !a.multicast_groups.is_empty() && !b.multicast_groups.is_empty() {
            measures.push(trust::cowork_similarity(&a.multicast_groups, &b.multicast_groups));
        }
        if measures.is_empty() {
            Ok(None)
        } else {
            let mean = trust::social_similarity(&measures).expect("measures is non-empty");
            Ok(Some(mean))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(friends: &[u32], communities: &[u32], groups: &[u32]) -> SocialProfile {
        SocialProfile {
            friends: friends.iter().map(|&f| ObjectId(f)).collect(),
            communities: communities.iter().map(|&c| CommunityId(c)).collect(),
            multicast_groups: groups.iter().map(|&g| GroupId(g)).collect(),
        }
    }

    #[test]
    fn add_object_rejects_duplicates_and_self_friendship() {
        let mut net = Network::new();
        net.add_object(ObjectId(1), SocialProfile::default()).unwrap();
        assert_eq!(
            net.add_object(ObjectId(1), SocialProfile::default()),
            Err(GraphError::DuplicateObject(ObjectId(1)))
        );
        assert_eq!(
            net.add_object(ObjectId(2), profile(&[2], &[], &[])),
            Err(GraphError::SelfFriendship(ObjectId(2)))
        );
    }

    #[test]
    fn friendship_is_symmetrized_across_batch_order() {
        let mut net = Network::new();
        // a references b before b exists.
        net.add_object(ObjectId(1), profile(&[2], &[], &[])).unwrap();
        net.add_object(ObjectId(2), SocialProfile::default()).unwrap();
        net.validate().unwrap();
        assert_eq!(net.neighbors_of(ObjectId(2)).unwrap(), vec![ObjectId(1)]);
        assert_eq!(net.neighbors_of(ObjectId(1)).unwrap(), vec![ObjectId(2)]);
    }

    #[test]
    fn validate_reports_dangling_friends() {
        let mut net = Network::new();
        net.add_object(ObjectId(1), profile(&[9], &[], &[])).unwrap();
        assert_eq!(
            net.validate(),
            Err(GraphError::DanglingFriend { from: ObjectId(1), to: ObjectId(9) })
        );
    }

    #[test]
    fn neighbors_are_sorted_and_isolated_objects_have_none() {
        let mut net = Network::new();
        net.add_object(ObjectId(5), profile(&[7, 3], &[], &[])).unwrap();
        net.add_object(ObjectId(3), SocialProfile::default()).unwrap();
        net.add_object(ObjectId(7), SocialProfile::default()).unwrap();
        net.add_object(ObjectId(8), SocialProfile::default()).unwrap();
        net.validate().unwrap();
        assert_eq!(net.neighbors_of(ObjectId(5)).unwrap(), vec![ObjectId(3), ObjectId(7)]);
        assert_eq!(net.neighbors_of(ObjectId(8)).unwrap(), vec![]);
        assert_eq!(net.neighbors_of(ObjectId(99)), Err(GraphError::UnknownObject(ObjectId(99))));
    }

    #[test]
    fn similarity_composes_the_three_metrics() {
        // Communities 1/3, friendships 1/2, co-work 2/sqrt(8); mean is the
        // social-similarity feature.
        let mut net = Network::new();
        net.add_object(ObjectId(1), profile(&[11, 12, 13], &[1, 2], &[1, 2, 3, 4])).unwrap();
        net.add_object(ObjectId(2), profile(&[12, 13, 14], &[2, 3], &[1, 2])).unwrap();
        for id in [11, 12, 13, 14] {
            let _ = net.add_object(ObjectId(id), SocialProfile::default());
        }
        net.validate().unwrap();
        let sim = net.similarity_features(ObjectId(1), ObjectId(2)).unwrap().unwrap();
        assert!((sim.get() - 0.513480038).abs() < 1e-9);
        let swapped = net.similarity_features(ObjectId(2), ObjectId(1)).unwrap().unwrap();
        assert_eq!(sim.get().to_bits(), swapped.get().to_bits());
    }

    #[test]
    fn similarity_is_absent_without_data_and_errors_on_self() {
        let mut net = Network::new();
        net.add_object(ObjectId(1), SocialProfile::default()).unwrap();
        net.add_object(ObjectId(2), SocialProfile::default()).unwrap();
        assert_eq!(net.similarity_features(ObjectId(1), ObjectId(2)), Ok(None));
        assert_eq!(
            net.similarity_features(ObjectId(1), ObjectId(1)),
            Err(GraphError::SelfSimilarity(ObjectId(1)))
        );
    }

    #[test]
    fn partial_data_shrinks_the_mean_divisor() {
        // Only communities populated on both sides: the feature equals the
        // community similarity alone.
        let mut net = Network::new();
        net.add_object(ObjectId(1), profile(&[], &[1, 2, 3], &[1])).unwrap();
        net.add_object(ObjectId(2), profile(&[], &[1, 2, 3, 4, 5], &[])).unwrap();
        let sim = net.similarity_features(ObjectId(1), ObjectId(2)).unwrap().unwrap();
        assert!((sim.get() - 0.6).abs() < 1e-9);
    }
}
