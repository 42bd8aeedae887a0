//! Problem data model: side-information sets, request sets, generators and
//! the JSON instance file.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PicodError, Result};

/// Largest supported message count (sets are stored as `u64` bitmasks).
pub const MAX_MESSAGES: usize = 63;

/// A subset of the messages, bit `k` standing for message `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct MessageSet(pub u64);

impl MessageSet {
    pub const EMPTY: MessageSet = MessageSet(0);

    /// The set `{1..m}`.
    pub fn full(m: usize) -> Self {
        debug_assert!(m <= MAX_MESSAGES);
        MessageSet((1u64 << m) - 1)
    }

    pub fn singleton(msg: usize) -> Self {
        MessageSet(1u64 << msg)
    }

    /// Builds a set from 0-based message indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        MessageSet(it.into_iter().fold(0u64, |acc, k| acc | (1u64 << k)))
    }

    /// Builds a set from 1-based message labels, as in `{1, 2}`.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self::from_indices(labels.iter().map(|&l| l - 1))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, msg: usize) -> bool {
        msg < 64 && self.0 >> msg & 1 == 1
    }

    pub fn insert(self, msg: usize) -> Self {
        MessageSet(self.0 | (1u64 << msg))
    }

    pub fn union(self, other: Self) -> Self {
        MessageSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        MessageSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        MessageSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Self) -> bool {
        self.is_subset(other) && self != other
    }

    /// Complement within `{1..m}`.
    pub fn complement(self, m: usize) -> Self {
        MessageSet(!self.0 & Self::full(m).0)
    }

    /// 0-based message indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k)
            }
        })
    }

    /// 1-based labels in ascending order.
    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|k| k + 1).collect()
    }

    /// Canonical order: by size, then lexicographically on the sorted labels.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl fmt::Display for MessageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        write!(f, "{{")?;
        for (i, l) in self.labels().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// The messages a client may be served: the complement of its side information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestSet {
    pub client: usize,
    pub messages: MessageSet,
}

/// A PICOD problem: `m` messages and a duplicate-free list of proper
/// side-information sets. Immutable once built.
#[derive(Debug, Clone)]
pub struct PicodInstance {
    m: usize,
    clients: Vec<MessageSet>,
    index: HashMap<MessageSet, usize>,
}

impl PartialEq for PicodInstance {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.clients == other.clients
    }
}

impl Eq for PicodInstance {}

/// Result of [`PicodInstance::load`]: the instance plus the duplicate client
/// sets that were collapsed on the way in.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: PicodInstance,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: i64,
    clients: Vec<Vec<i64>>,
}

impl PicodInstance {
    /// Builds an instance, rejecting duplicate side-information sets.
    pub fn new(m: usize, clients: Vec<MessageSet>) -> Result<Self> {
        Self::check_m(m)?;
        if clients.is_empty() {
            return Err(PicodError::InvalidInstance(
                "at least one client is required".into(),
            ));
        }
        let full = MessageSet::full(m);
        let mut index = HashMap::with_capacity(clients.len());
        for (i, &s) in clients.iter().enumerate() {
            if !s.is_subset(full) {
                return Err(PicodError::InvalidInstance(format!(
                    "client {} has messages outside 1..={m}",
                    i + 1
                )));
            }
            if s == full {
                return Err(PicodError::InvalidInstance(format!(
                    "client {} knows every message",
                    i + 1
                )));
            }
            if let Some(prev) = index.insert(s, i) {
                return Err(PicodError::InvalidInstance(format!(
                    "clients {} and {} share side information {s}",
                    prev + 1,
                    i + 1
                )));
            }
        }
        Ok(PicodInstance { m, clients, index })
    }

    /// Like [`PicodInstance::new`] but collapses duplicates, keeping the first
    /// occurrence.
    pub fn new_dedup(m: usize, clients: Vec<MessageSet>) -> Result<Loaded> {
        let mut seen: HashMap<MessageSet, usize> = HashMap::new();
        let mut kept = Vec::with_capacity(clients.len());
        let mut warnings = Vec::new();
        for (i, s) in clients.into_iter().enumerate() {
            match seen.get(&s) {
                Some(&first) => warnings.push(format!(
                    "duplicate side-information set {s} (entry {} repeats entry {}); collapsed",
                    i + 1,
                    first + 1
                )),
                None => {
                    seen.insert(s, i);
                    kept.push(s);
                }
            }
        }
        Ok(Loaded {
            instance: Self::new(m, kept)?,
            warnings,
        })
    }

    fn check_m(m: usize) -> Result<()> {
        if m < 1 {
            return Err(PicodError::InvalidInstance("m must be at least 1".into()));
        }
        if m > MAX_MESSAGES {
            return Err(PicodError::InvalidInstance(format!(
                "m = {m} exceeds the supported maximum {MAX_MESSAGES}"
            )));
        }
        Ok(())
    }

    /// Parses the JSON instance format `{"m": 4, "clients": [[1,2],[3]]}`.
    pub fn load(bytes: &[u8]) -> Result<Loaded> {
        let file: InstanceFile =
            serde_json::from_slice(bytes).map_err(|e| PicodError::Malformed(e.to_string()))?;
        if file.m < 1 {
            return Err(PicodError::InvalidInstance("m must be at least 1".into()));
        }
        let m = file.m as usize;
        Self::check_m(m)?;
        let mut sets = Vec::with_capacity(file.clients.len());
        for labels in &file.clients {
            let mut s = MessageSet::EMPTY;
            for &l in labels {
                if l < 1 || l as usize > m {
                    return Err(PicodError::IndexOutOfRange {
                        index: l.max(0) as usize,
                        max: m,
                    });
                }
                s = s.insert(l as usize - 1);
            }
            if s == MessageSet::full(m) {
                return Err(PicodError::InvalidInstance(format!(
                    "side-information set {s} contains every message"
                )));
            }
            sets.push(s);
        }
        Self::new_dedup(m, sets)
    }

    /// Serializes with sorted sets; client order is preserved because client
    /// indices are referenced by witnesses and reports.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            m: self.m as i64,
            clients: self
                .clients
                .iter()
                .map(|s| s.labels().into_iter().map(|l| l as i64).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("instance serialization")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.clients.len()
    }

    pub fn clients(&self) -> &[MessageSet] {
        &self.clients
    }

    pub fn client(&self, i: usize) -> Result<MessageSet> {
        self.clients
            .get(i)
            .copied()
            .ok_or(PicodError::IndexOutOfRange {
                index: i + 1,
                max: self.n(),
            })
    }

    pub fn full_set(&self) -> MessageSet {
        MessageSet::full(self.m)
    }

    /// Client index whose side information equals `s`, if any.
    pub fn client_index(&self, s: MessageSet) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn request_set(&self, i: usize) -> Result<RequestSet> {
        let s = self.client(i)?;
        Ok(RequestSet {
            client: i,
            messages: s.complement(self.m),
        })
    }

    /// Whether `s` is some client's side information. The full set is neither
    /// present nor absent and is rejected.
    pub fn is_present(&self, s: MessageSet) -> Result<bool> {
        let full = self.full_set();
        if !s.is_subset(full) {
            return Err(PicodError::InvalidArgument(format!(
                "{s} is not a subset of 1..={}",
                self.m
            )));
        }
        if s == full {
            return Err(PicodError::InvalidArgument(
                "the full message set is neither present nor absent".into(),
            ));
        }
        Ok(self.index.contains_key(&s))
    }

    /// Largest number of request sets containing a single message.
    pub fn delta(&self) -> usize {
        (0..self.m)
            .map(|j| self.clients.iter().filter(|s| !s.contains(j)).count())
            .max()
            .unwrap_or(0)
    }

    /// Union of all side-information sets.
    pub fn union_of_clients(&self) -> MessageSet {
        self.clients
            .iter()
            .fold(MessageSet::EMPTY, |acc, &s| acc.union(s))
    }
}

impl fmt::Display for PicodInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} [", self.m)?;
        for (i, s) in self.clients.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

fn canonical(mut sets: Vec<MessageSet>) -> Vec<MessageSet> {
    sets.sort_by(MessageSet::canonical_cmp);
    sets
}

/// All subsets of `{1..m}` whose size lies in `sigma`.
pub fn complete_sigma(m: usize, sigma: &[usize]) -> Result<PicodInstance> {
    if sigma.is_empty() {
        return Err(PicodError::InvalidArgument(
            "sigma must be non-empty".into(),
        ));
    }
    if let Some(&bad) = sigma.iter().find(|&&s| s >= m) {
        return Err(PicodError::InvalidArgument(format!(
            "sigma entry {bad} is not in 0..={}",
            m.saturating_sub(1)
        )));
    }
    if m > 24 {
        return Err(PicodError::BudgetExceeded {
            what: "complete-sigma generation (2^m subsets)",
            needed: m as u128,
            limit: 24,
        });
    }
    let sets = (0..(1u64 << m))
        .map(MessageSet)
        .filter(|s| sigma.contains(&s.len()))
        .collect();
    PicodInstance::new(m, canonical(sets))
}

/// Instance whose request sets are exactly the blocks of a chain of
/// successively refined partitions of some `A ⊆ {1..m}`.
pub fn partition_class_instance(m: usize, levels: &[Vec<MessageSet>]) -> Result<PicodInstance> {
    PicodInstance::check_m(m)?;
    let first = levels
        .first()
        .ok_or_else(|| PicodError::InvalidArgument("at least one level is required".into()))?;
    let a = first.iter().fold(MessageSet::EMPTY, |acc, &b| acc.union(b));
    if !a.is_subset(MessageSet::full(m)) {
        return Err(PicodError::InvalidArgument(format!(
            "blocks use messages outside 1..={m}"
        )));
    }
    for (li, level) in levels.iter().enumerate() {
        let mut covered = MessageSet::EMPTY;
        for &b in level {
            if b.is_empty() {
                return Err(PicodError::InvalidArgument(format!(
                    "level {} has an empty block",
                    li + 1
                )));
            }
            if !covered.intersection(b).is_empty() {
                return Err(PicodError::InvalidArgument(format!(
                    "level {} blocks overlap",
                    li + 1
                )));
            }
            covered = covered.union(b);
        }
        if covered != a {
            return Err(PicodError::InvalidArgument(format!(
                "level {} does not partition {a}",
                li + 1
            )));
        }
    }
    for (li, pair) in levels.windows(2).enumerate() {
        let (coarse, fine) = (&pair[0], &pair[1]);
        for &b in coarse {
            let parts = fine.iter().filter(|f| f.is_subset(b)).count();
            let straddle = fine
                .iter()
                .any(|f| !f.intersection(b).is_empty() && !f.is_subset(b));
            if straddle {
                return Err(PicodError::InvalidArgument(format!(
                    "level {} does not refine block {b} of level {}",
                    li + 2,
                    li + 1
                )));
            }
            if parts < 2 {
                return Err(PicodError::InvalidArgument(format!(
                    "block {b} of level {} is not split at level {} (trivial refinement)",
                    li + 1,
                    li + 2
                )));
            }
        }
    }
    let sets = levels.iter().flatten().map(|b| b.complement(m)).collect();
    PicodInstance::new(m, canonical(sets))
}

/// `n` distinct uniformly drawn proper subsets of `{1..m}`, deterministic in
/// `seed`.
pub fn random_instance(m: usize, n: usize, seed: u64) -> Result<PicodInstance> {
    PicodInstance::check_m(m)?;
    let proper = (1u128 << m) - 1;
    if n < 1 || n as u128 > proper {
        return Err(PicodError::InvalidArgument(format!(
            "n = {n} must lie in 1..={proper} for m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // masks 0..2^m-2 are exactly the proper subsets
    let sets = sample(&mut rng, proper as usize, n)
        .into_iter()
        .map(|k| MessageSet(k as u64))
        .collect();
    PicodInstance::new(m, canonical(sets))
}

/// Named instances shipped with the tool.
pub mod builtin {
    use super::*;

    pub const NAMES: [&str; 3] = ["example2", "lemma1-demo", "singletons-3"];

    /// Four messages, eleven clients; nesting number and optimal length are both 3.
    pub fn example2() -> PicodInstance {
        let sets: [&[usize]; 11] = [
            &[],
            &[1, 2],
            &[3],
            &[1, 4],
            &[1, 2, 3],
            &[1, 2, 4],
            &[1, 3, 4],
            &[2],
            &[2, 4],
            &[2, 3],
            &[1, 3],
        ];
        PicodInstance::new(4, sets.iter().map(|l| MessageSet::from_labels(l)).collect())
            .expect("builtin instance")
    }

    /// Request sets `{1,2,3,4}`, `{1,2}`, `{3,4}`: two refinement levels.
    pub fn partition_demo() -> PicodInstance {
        partition_class_instance(
            4,
            &[
                vec![MessageSet::from_labels(&[1, 2, 3, 4])],
                vec![
                    MessageSet::from_labels(&[1, 2]),
                    MessageSet::from_labels(&[3, 4]),
                ],
            ],
        )
        .expect("builtin instance")
    }

    /// Three messages, clients `{1}`, `{2}`, `{3}`.
    pub fn singletons_3() -> PicodInstance {
        PicodInstance::new(3, (0..3).map(MessageSet::singleton).collect())
            .expect("builtin instance")
    }

    pub fn by_name(name: &str) -> Option<PicodInstance> {
        match name {
            "example2" => Some(example2()),
            "lemma1-demo" | "partition-demo" => Some(partition_demo()),
            "singletons-3" => Some(singletons_3()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    fn set(l: &[usize]) -> MessageSet {
        MessageSet::from_labels(l)
    }

    #[test]
    fn load_basic() {
        let l = PicodInstance::load(br#"{"m":4,"clients":[[],[1,2],[3]]}"#).unwrap();
        assert_eq!(l.instance.n(), 3);
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn load_rejects_full_set() {
        let e = PicodInstance::load(br#"{"m":2,"clients":[[1,2]]}"#).unwrap_err();
        assert!(matches!(e, PicodError::InvalidInstance(_)));
    }

    #[test]
    fn load_collapses_duplicates() {
        let l = PicodInstance::load(br#"{"m":3,"clients":[[1],[1]]}"#).unwrap();
        assert_eq!(l.instance.n(), 1);
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            PicodInstance::load(br#"{"m":3,"clients":[[4]]}"#),
            Err(PicodError::IndexOutOfRange { index: 4, max: 3 })
        ));
        assert!(matches!(
            PicodInstance::load(br#"{"m":3,"clients":[[0]]}"#),
            Err(PicodError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            PicodInstance::load(br#"{"m":0,"clients":[[]]}"#),
            Err(PicodError::InvalidInstance(_))
        ));
        assert!(matches!(
            PicodInstance::load(b"{\"m\":3,"),
            Err(PicodError::Malformed(_))
        ));
        assert!(PicodInstance::load(br#"{"m":3,"clients":[]}"#).is_err());
    }

    #[test]
    fn load_accepts_unsorted_sets() {
        let l = PicodInstance::load(br#"{"m":4,"clients":[[3,1,3]]}"#).unwrap();
        assert_eq!(l.instance.clients()[0], set(&[1, 3]));
        assert_eq!(l.instance.to_json(), r#"{"m":4,"clients":[[1,3]]}"#);
    }

    #[test]
    fn request_sets() {
        let ex = example2();
        assert_eq!(ex.request_set(1).unwrap().messages, set(&[3, 4]));
        assert_eq!(ex.request_set(0).unwrap().messages, set(&[1, 2, 3, 4]));
        assert_eq!(ex.request_set(4).unwrap().messages, set(&[4]));
        assert!(matches!(
            ex.request_set(11),
            Err(PicodError::IndexOutOfRange { index: 12, max: 11 })
        ));
    }

    #[test]
    fn presence() {
        let ex = example2();
        assert!(ex.is_present(set(&[3])).unwrap());
        assert!(!ex.is_present(set(&[4])).unwrap());
        assert!(ex.is_present(set(&[1, 2, 3, 4])).is_err());
    }

    #[test]
    fn delta_values() {
        assert_eq!(example2().delta(), 7);
        let single = PicodInstance::new(5, vec![set(&[2, 3])]).unwrap();
        assert_eq!(single.delta(), 1);
        assert_eq!(partition_demo().delta(), 2);
    }

    #[test]
    fn complete_sigma_counts() {
        assert_eq!(complete_sigma(3, &[0, 1, 2]).unwrap().n(), 7);
        let singles = complete_sigma(4, &[1]).unwrap();
        assert_eq!(singles.n(), 4);
        assert!(singles.clients().iter().all(|s| s.len() == 1));
        assert_eq!(complete_sigma(4, &[0, 2]).unwrap().n(), 7);
        assert!(complete_sigma(4, &[]).is_err());
        assert!(complete_sigma(4, &[4]).is_err());
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn complete_sigma_delta_formula() {
        for m in 1..=4usize {
            for mask in 1u32..(1 << m) {
                let sigma: Vec<usize> = (0..m).filter(|s| mask >> s & 1 == 1).collect();
                let inst = complete_sigma(m, &sigma).unwrap();
                // clients missing a fixed message: C(m,s) - C(m-1,s-1)
                let formula: usize = sigma
                    .iter()
                    .map(|&s| binom(m, s) - if s == 0 { 0 } else { binom(m - 1, s - 1) })
                    .sum();
                assert_eq!(inst.delta(), formula, "m={m} sigma={sigma:?}");
            }
        }
    }

    #[test]
    fn partition_demo_clients() {
        let inst = partition_demo();
        let mut got: Vec<_> = inst.clients().to_vec();
        got.sort();
        let mut want = vec![set(&[]), set(&[3, 4]), set(&[1, 2])];
        want.sort();
        assert_eq!(got, want);

        let one = partition_class_instance(2, &[vec![set(&[1, 2])]]).unwrap();
        assert_eq!(one.clients(), &[set(&[])]);

        let trivial =
            partition_class_instance(4, &[vec![set(&[1, 2, 3, 4])], vec![set(&[1, 2, 3, 4])]]);
        assert!(trivial.is_err());

        let not_partition = partition_class_instance(4, &[vec![set(&[1, 2]), set(&[2, 3])]]);
        assert!(not_partition.is_err());
    }

    #[test]
    fn partition_every_message_in_l_request_sets() {
        let levels = vec![
            vec![set(&[1, 2, 3, 4, 5, 6])],
            vec![set(&[1, 2, 3]), set(&[4, 5, 6])],
            vec![set(&[1]), set(&[2, 3]), set(&[4]), set(&[5, 6])],
        ];
        let inst = partition_class_instance(7, &levels).unwrap();
        for j in 0..6 {
            let count = inst.clients().iter().filter(|s| !s.contains(j)).count();
            assert_eq!(count, 3);
        }
        assert_eq!(inst.delta(), 3);
    }

    #[test]
    fn random_instances() {
        let all = random_instance(3, 7, 99).unwrap();
        assert_eq!(all.n(), 7);
        assert_eq!(
            random_instance(4, 5, 1).unwrap(),
            random_instance(4, 5, 1).unwrap()
        );
        assert!(random_instance(2, 4, 0).is_err());
    }

    #[test]
    fn generators_emit_canonical_order() {
        let inst = complete_sigma(3, &[1, 2]).unwrap();
        let labels: Vec<_> = inst.clients().iter().map(|s| s.labels()).collect();
        assert_eq!(
            labels,
            vec![
                vec![1],
                vec![2],
                vec![3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = PicodInstance> {
            (1usize..=6).prop_flat_map(|m| {
                let proper = (1u64 << m) - 1;
                proptest::collection::btree_set(0..proper, 1..=(proper as usize).min(10)).prop_map(
                    move |sets| {
                        PicodInstance::new(m, sets.into_iter().map(MessageSet).collect()).unwrap()
                    },
                )
            })
        }

        proptest! {
            #[test]
            fn load_serialize_roundtrip(inst in instance()) {
                let back = PicodInstance::load(inst.to_json().as_bytes()).unwrap();
                prop_assert!(back.warnings.is_empty());
                prop_assert_eq!(back.instance, inst);
            }

            #[test]
            fn request_set_complements(inst in instance()) {
                let full = inst.full_set();
                for i in 0..inst.n() {
                    let s = inst.client(i).unwrap();
                    let r = inst.request_set(i).unwrap().messages;
                    prop_assert!(!r.is_empty());
                    prop_assert_eq!(s.union(r), full);
                    prop_assert!(s.intersection(r).is_empty());
                }
            }
        }
    }
}
