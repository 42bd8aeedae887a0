//! Nested collections: validation, the greedy rooted construction and the
//! exact nesting number.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{PicodError, Result};
use crate::instance::{MessageSet, PicodInstance};

/// Ordered levels of client indices (0-based). Serialized with 1-based
/// client indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedCollection {
    levels: Vec<Vec<usize>>,
}

impl NestedCollection {
    /// Levels are sets: repeated indices within a level are dropped, keeping
    /// the first occurrence.
    pub fn new(levels: Vec<Vec<usize>>) -> Self {
        let levels = levels
            .into_iter()
            .map(|level| {
                let mut seen = HashSet::new();
                level.into_iter().filter(|c| seen.insert(*c)).collect()
            })
            .collect();
        NestedCollection { levels }
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Nesting length `L`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl Serialize for NestedCollection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<Vec<usize>> = self
            .levels
            .iter()
            .map(|l| l.iter().map(|c| c + 1).collect())
            .collect();
        one_based.serialize(s)
    }
}

/// Checks the coverage property: every `S` at level `i` extended by any
/// missing message is contained in some set at level `i + 1`. Empty
/// collections and empty levels are rejected as degenerate.
pub fn validate_nested_collection(inst: &PicodInstance, nc: &NestedCollection) -> Result<bool> {
    for level in nc.levels() {
        for &c in level {
            inst.client(c)?;
        }
    }
    if nc.is_empty() || nc.levels().iter().any(Vec::is_empty) {
        return Ok(false);
    }
    let m = inst.m();
    for pair in nc.levels().windows(2) {
        let next: Vec<MessageSet> = pair[1].iter().map(|&c| inst.clients()[c]).collect();
        for &c in &pair[0] {
            let s = inst.clients()[c];
            for j in s.complement(m).iter() {
                let need = s.insert(j);
                if !next.iter().any(|t| need.is_subset(*t)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Output of one rooted greedy construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootedCollection {
    /// Root client, 0-based.
    #[serde(serialize_with = "one_based")]
    pub root: usize,
    pub collection: NestedCollection,
    /// Nesting length reached (`lambda`).
    pub lambda: usize,
    /// The `(client, message)` pair with no containing client that ended
    /// the construction.
    #[serde(serialize_with = "one_based_pair")]
    pub stopped_at: (usize, usize),
}

fn one_based<S: serde::Serializer>(v: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    (v + 1).serialize(s)
}

fn one_based_pair<S: serde::Serializer>(
    v: &(usize, usize),
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    (v.0 + 1, v.1 + 1).serialize(s)
}

/// Clients ordered by (size, index): the first containing client found in
/// this order is a smallest one with the lowest index.
fn by_size(inst: &PicodInstance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by_key(|&c| (inst.clients()[c].len(), c));
    order
}

fn rooted(inst: &PicodInstance, root: usize, order: &[usize]) -> RootedCollection {
    let m = inst.m();
    let clients = inst.clients();
    let mut levels: Vec<Vec<usize>> = vec![vec![root]];
    loop {
        let current = levels.last().expect("at least the root level");
        let mut next: Vec<usize> = Vec::new();
        for &c in current {
            let s = clients[c];
            for j in s.complement(m).iter() {
                let need = s.insert(j);
                match order.iter().find(|&&t| need.is_subset(clients[t])) {
                    Some(&t) => {
                        if !next.contains(&t) {
                            next.push(t);
                        }
                    }
                    None => {
                        let lambda = levels.len();
                        return RootedCollection {
                            root,
                            collection: NestedCollection { levels },
                            lambda,
                            stopped_at: (c, j),
                        };
                    }
                }
            }
        }
        levels.push(next);
    }
}

/// Greedy nested collection rooted at client `root`: each level takes, for
/// every set `S` in the previous level and every `j` outside it, a smallest
/// client containing `S ∪ {j}` (lowest index on ties), and the construction
/// stops at the first `(S, j)` with no such client.
pub fn greedy_rooted_collection(inst: &PicodInstance, root: usize) -> Result<RootedCollection> {
    inst.client(root)?;
    Ok(rooted(inst, root, &by_size(inst)))
}

/// Best greedy collection over all roots; ties go to the lowest root.
/// Polynomial: `O(m^3 n^2)` for the full sweep.
pub fn eta_lower_bound(inst: &PicodInstance) -> RootedCollection {
    let order = by_size(inst);
    (0..inst.n())
        .into_par_iter()
        .map(|root| rooted(inst, root, &order))
        .reduce_with(|a, b| {
            if b.lambda > a.lambda || (b.lambda == a.lambda && b.root < a.root) {
                b
            } else {
                a
            }
        })
        .expect("instances have at least one client")
}

/// Exact nesting number with a maximum-length witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaExact {
    pub eta: usize,
    pub witness: NestedCollection,
}

struct EtaSearch<'a> {
    inst: &'a PicodInstance,
    memo: HashMap<u64, (usize, u64)>,
}

impl EtaSearch<'_> {
    /// Coverage constraints of a level: for each `(S, j)` the bitmask of
    /// clients containing `S ∪ {j}`. `None` when some pair has no candidate.
    fn constraints(&self, family: u64) -> Option<Vec<u64>> {
        let m = self.inst.m();
        let clients = self.inst.clients();
        let mut out: Vec<u64> = Vec::new();
        for c in bits(family) {
            let s = clients[c];
            for j in s.complement(m).iter() {
                let need = s.insert(j);
                let cand = clients
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| need.is_subset(**t))
                    .fold(0u64, |acc, (k, _)| acc | 1 << k);
                if cand == 0 {
                    return None;
                }
                out.push(cand);
            }
        }
        out.sort_unstable();
        out.dedup();
        // a constraint implied by a smaller one (subset of candidates) is redundant
        let reduced: Vec<u64> = out
            .iter()
            .copied()
            .filter(|&c| !out.iter().any(|&d| d != c && d & !c == 0))
            .collect();
        Some(reduced)
    }

    /// Longest collection whose first level is `family`; returns the length
    /// and the chosen next level (0 when the collection ends here).
    fn best(&mut self, family: u64) -> (usize, u64) {
        if let Some(&v) = self.memo.get(&family) {
            return v;
        }
        let result = match self.constraints(family) {
            None => (1, 0),
            Some(cons) => {
                // The optimum over all covering next levels is attained at a
                // minimal cover: dropping sets from a level never breaks the
                // coverage owed by that level.
                let mut covers = HashSet::new();
                minimal_hitting_sets(&cons, 0, &mut covers);
                let mut covers: Vec<u64> = covers.into_iter().collect();
                covers.sort_unstable();
                let mut best = (1, 0);
                for g in covers {
                    let len = 1 + self.best(g).0;
                    if len > best.0 {
                        best = (len, g);
                    }
                }
                best
            }
        };
        self.memo.insert(family, result);
        result
    }
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    MessageSet(mask).iter()
}

fn minimal_hitting_sets(cons: &[u64], chosen: u64, out: &mut HashSet<u64>) {
    match cons.iter().find(|&&c| c & chosen == 0) {
        None => {
            let minimal = bits(chosen).all(|b| {
                let without = chosen & !(1 << b);
                cons.iter().any(|&c| c & without == 0)
            });
            if minimal {
                out.insert(chosen);
            }
        }
        Some(&c) => {
            for b in bits(c) {
                minimal_hitting_sets(cons, chosen | 1 << b, out);
            }
        }
    }
}

/// Exact nesting number by search over successor choices, rooted at each
/// single client. Restricting the first level to one client loses nothing:
/// any nested collection can be trimmed to a singleton first level with the
/// same length.
pub fn eta_exact(inst: &PicodInstance, budget: &Budget) -> Result<EtaExact> {
    let n = inst.n();
    Budget::check(
        "exact nesting number (clients)",
        n as u128,
        budget.max_eta_clients.min(64) as u128,
    )?;
    Budget::check(
        "exact nesting number (messages)",
        inst.m() as u128,
        budget.max_eta_m as u128,
    )?;
    let mut search = EtaSearch {
        inst,
        memo: HashMap::new(),
    };
    let mut best: Option<(usize, usize)> = None;
    for root in 0..n {
        let (len, _) = search.best(1 << root);
        if best.is_none_or(|(l, _)| len > l) {
            best = Some((len, root));
        }
    }
    let (eta, root) = best.ok_or_else(|| PicodError::InvalidInstance("no clients".into()))?;
    let mut levels = Vec::with_capacity(eta);
    let mut family = 1u64 << root;
    while family != 0 {
        levels.push(bits(family).collect());
        family = search.best(family).1;
    }
    debug_assert_eq!(levels.len(), eta);
    Ok(EtaExact {
        eta,
        witness: NestedCollection { levels },
    })
}
