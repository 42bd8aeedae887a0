//! Decoding-chain bounds `tau1` and `tau2`.
//!
//! For a decoding choice `D` (one requested message per client), a chain adds
//! the messages one at a time starting from the empty set. At a prefix `T`
//! equal to a client's side information the next message is forced to be
//! `D(T)` and counts as a hit. At an absent prefix any message may follow and
//! counts nothing; the refined rules also allow adding `D(S)` for a present
//! `S ⊊ T` with `D(S) ∉ T`, which counts. Each bound is the minimum over `D`
//! of the maximum count over chains.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::Result;
use crate::instance::PicodInstance;

/// One requested message per client (0-based message indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandFunction {
    choices: Vec<usize>,
}

impl DemandFunction {
    /// `choices[i]` must lie outside client `i`'s side information.
    pub fn new(inst: &PicodInstance, choices: Vec<usize>) -> Option<Self> {
        let ok = choices.len() == inst.n()
            && choices
                .iter()
                .zip(inst.clients())
                .all(|(&d, s)| d < inst.m() && !s.contains(d));
        ok.then_some(DemandFunction { choices })
    }

    pub fn choice(&self, client: usize) -> usize {
        self.choices[client]
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }
}

impl Serialize for DemandFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<usize, usize> = self
            .choices
            .iter()
            .enumerate()
            .map(|(i, &d)| (i + 1, d + 1))
            .collect();
        map.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainRules {
    /// Rule A / Rule B.
    Basic,
    /// Rule A / Options B' and C'.
    Refined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauResult {
    pub value: usize,
    /// A minimizing decoding choice.
    pub witness: DemandFunction,
}

/// Lookup from subset bitmask to client index.
struct Lattice {
    m: usize,
    owner: Vec<Option<u32>>,
}

impl Lattice {
    fn new(inst: &PicodInstance) -> Self {
        let mut owner = vec![None; 1usize << inst.m()];
        for (i, s) in inst.clients().iter().enumerate() {
            owner[s.bits() as usize] = Some(i as u32);
        }
        Lattice { m: inst.m(), owner }
    }

    /// Longest-count chain from the empty set for a fixed demand.
    fn chain_value(&self, inst: &PicodInstance, demand: &[usize], rules: ChainRules) -> usize {
        let full = (1usize << self.m) - 1;
        let mut best = vec![0u8; full + 1];
        let present: Vec<(usize, usize)> = inst
            .clients()
            .iter()
            .zip(demand)
            .map(|(s, &d)| (s.bits() as usize, d))
            .collect();
        for t in (0..full).rev() {
            best[t] = match self.owner[t] {
                Some(c) => 1 + best[t | 1 << demand[c as usize]],
                None => {
                    let mut v = 0;
                    let mut free = !t & full;
                    while free != 0 {
                        let j = free.trailing_zeros() as usize;
                        free &= free - 1;
                        v = v.max(best[t | 1 << j]);
                    }
                    if rules == ChainRules::Refined {
                        for &(s, d) in &present {
                            if s & !t == 0 && s != t && t >> d & 1 == 0 {
                                v = v.max(1 + best[t | 1 << d]);
                            }
                        }
                    }
                    v
                }
            };
        }
        best[0] as usize
    }
}

/// Maximum chain count for one decoding choice.
pub fn chain_value(inst: &PicodInstance, demand: &DemandFunction, rules: ChainRules) -> usize {
    Lattice::new(inst).chain_value(inst, demand.choices(), rules)
}

fn tau(inst: &PicodInstance, rules: ChainRules, budget: &Budget) -> Result<TauResult> {
    let m = inst.m();
    budget.check_m("decoding-chain lattice (2^m states)", m)?;
    let requests: Vec<Vec<usize>> = inst
        .clients()
        .iter()
        .map(|s| s.complement(m).iter().collect())
        .collect();
    let total = requests
        .iter()
        .try_fold(1u128, |acc, r| acc.checked_mul(r.len() as u128))
        .unwrap_or(u128::MAX);
    Budget::check(
        "decoding choice functions",
        total,
        budget.max_demand_functions,
    )?;
    let lattice = Lattice::new(inst);
    let decode = |mut code: u128| -> Vec<usize> {
        requests
            .iter()
            .map(|r| {
                let k = (code % r.len() as u128) as usize;
                code /= r.len() as u128;
                r[k]
            })
            .collect()
    };
    let (value, code) = (0..total as u64)
        .into_par_iter()
        .map(|code| {
            let d = decode(code as u128);
            (lattice.chain_value(inst, &d, rules), code)
        })
        .min()
        .expect("at least one decoding choice");
    Ok(TauResult {
        value,
        witness: DemandFunction {
            choices: decode(code as u128),
        },
    })
}

/// `min_D max_C tau(C_D)` under the basic chain rules.
pub fn tau1(inst: &PicodInstance, budget: &Budget) -> Result<TauResult> {
    tau(inst, ChainRules::Basic, budget)
}

/// `min_D max_C tau'(C_D)` under the refined chain rules.
pub fn tau2(inst: &PicodInstance, budget: &Budget) -> Result<TauResult> {
    tau(inst, ChainRules::Refined, budget)
}
