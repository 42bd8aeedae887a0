//! Bounds from the structure of absent clients: proper subsets of the
//! messages that are nobody's side information.

use serde::Serialize;

use crate::budget::Budget;
use crate::error::Result;
use crate::instance::{MessageSet, PicodInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbsentChain {
    /// Longest strictly increasing chain of absent clients.
    pub length: usize,
    #[serde(serialize_with = "labels")]
    pub chain: Vec<MessageSet>,
    /// `m - length`.
    pub bound: usize,
}

fn labels<S: serde::Serializer>(v: &[MessageSet], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(|x| x.labels())
        .collect::<Vec<_>>()
        .serialize(s)
}

fn present_table(inst: &PicodInstance) -> Vec<bool> {
    let mut present = vec![false; 1usize << inst.m()];
    for s in inst.clients() {
        present[s.bits() as usize] = true;
    }
    present
}

/// `m - L` where `L` is the longest chain `A_1 ⊊ ... ⊊ A_L` of absent
/// clients. The full set never counts.
pub fn absent_chain_bound(inst: &PicodInstance, budget: &Budget) -> Result<AbsentChain> {
    let m = inst.m();
    budget.check_m("absent-client lattice (2^m subsets)", m)?;
    let full = (1usize << m) - 1;
    let present = present_table(inst);
    // longest[t]: longest absent chain using only subsets of t (t proper)
    let mut longest = vec![0u8; full];
    for t in 0..full {
        let inner = MessageSet(t as u64)
            .iter()
            .map(|i| longest[t & !(1 << i)])
            .max()
            .unwrap_or(0);
        longest[t] = inner + u8::from(!present[t]);
    }
    let top = (0..m)
        .map(|i| full & !(1 << i))
        .max_by_key(|&t| (longest[t], std::cmp::Reverse(t)))
        .expect("m >= 1");
    let mut chain = Vec::new();
    let mut t = top;
    while longest[t] > 0 {
        if !present[t] {
            chain.push(MessageSet(t as u64));
        }
        if t == 0 {
            break;
        }
        t = MessageSet(t as u64)
            .iter()
            .map(|i| t & !(1 << i))
            .max_by_key(|&s| (longest[s], std::cmp::Reverse(s)))
            .expect("non-empty set has a child");
    }
    chain.reverse();
    let length = longest[top] as usize;
    debug_assert_eq!(chain.len(), length);
    Ok(AbsentChain {
        length,
        chain,
        bound: m - length,
    })
}

/// `m - 1` when the absent clients do not jointly cover every message.
pub fn absent_union_bound(inst: &PicodInstance, budget: &Budget) -> Result<Option<usize>> {
    let m = inst.m();
    budget.check_m("absent-client lattice (2^m subsets)", m)?;
    let full = (1u64 << m) - 1;
    let present = present_table(inst);
    let union = (0..full)
        .filter(|&t| !present[t as usize])
        .fold(0u64, |acc, t| acc | t);
    Ok((union != full).then(|| m - 1))
}

/// Number of nested pairs `A ⊊ B` of absent clients, counted up to `cap`.
fn nested_absent_pairs(inst: &PicodInstance, cap: usize) -> usize {
    let m = inst.m();
    let full = (1usize << m) - 1;
    let present = present_table(inst);
    let mut count = 0;
    for b in 0..full {
        if present[b] {
            continue;
        }
        // proper submasks of b, including the empty set
        let mut a = b;
        while a != 0 {
            a = (a - 1) & b;
            if !present[a] {
                count += 1;
                if count >= cap {
                    return count;
                }
            }
        }
    }
    count
}

/// `m - 1` when at most one pair of absent clients is nested.
pub fn nested_absent_pair_bound(inst: &PicodInstance, budget: &Budget) -> Result<Option<usize>> {
    budget.check_m("absent-client lattice (2^m subsets)", inst.m())?;
    Ok((nested_absent_pairs(inst, 2) <= 1).then(|| inst.m() - 1))
}

/// `m - 1` if either absent-client structure condition holds.
pub fn structural_m_minus_1(inst: &PicodInstance, budget: &Budget) -> Result<Option<usize>> {
    Ok(absent_union_bound(inst, budget)?.or(nested_absent_pair_bound(inst, budget)?))
}
