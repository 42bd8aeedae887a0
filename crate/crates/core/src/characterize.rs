//! Closed-form answers for instances with at most three clients, and a sweep
//! that checks them against the brute-force solvers.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::absent::absent_chain_bound;
use crate::bounds::nested::{eta_exact, validate_nested_collection, NestedCollection};
use crate::bounds::tau::{tau1, tau2};
use crate::budget::Budget;
use crate::error::{PicodError, Result};
use crate::exact::exact_linear_beta;
use crate::gflin::{combinations, PrimeField};
use crate::instance::{complete_sigma, MessageSet, PicodInstance};
use crate::schemes::LinearScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseLabel {
    /// One or two clients.
    AtMostTwo,
    /// Some message is outside every side-information set.
    UncoveredMessage,
    /// `S_i \ (S_j ∪ S_k)` and `(S_j ∩ S_k) \ S_i` both non-empty for some
    /// ordering of the clients.
    PrivatePlusShared,
    /// Every `(S_i ∩ S_j) \ S_k` is non-empty.
    PairwiseShared,
    /// A nested collection of length two exists.
    NestedPair,
    /// None of the above.
    Residual,
}

impl CaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::AtMostTwo => "n<=2",
            CaseLabel::UncoveredMessage => "3-1",
            CaseLabel::PrivatePlusShared => "3-2a",
            CaseLabel::PairwiseShared => "3-2b",
            CaseLabel::NestedPair => "3-4",
            CaseLabel::Residual => "3-5",
        }
    }

    /// Closed-form values for the case.
    pub fn values(self) -> SmallValues {
        match self {
            CaseLabel::NestedPair => SmallValues::new(2, 2, 2, 2),
            CaseLabel::Residual => SmallValues::new(2, 2, 1, 1),
            _ => SmallValues::new(1, 1, 1, 1),
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallValues {
    pub beta: usize,
    pub tau2: usize,
    pub tau1: usize,
    pub eta: usize,
}

impl SmallValues {
    pub fn new(beta: usize, tau2: usize, tau1: usize, eta: usize) -> Self {
        SmallValues {
            beta,
            tau2,
            tau1,
            eta,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallCaseResult {
    pub case_label: CaseLabel,
    #[serde(flatten)]
    pub values: SmallValues,
    /// A scheme of length `beta` over `F_2` (all coefficients are 0 or 1,
    /// so it is valid over every field).
    pub scheme: LinearScheme,
    /// A nested collection of length `eta`.
    pub nested: NestedCollection,
}

fn first(s: MessageSet) -> Option<usize> {
    s.iter().next()
}

fn unit(m: usize, j: usize) -> Vec<u64> {
    (0..m).map(|k| u64::from(k == j)).collect()
}

fn sum_of(m: usize, msgs: &[usize]) -> Vec<u64> {
    (0..m).map(|k| u64::from(msgs.contains(&k))).collect()
}

/// One transmission satisfying two distinct clients `a` and `b`.
fn pair_row(m: usize, a: MessageSet, b: MessageSet) -> Vec<u64> {
    match (first(a.difference(b)), first(b.difference(a))) {
        (Some(x), Some(y)) => sum_of(m, &[x, y]),
        // nested: anything outside the larger set serves both
        _ => unit(m, first(a.union(b).complement(m)).expect("proper subsets")),
    }
}

const ORDERINGS: [[usize; 3]; 3] = [[0, 1, 2], [1, 0, 2], [2, 0, 1]];

fn private_plus_shared(s: &[MessageSet]) -> Option<(usize, usize)> {
    ORDERINGS.iter().find_map(|&[i, j, k]| {
        let x = first(s[i].difference(s[j].union(s[k])))?;
        let y = first(s[j].intersection(s[k]).difference(s[i]))?;
        Some((x, y))
    })
}

/// `d[k]` in `(S_i ∩ S_j) \ S_k` for each `k`.
fn pairwise_shared(s: &[MessageSet]) -> Option<[usize; 3]> {
    let pick = |[k, i, j]: [usize; 3]| first(s[i].intersection(s[j]).difference(s[k]));
    Some([
        pick(ORDERINGS[0])?,
        pick(ORDERINGS[1])?,
        pick(ORDERINGS[2])?,
    ])
}

/// Level `{S_i}` then `{S_j, S_k}`, for the first `i` strictly inside both
/// others whose collection validates.
fn nested_pair(inst: &PicodInstance) -> Option<(usize, NestedCollection)> {
    let s = inst.clients();
    ORDERINGS.iter().find_map(|&[i, j, k]| {
        if !(s[i].is_proper_subset(s[j]) && s[i].is_proper_subset(s[k])) {
            return None;
        }
        let nc = NestedCollection::new(vec![vec![i], vec![j, k]]);
        validate_nested_collection(inst, &nc)
            .expect("indices in range")
            .then_some((i, nc))
    })
}

/// Closed-form values, case label and witnesses for `n <= 3`.
pub fn characterize_small(inst: &PicodInstance) -> Result<SmallCaseResult> {
    let m = inst.m();
    let s = inst.clients();
    let single = NestedCollection::new(vec![vec![0]]);
    let build = |label: CaseLabel, rows: Vec<Vec<u64>>, nested: NestedCollection| {
        Ok(SmallCaseResult {
            case_label: label,
            values: label.values(),
            scheme: LinearScheme::from_rows(PrimeField::GF2, m, &rows)?,
            nested,
        })
    };
    match s.len() {
        1 => {
            let j = first(s[0].complement(m)).expect("proper subset");
            return build(CaseLabel::AtMostTwo, vec![unit(m, j)], single);
        }
        2 => return build(CaseLabel::AtMostTwo, vec![pair_row(m, s[0], s[1])], single),
        3 => {}
        n => {
            return Err(PicodError::InvalidArgument(format!(
                "closed forms cover at most 3 clients, got {n}"
            )))
        }
    }
    if let Some(j) = first(inst.union_of_clients().complement(m)) {
        return build(CaseLabel::UncoveredMessage, vec![unit(m, j)], single);
    }
    if let Some((x, y)) = private_plus_shared(s) {
        return build(
            CaseLabel::PrivatePlusShared,
            vec![sum_of(m, &[x, y])],
            single,
        );
    }
    if let Some(d) = pairwise_shared(s) {
        return build(CaseLabel::PairwiseShared, vec![sum_of(m, &d)], single);
    }
    if let Some((i, nc)) = nested_pair(inst) {
        let (j, k) = (nc.levels()[1][0], nc.levels()[1][1]);
        let t = first(s[i].complement(m)).expect("proper subset");
        let rows = vec![pair_row(m, s[j], s[k]), unit(m, t)];
        return build(CaseLabel::NestedPair, rows, nc);
    }
    let t = first(s[2].complement(m)).expect("proper subset");
    let rows = vec![pair_row(m, s[0], s[1]), unit(m, t)];
    build(CaseLabel::Residual, rows, single)
}

/// Every instance with exactly `n` distinct proper subsets of `m` messages,
/// clients in canonical order.
pub fn enumerate_small_instances(m: usize, n: usize) -> Result<Vec<PicodInstance>> {
    let mut sets: Vec<MessageSet> = (0..(1u64 << m) - 1).map(MessageSet).collect();
    sets.sort_by(MessageSet::canonical_cmp);
    combinations(sets.len(), n)
        .into_iter()
        .map(|c| PicodInstance::new(m, c.iter().map(|&k| sets[k]).collect()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComputedValues {
    pub eta: usize,
    pub tau1: usize,
    pub tau2: usize,
    /// Exact linear length per field size.
    pub beta_lin: BTreeMap<u8, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckEntry {
    pub instance: serde_json::Value,
    pub case_label: CaseLabel,
    #[serde(rename = "lemma_values")]
    pub closed_form_values: SmallValues,
    pub computed_values: ComputedValues,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub instances: usize,
    pub mismatches: usize,
    pub entries: Vec<CrosscheckEntry>,
}

fn crosscheck_one(
    inst: &PicodInstance,
    fields: &[PrimeField],
    budget: &Budget,
) -> Result<CrosscheckEntry> {
    let closed = characterize_small(inst)?;
    let mut beta_lin = BTreeMap::new();
    for &f in fields {
        let r = exact_linear_beta(inst, f, None, budget)?.expect("identity has length m");
        beta_lin.insert(f.q(), r.beta_lin);
    }
    let computed = ComputedValues {
        eta: eta_exact(inst, budget)?.eta,
        tau1: tau1(inst, budget)?.value,
        tau2: tau2(inst, budget)?.value,
        beta_lin,
    };
    let v = closed.values;
    let matches = computed.eta == v.eta
        && computed.tau1 == v.tau1
        && computed.tau2 == v.tau2
        && computed.beta_lin.values().all(|&b| b == v.beta);
    Ok(CrosscheckEntry {
        instance: serde_json::from_str(&inst.to_json()).expect("instance json"),
        case_label: closed.case_label,
        closed_form_values: v,
        computed_values: computed,
        matches,
    })
}

/// Compares the closed forms with the brute-force solvers on every instance
/// with `m <= m_max` and a client count in `ns` (each at most 3). Entries
/// are sorted by instance serialization.
pub fn crosscheck_small(
    m_max: usize,
    ns: &[usize],
    fields: &[PrimeField],
    budget: &Budget,
) -> Result<CrosscheckReport> {
    let mut instances = Vec::new();
    for m in 1..=m_max {
        for &n in ns {
            if n == 0 || n > 3 {
                return Err(PicodError::InvalidArgument(format!(
                    "client count {n} outside 1..=3"
                )));
            }
            instances.extend(enumerate_small_instances(m, n)?);
        }
    }
    let mut entries = instances
        .par_iter()
        .map(|inst| crosscheck_one(inst, fields, budget))
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by_cached_key(|e| e.instance.to_string());
    Ok(CrosscheckReport {
        instances: entries.len(),
        mismatches: entries.iter().filter(|e| !e.matches).count(),
        entries,
    })
}

/// Every instance with `m` messages and `1..=n_max` clients.
pub fn enumerate_up_to(m: usize, n_max: usize) -> Result<Vec<PicodInstance>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.extend(enumerate_small_instances(m, n)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichEntry {
    pub instance: serde_json::Value,
    pub eta: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub beta_lin: usize,
    /// `m - L` from the longest absent chain.
    pub absent_chain_bound: usize,
    /// `eta <= tau1 <= tau2 <= beta_lin` and the absent-chain bound is below
    /// `beta_lin`.
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub q: u8,
    pub instances: usize,
    pub violations: usize,
    pub entries: Vec<SandwichEntry>,
}

/// Checks the ordering of the exact nesting number, both chain bounds and
/// the exact linear length over `field` on each instance.
pub fn sandwich_sweep(
    instances: &[PicodInstance],
    field: PrimeField,
    budget: &Budget,
) -> Result<SandwichReport> {
    let entries = instances
        .par_iter()
        .map(|inst| {
            let eta = eta_exact(inst, budget)?.eta;
            let t1 = tau1(inst, budget)?.value;
            let t2 = tau2(inst, budget)?.value;
            let beta = exact_linear_beta(inst, field, None, budget)?
                .expect("identity has length m")
                .beta_lin;
            let absent = absent_chain_bound(inst, budget)?.bound;
            Ok(SandwichEntry {
                instance: serde_json::from_str(&inst.to_json()).expect("instance json"),
                eta,
                tau1: t1,
                tau2: t2,
                beta_lin: beta,
                absent_chain_bound: absent,
                ok: eta <= t1 && t1 <= t2 && t2 <= beta && absent <= beta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SandwichReport {
        q: field.q(),
        instances: entries.len(),
        violations: entries.iter().filter(|e| !e.ok).count(),
        entries,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaEntry {
    pub m: usize,
    pub sigma: Vec<usize>,
    pub clients: usize,
    /// The collection whose level `i` holds every client of the `i`-th
    /// smallest size in `sigma` validates.
    pub size_levels_valid: bool,
    pub eta: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaReport {
    pub instances: usize,
    pub violations: usize,
    pub entries: Vec<SigmaEntry>,
}

/// Clients grouped into levels by side-information size, smallest first.
pub fn size_level_collection(inst: &PicodInstance) -> NestedCollection {
    let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in inst.clients().iter().enumerate() {
        by_size.entry(s.len()).or_default().push(i);
    }
    NestedCollection::new(by_size.into_values().collect())
}

/// For every `m <= m_max` and every non-empty `sigma ⊆ {0..m-1}`: the
/// size-level collection of the complete-sigma instance validates with
/// `|sigma|` levels, and the exact nesting number is at least `|sigma|`.
pub fn sigma_sweep(m_max: usize, budget: &Budget) -> Result<SigmaReport> {
    let mut cases = Vec::new();
    for m in 1..=m_max {
        for mask in 1u64..(1 << m) {
            cases.push((m, MessageSet(mask).iter().collect::<Vec<usize>>()));
        }
    }
    let entries = cases
        .par_iter()
        .map(|(m, sigma)| {
            let inst = complete_sigma(*m, sigma)?;
            let nc = size_level_collection(&inst);
            let valid = validate_nested_collection(&inst, &nc)?;
            let eta = eta_exact(&inst, budget)?.eta;
            Ok(SigmaEntry {
                m: *m,
                sigma: sigma.clone(),
                clients: inst.n(),
                size_levels_valid: valid,
                eta,
                ok: valid && nc.len() == sigma.len() && eta >= sigma.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SigmaReport {
        instances: entries.len(),
        violations: entries.iter().filter(|e| !e.ok).count(),
        entries,
    })
}
