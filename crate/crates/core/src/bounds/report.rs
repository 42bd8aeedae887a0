use serde::Serialize;

use crate::budget::Budget;
use crate::error::Result;
use crate::gflin::PrimeField;
use crate::instance::PicodInstance;
use crate::schemes::greedy_scheme;

use super::absent::{
    absent_chain_bound, absent_union_bound, nested_absent_pair_bound, AbsentChain,
};
use super::nested::{eta_exact, eta_lower_bound, EtaExact, RootedCollection};
use super::tau::{tau1, tau2, TauResult};

/// Which of the expensive computations to run. The greedy nesting bound and
/// the complete-sigma check always run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundOptions {
    pub eta_exact: bool,
    pub tau: bool,
    /// Absent-client bounds (walk the `2^m` lattice).
    pub structural: bool,
    /// Also build a greedy scheme over `F_2` as an achievable upper bound.
    pub greedy: bool,
}

impl BoundOptions {
    pub fn all() -> Self {
        BoundOptions {
            eta_exact: true,
            tau: true,
            structural: true,
            greedy: true,
        }
    }

    pub fn cheap() -> Self {
        BoundOptions {
            eta_exact: false,
            tau: false,
            structural: true,
            greedy: false,
        }
    }

    /// Every bound whose work estimate fits in `budget`, skipping the ones
    /// that would fail rather than erroring.
    pub fn fitting(inst: &PicodInstance, budget: &Budget) -> Self {
        let m = inst.m();
        let lattice_ok = m <= budget.max_m;
        let demands = inst
            .clients()
            .iter()
            .try_fold(1u128, |acc, s| acc.checked_mul((m - s.len()) as u128))
            .unwrap_or(u128::MAX);
        BoundOptions {
            eta_exact: inst.n() <= budget.max_eta_clients.min(64) && m <= budget.max_eta_m,
            tau: lattice_ok && demands <= budget.max_demand_functions,
            structural: lattice_ok,
            greedy: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub m: usize,
    pub n: usize,
    /// Largest request-set degree of any message.
    pub delta: usize,
    pub eta_lb: usize,
    pub eta_exact: Option<usize>,
    pub tau1: Option<usize>,
    pub tau2: Option<usize>,
    pub absent_chain_bound: Option<usize>,
    /// `|Sigma|` when the instance is a complete-sigma problem.
    pub sigma_bound: Option<usize>,
    /// `m - 1` when the absent clients leave some message uncovered.
    #[serde(rename = "lemma5_bound")]
    pub absent_union_bound: Option<usize>,
    /// `m - 1` when at most one pair of absent clients is nested.
    #[serde(rename = "lemma6_bound")]
    pub nested_absent_pair_bound: Option<usize>,
    pub best_lower: usize,
    /// Name of a bound attaining `best_lower`.
    pub best_lower_source: &'static str,
    /// Length of a greedy `F_2` scheme, when requested.
    pub greedy_upper: Option<usize>,
    pub witnesses: Witnesses,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub eta_lb: RootedCollection,
    pub eta_exact: Option<EtaExact>,
    pub tau1: Option<TauResult>,
    pub tau2: Option<TauResult>,
    pub absent_chain: Option<AbsentChain>,
}

impl BoundReport {
    /// Every computed lower bound with its name, strongest-first on ties in
    /// the order listed.
    pub fn lower_bounds(&self) -> Vec<(&'static str, usize)> {
        [
            ("tau2", self.tau2),
            ("tau1", self.tau1),
            ("eta_exact", self.eta_exact),
            ("eta_lb", Some(self.eta_lb)),
            ("absent_chain", self.absent_chain_bound),
            ("absent_union", self.absent_union_bound),
            ("nested_absent_pair", self.nested_absent_pair_bound),
            ("sigma", self.sigma_bound),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

/// `|Sigma|` if the clients are exactly all subsets whose sizes lie in Sigma.
fn complete_sigma_size(inst: &PicodInstance) -> Option<usize> {
    let m = inst.m();
    let mut sizes: Vec<usize> = inst.clients().iter().map(|s| s.len()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let expected: u128 = sizes.iter().map(|&s| binomial(m, s)).sum();
    (expected == inst.n() as u128).then_some(sizes.len())
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn bound_report(
    inst: &PicodInstance,
    opts: BoundOptions,
    budget: &Budget,
) -> Result<BoundReport> {
    let lb = eta_lower_bound(inst);
    let exact = opts
        .eta_exact
        .then(|| eta_exact(inst, budget))
        .transpose()?;
    let (t1, t2) = if opts.tau {
        (Some(tau1(inst, budget)?), Some(tau2(inst, budget)?))
    } else {
        (None, None)
    };
    let (chain, l5, l6) = if opts.structural {
        (
            Some(absent_chain_bound(inst, budget)?),
            absent_union_bound(inst, budget)?,
            nested_absent_pair_bound(inst, budget)?,
        )
    } else {
        (None, None, None)
    };
    let greedy_upper = opts
        .greedy
        .then(|| greedy_scheme(inst, PrimeField::GF2, budget).map(|s| s.len()))
        .transpose()?;

    let mut report = BoundReport {
        m: inst.m(),
        n: inst.n(),
        delta: inst.delta(),
        eta_lb: lb.lambda,
        eta_exact: exact.as_ref().map(|e| e.eta),
        tau1: t1.as_ref().map(|t| t.value),
        tau2: t2.as_ref().map(|t| t.value),
        absent_chain_bound: chain.as_ref().map(|c| c.bound),
        sigma_bound: complete_sigma_size(inst),
        absent_union_bound: l5,
        nested_absent_pair_bound: l6,
        best_lower: 0,
        best_lower_source: "",
        greedy_upper,
        witnesses: Witnesses {
            eta_lb: lb,
            eta_exact: exact,
            tau1: t1,
            tau2: t2,
            absent_chain: chain,
        },
    };
    let (name, value) =
        report.lower_bounds().into_iter().fold(
            ("", 0),
            |best, (k, v)| if v > best.1 { (k, v) } else { best },
        );
    report.best_lower = value;
    report.best_lower_source = name;
    Ok(report)
}
