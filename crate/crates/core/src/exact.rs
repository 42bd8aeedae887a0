//! Exact optimal linear length over one prime field.
//!
//! Decodability depends only on the row space of the coding matrix, so the
//! search walks canonical RREF bases (one per subspace) in increasing
//! dimension and stops at the first dimension that has a valid scheme.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::report::{bound_report, BoundOptions};
use crate::budget::Budget;
use crate::error::{PicodError, Result};
use crate::gflin::{combinations, gaussian_binomial, Matrix, PrimeField, SubspaceIter};
use crate::instance::PicodInstance;
use crate::schemes::{satisfies_all, LinearScheme};

#[derive(Debug, Clone, Serialize)]
pub struct ExactResult {
    pub q: u8,
    /// Shortest valid linear scheme over `F_q`.
    pub beta_lin: usize,
    pub witness: LinearScheme,
    /// The best lower bound equals `beta_lin`, so `beta_lin` is the optimum
    /// over all schemes and fields.
    pub certified: bool,
    /// Name of the bound that met `beta_lin`, when certified.
    pub lower_used: Option<&'static str>,
    /// Largest lower bound computed, when certification was attempted. The
    /// true optimum lies in `best_lower..=beta_lin`.
    pub best_lower: Option<usize>,
}

impl ExactResult {
    /// `(lower, upper)` bracket on the optimal length, if bounds were run.
    pub fn bracket(&self) -> Option<(usize, usize)> {
        self.best_lower.map(|lo| (lo, self.beta_lin))
    }
}

/// Lexicographically smallest valid basis among the `l`-dimensional
/// subspaces, or `None` when no subspace of that dimension works.
fn smallest_valid(inst: &PicodInstance, field: PrimeField, l: usize) -> Option<Matrix> {
    let m = inst.m();
    combinations(m, l)
        .into_par_iter()
        .filter_map(|pivots| {
            SubspaceIter::with_pivots(field, m, pivots)
                .filter(|a| satisfies_all(inst, a))
                .min_by(|a, b| a.entries().cmp(b.entries()))
        })
        .min_by(|a, b| a.entries().cmp(b.entries()))
}

/// `beta_q^lin` by exhaustive search over dimensions `1..=l_max` (default
/// `m`, where the identity always works). `Ok(None)` means nothing up to
/// `l_max`. The result is not certified; see [`certify`].
pub fn exact_linear_beta(
    inst: &PicodInstance,
    field: PrimeField,
    l_max: Option<usize>,
    budget: &Budget,
) -> Result<Option<ExactResult>> {
    let m = inst.m();
    let l_max = l_max.unwrap_or(m);
    if l_max == 0 {
        return Err(PicodError::InvalidArgument(
            "maximum scheme length must be at least 1".into(),
        ));
    }
    budget.check_m("exact linear search (F_q^m)", m)?;
    for l in 1..=l_max.min(m) {
        let count = gaussian_binomial(m, l, field.q() as u64);
        Budget::check("subspace enumeration", count, budget.max_subspaces)?;
        if let Some(a) = smallest_valid(inst, field, l) {
            return Ok(Some(ExactResult {
                q: field.q(),
                beta_lin: l,
                witness: LinearScheme::new(a)?,
                certified: false,
                lower_used: None,
                best_lower: None,
            }));
        }
    }
    Ok(None)
}

/// Exact search plus every lower bound that fits the budget.
pub fn certify(inst: &PicodInstance, field: PrimeField, budget: &Budget) -> Result<ExactResult> {
    let mut result =
        exact_linear_beta(inst, field, None, budget)?.expect("the identity scheme has length m");
    let report = bound_report(inst, BoundOptions::fitting(inst, budget), budget)?;
    result.best_lower = Some(report.best_lower);
    result.certified = report.best_lower == result.beta_lin;
    if result.certified {
        result.lower_used = Some(report.best_lower_source);
    }
    Ok(result)
}
