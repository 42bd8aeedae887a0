use crate::error::{PicodError, Result};

/// Work caps for the exponential routines. Exceeding one is always an
/// explicit [`PicodError::BudgetExceeded`], never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest `m` for anything that walks the subset lattice or `F_q^m`.
    pub max_m: usize,
    /// Largest number of decoding choice functions enumerated by `tau1`/`tau2`.
    pub max_demand_functions: u128,
    /// Largest Gaussian binomial count the subspace stream may produce.
    pub max_subspaces: u128,
    /// Largest client count accepted by the exact nesting-number search.
    pub max_eta_clients: usize,
    /// Largest `m` accepted by the exact nesting-number search.
    pub max_eta_m: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_m: 16,
            max_demand_functions: 5_000_000,
            max_subspaces: 10_000_000,
            max_eta_clients: 16,
            max_eta_m: 8,
        }
    }
}

impl Budget {
    pub(crate) fn check(what: &'static str, needed: u128, limit: u128) -> Result<()> {
        if needed > limit {
            Err(PicodError::BudgetExceeded {
                what,
                needed,
                limit,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_m(&self, what: &'static str, m: usize) -> Result<()> {
        Self::check(what, m as u128, self.max_m as u128)
    }
}
