//! Lower bounds on the optimal broadcast length.

pub mod absent;
pub mod nested;
pub mod report;
pub mod tau;

pub use absent::{
    absent_chain_bound, absent_union_bound, nested_absent_pair_bound, structural_m_minus_1,
    AbsentChain,
};
pub use nested::{
    eta_exact, eta_lower_bound, greedy_rooted_collection, validate_nested_collection, EtaExact,
    NestedCollection, RootedCollection,
};
pub use report::{bound_report, BoundOptions, BoundReport};
pub use tau::{chain_value, tau1, tau2, ChainRules, DemandFunction, TauResult};
