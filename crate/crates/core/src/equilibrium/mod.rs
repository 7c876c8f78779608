//! The normalized weight `phi~`, Cesàro approximations of the weighted
//! equilibrium state and the diagnostics read off them.

mod diagnostics;
mod entropy;
mod table;
mod tilde;

pub use diagnostics::{gibbs_diagnostic, gibbs_ratios, gibbs_reference, mixing_diagnostic, GibbsRatios, GibbsReport, MixingReport};
pub use entropy::{conditional_equilibrium, entropy_and_objective, ConditionalReport, LevelEntropy, ObjectiveReport};
pub use table::CylinderTable;
pub use tilde::{
    cesaro_measure, envelope, phi_tilde, phi_tilde_at, positional_marginals, weighted_equilibrium, EnvelopeTable, Equilibrium,
    PhiTildeTable,
};
