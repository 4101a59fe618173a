//! Grid solutions of (P_λ): Newton solver, continuation, and per-solution diagnostics.

pub mod continuation;
pub mod diagnostics;
pub mod solver;

pub use continuation::{continuation, entry_from_solution, refine, richardson, Branch, BranchEntry, BranchSource, Continuation};
pub use diagnostics::{energy_audit, functionals, level_set_profiles, plasma_gradient, sigma, EnergyAudit, Functionals, LevelSetProfile};
pub use solver::{fit_alpha, multistart, residual, seed_solution, solve_plasma, PlasmaSolution, SolverOptions};
