//! Grid-based elliptic toolbox: domains, solvers, Sobolev constants, Green functions.

pub mod domain;
pub mod green;
pub mod krylov;
pub mod multigrid;
pub mod poisson;
pub mod sobolev;

pub use domain::{DomainGrid, Shape};
pub use green::{
    ball_green, ball_regular, ball_robin, green_function, harmonic_centers, kirchhoff_routh, regular_part, robin_function,
    GreenTable, KirchhoffRouth,
};
pub use poisson::{solve_dirichlet, solve_poisson, torsion, Torsion};
pub use sobolev::{ball_sobolev, smallest_eigenvalue, sobolev_constant, SobolevResult};
