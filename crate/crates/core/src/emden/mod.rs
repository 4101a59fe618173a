//! Radial Lane–Emden shooting and every closed form built on it.

pub mod ball;
pub mod family;
pub mod ground;
pub mod ode;
pub mod profile;

pub use ball::{ball_mass_map, solve_ball, BallConstants, BallSolution, Drive};
pub use family::SpikeFamily;
pub use ground::{matching_radius, mp0_closed, GroundState};
pub use profile::{first_zero, radial_integral, radial_integral_log, EmdenConstants, EmdenProfile};
