//! Best Sobolev constants Λ(Ω, q) on grids, checked against radial shooting and the area/inradius bounds.

use plasma_lab::elliptic::{ball_sobolev, smallest_eigenvalue, sobolev_constant, DomainGrid, Shape};
use plasma_lab::thresholds::ctz_bounds;

pub fn run_example() -> plasma_lab::Result<()> {
    let disk = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0)?;
    let radius = (1.0 / std::f64::consts::PI).sqrt();
    println!("{:>4} {:>12} {:>12} {:>12} {:>12}", "q", "grid", "radial", "lower bound", "upper bound");
    for q in [2.0, 3.0, 4.0, 6.0] {
        let grid = sobolev_constant(&disk, q)?.lambda;
        let radial = ball_sobolev(2, radius, q, 1e-11)?;
        // the bounds need q > 2
        let (lo, hi) = match ctz_bounds(1.0, radius, q) {
            Ok(b) => (format!("{:.6}", b.lower), format!("{:.6}", b.upper)),
            Err(_) => ("-".into(), "-".into()),
        };
        println!("{q:>4} {grid:>12.6} {radial:>12.6} {lo:>12} {hi:>12}");
    }

    let square = DomainGrid::new(Shape::unit_square(), 1.0 / 64.0)?;
    let two_pi2 = 2.0 * std::f64::consts::PI.powi(2);
    println!("\nsquare: lambda_1 = {:.6} (2 pi^2 = {two_pi2:.6})", smallest_eigenvalue(&square, 200)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
