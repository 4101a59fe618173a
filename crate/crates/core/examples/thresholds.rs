//! Positivity and uniqueness thresholds for the disk and the ball.

use plasma_lab::elliptic::{DomainGrid, Shape};
use plasma_lab::emden::{BallConstants, EmdenProfile};
use plasma_lab::thresholds::{f_p, lambda0, mu_star, psi_sup_bound, threshold_report, SobolevTable};

pub fn run_example() -> plasma_lab::Result<()> {
    let disk = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0)?;
    let table = SobolevTable::new(&disk);
    println!("disk: {:>3} {:>12} {:>12} {:>12}", "p", "lambda0", "Lambda(2p)/p", "(mu/l0)^p");
    for p in [1.0, 2.0, 3.0, 5.0, 10.0] {
        let l0 = lambda0(&table, p)?;
        let mu = mu_star(&table, p)?;
        println!("      {p:>3} {l0:>12.6} {mu:>12.6} {:>12.4e}", (mu / l0).powf(p));
    }
    let radius = (1.0 / std::f64::consts::PI).sqrt();
    for p in [5.0, 10.0, 20.0, 40.0] {
        println!("F({p}) = {:.4e}", f_p(1.0, radius, p)?);
    }

    let ball = DomainGrid::new(Shape::unit_ball(3), 1.0 / 16.0)?;
    let table = SobolevTable::new(&ball);
    let report = threshold_report(&table, 2.0, &[2.2, 2.5, 2.9])?;
    let star = BallConstants::new(&EmdenProfile::shoot(3, 2.0, 1e-10)?).lambdastar;
    println!("\nball N = 3, p = 2 (lambda* = {star:.6}):");
    println!("{}", serde_json::to_string_pretty(&report)?);
    println!("sup psi bound at lambda*: {:.4}", psi_sup_bound(3, 2.0, 2.5, star)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
