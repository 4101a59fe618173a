//! Exact solutions on the unit-volume ball: closed-form α(λ), energy split and mass quantization.

use std::sync::Arc;

use plasma_lab::emden::{solve_ball, BallConstants, Drive, EmdenProfile, GroundState};

pub fn run_example() -> plasma_lab::Result<()> {
    let prof = Arc::new(EmdenProfile::shoot(3, 2.0, 1e-11)?);
    let c = BallConstants::new(&prof);
    let ground = GroundState::new(prof.clone(), 0.0)?;
    println!("N = 3, p = 2: lambda* = {:.10}, I* = {:.10}, M_p0 = {:.8}", c.lambdastar, c.istar, ground.mpa);

    println!("\n{:>8} {:>16} {:>10} {:>12} {:>12} {:>10}", "l/l*", "alpha", "rel err", "R_gamma", "E", "sigma/M");
    for ratio in [0.5, 1.0, 2.0, 10.0, 100.0, 1e3, 1e4, 1e6] {
        let s = solve_ball(prof.clone(), Drive::Lambda(ratio * c.lambdastar))?;
        let err = c.alpha_closed(s.lambda).map(|a| ((s.alpha - a) / a).abs()).unwrap_or(f64::NAN);
        let quantum = if s.alpha < 0.0 { s.sigma() / ground.mpa } else { f64::NAN };
        println!("{ratio:>8} {:>16.8e} {err:>10.1e} {:>12.4e} {:>12.6e} {quantum:>10.7}", s.alpha, s.r_gamma, s.energy());
    }

    // the total current is an equivalent way to pick a point on the branch
    let s = solve_ball(prof.clone(), Drive::Current(2.0 * c.istar))?;
    println!("\nI = 2 I*: lambda = {:.8}, alpha = {:.8}", s.lambda, s.alpha);
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
