//! Spike detection on explicit spike families, superpositions and the exact ball branch.

use std::sync::Arc;

use plasma_lab::emden::{solve_ball, BallConstants, Drive, EmdenProfile, GroundState, SpikeFamily};
use plasma_lab::spikes::{analyze, BallGreen, FamilyField, FreeSpace, RescaledField, SpikeOptions, Superposition};

pub fn run_example() -> plasma_lab::Result<()> {
    let prof = Arc::new(EmdenProfile::shoot(3, 2.0, 1e-10)?);
    let ground = GroundState::new(prof.clone(), 0.0)?;
    let opts = SpikeOptions::default();

    let family = SpikeFamily::new(ground.clone(), 1e4)?;
    let one = RescaledField::synthetic(Box::new(FamilyField::new(family, vec![0.0; 3])), 2.0, 1e4, "single spike");
    let r = analyze(&one, &ground, opts, Some(&FreeSpace { n: 3 }))?;
    let s = &r.spikes[0];
    println!("single: mass/M = {:.6}, profile error {:.1e}, roundness {:.4}", s.mass / ground.mpa, s.profile_error, r.roundness[0].ratio_out);

    let family = SpikeFamily::new(ground.clone(), 1e6)?;
    let centers = [[0.4, 0.0, 0.0], [-0.4, 0.0, 0.0], [0.0, 0.4, 0.2]];
    for k in 2..=3 {
        let parts = centers[..k].iter().map(|c| FamilyField::new(family.clone(), c.to_vec())).collect();
        let rf = RescaledField::synthetic(Box::new(Superposition { parts }), 2.0, 1e6, "superposition");
        let r = analyze(&rf, &ground, opts, Some(&FreeSpace { n: 3 }))?;
        println!("{k} spikes: detected {}, sigma/M = {:.4}, far field {:.1e}", r.count(), r.quantum, r.farfield_error.unwrap_or(f64::NAN));
    }

    let star = BallConstants::new(&prof).lambdastar;
    for ratio in [1e2, 1e3, 1e4] {
        let sol = solve_ball(prof.clone(), Drive::Lambda(ratio * star))?;
        let rf = RescaledField::from_ball(&sol)?;
        let r = analyze(&rf, &ground, opts, Some(&BallGreen { n: 3, radius: sol.rn }))?;
        println!("ball {ratio:e} lambda*: quantum {:.8}, far field {:.1e}", r.quantum, r.farfield_error.unwrap_or(f64::NAN));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
