//! Grid continuation on the unit-area disk from the torsion seed into the α < 0 regime,
//! with the energy identities and level-set profiles along the way.

use plasma_lab::elliptic::{DomainGrid, Shape};
use plasma_lab::plasma::{continuation, energy_audit, functionals, level_set_profiles};

pub fn run_example() -> plasma_lab::Result<()> {
    let disk = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0)?;
    let run = continuation(&disk, 2.0, 30.0, 15)?;
    let seed = &run.solutions[0];
    println!("seed: alpha = {:.6}, 2E * 8 pi = {:.6}", seed.alpha, 2.0 * seed.energy * 8.0 * std::f64::consts::PI);
    println!("alpha changes sign in {:?}", run.branch.sign_change);

    println!("\n{:>8} {:>12} {:>10} {:>10} {:>12}", "lambda", "alpha", "E", "|Omega+|", "8pi/(p+1)G+");
    for (e, s) in run.branch.entries.iter().zip(&run.solutions).step_by(3) {
        let ratio = energy_audit(&disk, s).ok().and_then(|a| a.ratio2d);
        println!(
            "{:>8.3} {:>12.6} {:>10.6} {:>10.4} {:>12}",
            e.lambda,
            e.alpha,
            e.energy,
            e.plasma_volume,
            ratio.map(|r| format!("{r:.5}")).unwrap_or_else(|| "-".into())
        );
    }

    let last = run.solutions.last().expect("branch is never empty");
    let f = functionals(&disk, last);
    println!("\nJ = F residual {:.1e}, 2F identity residual {:.1e}", f.equivalence_residual, f.identity_residual);
    let prof = level_set_profiles(&disk, last, 6);
    for (t, m) in prof.levels.iter().zip(&prof.m) {
        println!("m({t:.4}) = {m:.6}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
