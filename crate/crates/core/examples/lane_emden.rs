//! Radial Lane–Emden profiles, their integral identities and the ground states w_a.

use std::sync::Arc;

use plasma_lab::emden::{EmdenProfile, GroundState};
use plasma_lab::geometry::{critical_exponent, omega};

pub fn run_example() -> plasma_lab::Result<()> {
    println!("{:>2} {:>4} {:>14} {:>14} {:>10} {:>10}", "N", "p", "u'(1)", "I_p", "Ip err", "Pohoz err");
    for (n, p) in [(3, 1.5), (3, 2.0), (3, 2.5), (4, 1.5), (5, 1.3)] {
        let prof = EmdenProfile::shoot(n, p, 1e-11)?;
        println!(
            "{n:>2} {p:>4} {:>14.10} {:>14.8} {:>10.2e} {:>10.2e}",
            prof.u1prime,
            prof.ip,
            prof.ip_identity_error(),
            prof.pohozaev_error()
        );
    }

    // I_p = Nω_N(-u'(1)) is just the divergence theorem on the unit ball
    let prof = Arc::new(EmdenProfile::shoot(3, 2.0, 1e-11)?);
    let flux = 3.0 * omega(3) * -prof.u1prime;
    println!("\nN = 3, p = 2: flux {flux:.10} vs I_p {:.10}, p_N = {}", prof.ip, critical_exponent(3));

    println!("\n{:>5} {:>10} {:>12} {:>12}", "a", "R_a", "M_{p,a}", "M_{p+1,a}");
    for a in [0.0, 0.2, 0.5, 0.8] {
        let g = GroundState::new(prof.clone(), a)?;
        println!("{a:>5} {:>10.6} {:>12.6} {:>12.6}", g.ra, g.mpa, g.mp1a);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
