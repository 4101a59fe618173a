//! Robin function, harmonic centers and the Kirchhoff–Routh Hamiltonian on grids.

use plasma_lab::elliptic::{ball_robin, harmonic_centers, kirchhoff_routh, robin_function, DomainGrid, Shape};

pub fn run_example() -> plasma_lab::Result<()> {
    let disk = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0)?;
    let c = disk.nearest_node(&[0.0, 0.0]).expect("center is a node");
    let radius = (1.0 / std::f64::consts::PI).sqrt();
    println!("disk Robin at 0: grid {:.8}, exact {:.8}", robin_function(&disk, c)?, ball_robin(2, radius, &[0.0, 0.0]));

    for (name, shape) in [
        ("square", Shape::unit_square()),
        ("rectangle 2x1", Shape::Rectangle { lo: vec![0.0, 0.0], hi: vec![2.0, 1.0] }),
        ("ellipse", Shape::Ellipsoid { center: vec![0.0, 0.0], semi: vec![0.8, 0.4] }),
    ] {
        let g = DomainGrid::new(shape, 1.0 / 32.0)?;
        let centers: Vec<_> = harmonic_centers(&g)?.iter().map(|&i| g.position(i)).collect();
        println!("{name}: harmonic centers {:?}", centers.iter().map(|x| [x[0], x[1]]).collect::<Vec<_>>());
    }

    let square = DomainGrid::new(Shape::unit_square(), 1.0 / 32.0)?;
    let a = square.nearest_node(&[0.25, 0.5]).unwrap();
    let b = square.nearest_node(&[0.75, 0.5]).unwrap();
    let h1 = kirchhoff_routh(&square, &[a, b], &[1.0, 2.0])?;
    let h2 = kirchhoff_routh(&square, &[b, a], &[2.0, 1.0])?;
    println!("H(a,b) = {:.12}, H(b,a) = {:.12}", h1.value, h2.value);
    let center = square.nearest_node(&[0.5, 0.5]).unwrap();
    let g = kirchhoff_routh(&square, &[center], &[1.0])?.gradient[0];
    println!("grad H at the center: ({:.1e}, {:.1e})", g[0], g[1]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
