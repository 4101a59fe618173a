//! A domain read from a 0/1 mask raster, solved past the sign change of α.

use plasma_lab::elliptic::{DomainGrid, Shape};
use plasma_lab::plasma::{continuation, energy_audit};

/// An L-shaped raster: the unit square with its upper-right quarter removed.
fn l_shape(cells: usize) -> String {
    let h = 1.0 / (cells - 1) as f64;
    let mut text = format!("2 {h} {cells} {cells}\n");
    for j in (0..cells).rev() {
        let row: Vec<&str> = (0..cells)
            .map(|i| {
                let inner = i > 0 && j > 0 && i + 1 < cells && j + 1 < cells;
                let notch = 2 * i >= cells - 1 && 2 * j >= cells - 1;
                if inner && !notch { "1" } else { "0" }
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text
}

pub fn run_example() -> plasma_lab::Result<()> {
    let shape = Shape::parse_mask(&l_shape(41))?;
    let Shape::Mask { h, .. } = &shape else { unreachable!() };
    let grid = DomainGrid::new(shape.clone(), *h)?;
    println!("{}: {} nodes, measure {:.4}", grid.describe(), grid.len(), grid.measure);

    let run = continuation(&grid, 2.0, 40.0, 10)?;
    println!("sign change of alpha in {:?}", run.branch.sign_change);
    let last = run.solutions.last().unwrap();
    let audit = energy_audit(&grid, last)?;
    println!("lambda = {}: alpha = {:.6}, identity residual {:.1e}", last.lambda, last.alpha, audit.identity_residual);
    Ok(())
}

#[allow(dead_code)]
fn main() -> plasma_lab::Result<()> {
    run_example()
}
