//! Attractor classification across the fused-focus transition, written as
//! CSV to stdout, followed by the detected bifurcations.

use fusedfocus::scan::{scan_nonsmooth, Budget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid: Vec<f64> = (-4..=4).map(|i| 0.01 * f64::from(i)).collect();
    let diagram = scan_nonsmooth(&grid, &Budget::default());
    diagram.write_csv(std::io::stdout().lock())?;
    for b in &diagram.detected_bifurcations {
        eprintln!("{:?} near eps = {:+.4}", b.kind, b.eps);
    }
    Ok(())
}
