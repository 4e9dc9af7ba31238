//! Crossing and sliding arcs of the Heaviside model on `y = 0`, with the
//! fold points found by the generic tangency search.

use fusedfocus::filippov::{classify_boundary, find_tangencies, DomainBox};
use fusedfocus::welander::{sliding_boundaries_default, WelanderFilippov, WelanderParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let window = DomainBox::new(vec![0.0, -1.0], vec![1.5, 1.0]);
    for eps in [0.05, 0.0, -0.05] {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps))?;
        let (x_minus, x_plus) = sliding_boundaries_default(eps);
        println!("eps = {eps:+}: closed-form folds x- = {x_minus:.4}, x+ = {x_plus:.4}");
        for t in find_tangencies(&sys, &window)? {
            println!("  fold at x = {:.10} ({:?} side, {:?})", t.location[0], t.side, t.visibility);
        }
        for x in [0.55, 0.65, 0.75, 0.85, 0.95] {
            let c = classify_boundary(&sys, &[x, 0.0])?;
            println!("  x = {x:.2}: {:?}, lambda* = {:?}", c.kind, c.lambda_star);
        }
    }
    Ok(())
}
