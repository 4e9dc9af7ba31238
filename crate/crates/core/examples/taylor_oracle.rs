//! The local expansion of the blown-up fast field at `(3/4, 1/3)`, checked
//! coefficient by coefficient against Richardson-extrapolated differences.

use fusedfocus::blowup::LocalExpansion;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let expansion = LocalExpansion::new();
    for c in expansion.verify(1e-6)? {
        println!("{:<12} constant {:>+.10}  oracle {:>+.10}  rel. error {:.1e}", c.name, c.constant, c.oracle, c.rel_err);
    }
    Ok(())
}
