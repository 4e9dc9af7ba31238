//! Where the smooth equilibrium loses stability: the zero-trace slope of the
//! base-point Jacobian, the slope once the equilibrium shift is included,
//! and the numerically located crossing with its amplitude law.

use fusedfocus::blowup::{verify_hopf_numerically, HopfOptions, LocalExpansion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = LocalExpansion::new();
    println!("base-point trace slope   {:+.6}", e.hopf_slope());
    println!("equilibrium trace slope  {:+.6}", e.equilibrium_hopf_slope());
    for a in [0.002, 0.001, 0.0005] {
        let r = verify_hopf_numerically(a, [-20.0 * a, 0.0], &HopfOptions::default())?;
        println!(
            "a = {a}: eps* = {:+.6e}, eps*/a = {:+.4}, d(Re)/d(eps) = {:+.3}, amplitude slope {:?}, supercritical {}",
            r.eps_star, r.ratio, r.transversality, r.amplitude_slope, r.supercritical
        );
    }
    match verify_hopf_numerically(0.01, [-0.1, 0.02], &HopfOptions { measure_amplitude: false, ..HopfOptions::default() }) {
        Ok(r) => println!("a = 0.01: eps* = {:+.6}", r.eps_star),
        Err(err) => println!("a = 0.01: {err}"),
    }
    Ok(())
}
