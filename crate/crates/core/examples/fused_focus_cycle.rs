//! The crossing cycle born from the fused focus: a fixed point of the
//! return map on `y = 0` for several `ε < 0`.

use fusedfocus::integrator::{Orientation, Section};
use fusedfocus::poincare::{find_limit_cycle, CycleOptions, HybridFlow};
use fusedfocus::welander::{WelanderFilippov, WelanderParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let section = Section::new(1, 0.0, Orientation::Increasing);
    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "eps", "s*", "period", "amplitude", "multiplier");
    for eps in [-0.005, -0.01, -0.02, -0.04] {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps))?;
        // start the bracket just outside the sliding segment
        let lo = 0.75 + 1.25 * eps.abs() + 1e-3;
        let orbit = find_limit_cycle(&HybridFlow::new(&sys), &section, [lo, 0.9], &CycleOptions::default())?;
        println!(
            "{eps:>7} {:>10.6} {:>10.4} {:>10.6} {:>10.4}",
            orbit.section_point[0], orbit.period, orbit.amplitude, orbit.floquet_estimate
        );
    }
    Ok(())
}
