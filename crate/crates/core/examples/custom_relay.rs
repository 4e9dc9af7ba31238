//! A user-defined Filippov system: the relay oscillator
//! `ẋ = y, ẏ = −x − sign(y)`, which slides on `y = 0` for `|x| < 1`.

use fusedfocus::filippov::{classify_boundary, DomainBox, FnSystem};
use fusedfocus::integrator::{integrate, HybridOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = FnSystem::new(
        DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]),
        |x| vec![x[1], -x[0] - 1.0],
        |x| vec![x[1], -x[0] + 1.0],
        |x| x[1],
        |_| vec![0.0, 1.0],
    );
    for x in [-1.5, -0.5, 0.5, 1.5] {
        println!("x = {x:+.1}: {:?}", classify_boundary(&sys, &[x, 0.0])?.kind);
    }
    let traj = integrate(&sys, &[4.0, 0.0], (0.0, 20.0), &HybridOptions::default())?;
    for seg in &traj.segments {
        let (t0, x0) = &seg.samples[0];
        let (t1, x1) = seg.samples.last().unwrap();
        println!("{:<13} t {t0:7.4} -> {t1:7.4}, x {:+.4} -> {:+.4}", seg.mode.as_str(), x0[0], x1[0]);
    }
    Ok(())
}
