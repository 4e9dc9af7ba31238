//! Event-driven integration of the Heaviside model: crossings, sliding
//! entry and the terminal mode for each of the three regimes.

use fusedfocus::integrator::{integrate, HybridOptions, IntegrationError};
use fusedfocus::welander::{WelanderFilippov, WelanderParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = HybridOptions { record_samples: false, ..HybridOptions::default() };
    for (eps, x0) in [(0.04, [0.5, 0.2]), (0.0, [0.8, 0.01]), (-0.04, [0.65, 0.001])] {
        let sys = WelanderFilippov::new(WelanderParams::nonsmooth(eps))?;
        let (traj, note) = match integrate(&sys, &x0, (0.0, 60.0), &opts) {
            Ok(t) => (t, "complete"),
            // crossings accumulate at the fused focus in finite time
            Err(IntegrationError::ZenoSuspected { partial, .. }) => (*partial, "stopped by the chatter guard"),
            Err(e) => return Err(e.into()),
        };
        let events: Vec<_> = traj.events().collect();
        println!("eps = {eps:+}: {} events, {note}", events.len());
        for e in events.iter().take(6) {
            println!("  t = {:8.4}  {:<20} x = {:.6}", e.t, e.kind.as_str(), e.x[0]);
        }
        let (t, x) = traj.final_state().ok_or("empty trajectory")?;
        println!("  final t = {t:.3}, state = ({:.6}, {:.2e}), mode {:?}", x[0], x[1], traj.final_mode());
    }
    Ok(())
}
