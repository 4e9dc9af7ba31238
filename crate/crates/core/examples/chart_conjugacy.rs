//! The smooth model integrated in `(x, y)` and in the blown-up chart
//! `(x, k)`, `k = Φ(y/a)`, gives the same trajectory.

use fusedfocus::blowup::{xk_to_xy, xy_to_xk, BlowUpSystem};
use fusedfocus::ode::{solve_at, IntegrationOptions};
use fusedfocus::welander::{Chart, WelanderParams, WelanderSmooth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, eps) = (1e-3, -0.02);
    let p = WelanderParams::smooth(eps, a);
    let opts = IntegrationOptions { rtol: 1e-12, atol: 1e-14, ..IntegrationOptions::default() };
    let x0 = [0.8, 0.02];
    let times: Vec<f64> = (1..=10).map(f64::from).collect();
    let direct = solve_at(&WelanderSmooth::new(p, Chart::Xy)?, &x0, 0.0, &times, &opts)?;
    let blown = solve_at(&BlowUpSystem::new(p)?, &xy_to_xk(x0, a), 0.0, &times, &opts)?;
    for ((t, u), v) in times.iter().zip(&direct).zip(&blown) {
        let back = xk_to_xy([v[0], v[1]], a)?;
        let gap = (back[0] - u[0]).abs().max((back[1] - u[1]).abs());
        println!("t = {t:4.1}: (x, y) = ({:.8}, {:+.8}), k = {:.8}, gap {gap:.1e}", u[0], u[1], v[1]);
    }
    Ok(())
}
