//! Parameter sweeps: the nonsmooth `ε` line and the smooth `(ε, a)` plane.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blowup::{equilibrium_spectrum, smooth_limit_cycle, verify_hopf_numerically, HopfOptions};
use crate::integrator::{integrate_with_section, HybridOptions, IntegrationError, Mode, Orientation, Section};
use crate::ode::IntegrationOptions;
use crate::poincare::{find_limit_cycle, CycleOptions, HybridFlow};
use crate::welander::{ds_dlambda, sliding_boundaries, WelanderFilippov, WelanderParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    NonsmoothFilippov,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Attractor {
    SlidingAttractor,
    FocusPoint,
    EquilibriumPoint,
    PeriodicOrbit,
    None,
}

impl Attractor {
    /// Steady (`false`) or oscillatory (`true`) long-run behaviour; a sliding
    /// attractor is the nonsmooth counterpart of a stable equilibrium.
    pub fn oscillates(self) -> Option<bool> {
        match self {
            Attractor::PeriodicOrbit => Some(true),
            Attractor::SlidingAttractor | Attractor::FocusPoint | Attractor::EquilibriumPoint => Some(false),
            Attractor::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub eps: f64,
    pub a: f64,
    pub regime: Regime,
    pub attractor: Attractor,
    pub orbit_amplitude: Option<f64>,
    /// Eigenvalues of the smooth equilibrium in the original time.
    pub eigen_real: Option<f64>,
    pub eigen_imag: Option<f64>,
    /// Fold abscissae of the nonsmooth model, ordered.
    pub slide_interval: Option<(f64, f64)>,
    pub failure: Option<String>,
}

impl ScanPoint {
    fn new(eps: f64, a: f64) -> Self {
        Self {
            eps,
            a,
            regime: if a == 0.0 { Regime::NonsmoothFilippov } else { Regime::Smooth },
            attractor: Attractor::None,
            orbit_amplitude: None,
            eigen_real: None,
            eigen_imag: None,
            slide_interval: None,
            failure: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BifurcationKind {
    FusedFocus,
    SmoothHopf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedBifurcation {
    pub kind: BifurcationKind,
    pub eps: f64,
    pub a: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub points: Vec<ScanPoint>,
    pub detected_bifurcations: Vec<DetectedBifurcation>,
}

/// Per-point cost cap, counted in right-hand-side evaluations so that results
/// do not depend on machine speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budget {
    pub max_evals: u64,
    /// Integration horizon per seed.
    pub t_final: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_evals: 20_000_000, t_final: 500.0 }
    }
}

/// Initial states `(x, y)` used to probe the long-run behaviour.
pub const SEEDS: [[f64; 2]; 4] = [[0.5, 0.2], [0.65, 0.001], [1.0, -0.1], [0.9, 0.05]];

/// Distance from `(3/4, 0)` below which a nonsmooth solution counts as
/// captured by the fused focus.
const FOCUS_RADIUS: f64 = 1e-3;

fn sorted_unique(grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = grid.iter().copied().filter(|v| v.is_finite()).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn sort_points(points: &mut [ScanPoint]) {
    points.sort_by(|p, q| p.a.total_cmp(&q.a).then(p.eps.total_cmp(&q.eps)));
}

/// Sweeps the Heaviside model over `eps_grid`.
pub fn scan_nonsmooth(eps_grid: &[f64], budget: &Budget) -> BifurcationDiagram {
    let grid = sorted_unique(eps_grid);
    let mut points: Vec<ScanPoint> = grid.par_iter().map(|&eps| nonsmooth_point(eps, budget)).collect();
    sort_points(&mut points);
    let detected_bifurcations = fused_focus_crossings(&points);
    BifurcationDiagram { points, detected_bifurcations }
}

/// Classifies the long-run behaviour of the Heaviside model at one `ε`.
pub fn nonsmooth_point(eps: f64, budget: &Budget) -> ScanPoint {
    let mut pt = ScanPoint::new(eps, 0.0);
    let params = WelanderParams::nonsmooth(eps);
    match sliding_boundaries(&params) {
        Ok((lo, hi)) => pt.slide_interval = Some((lo.min(hi), lo.max(hi))),
        Err(e) => pt.failure = Some(e.to_string()),
    }
    let sys = match WelanderFilippov::new(params) {
        Ok(s) => s,
        Err(e) => {
            pt.failure = Some(e.to_string());
            return pt;
        }
    };
    let mut votes = Vec::new();
    let mut amplitude: Option<f64> = None;
    let mut failures = Vec::new();
    for seed in SEEDS {
        match classify_seed(&sys, &seed, budget) {
            Ok((kind, amp)) => {
                votes.push(kind);
                if let Some(v) = amp {
                    amplitude = Some(amplitude.map_or(v, |w| w.max(v)));
                }
            }
            Err(e) => failures.push(e),
        }
    }
    pt.attractor = majority(&votes);
    if pt.attractor == Attractor::PeriodicOrbit {
        pt.orbit_amplitude = amplitude;
    }
    if !failures.is_empty() {
        pt.failure = Some(failures.join("; "));
    }
    pt
}

/// Most frequent kind; ties go to the earlier variant.
fn majority(votes: &[Attractor]) -> Attractor {
    let mut counts = std::collections::BTreeMap::new();
    for v in votes {
        *counts.entry(*v).or_insert(0usize) += 1;
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map_or(Attractor::None, |(k, _)| k)
}

fn classify_seed(sys: &WelanderFilippov, seed: &[f64], budget: &Budget) -> Result<(Attractor, Option<f64>), String> {
    let section = Section::new(1, 0.0, Orientation::Increasing);
    let mut opts = HybridOptions { record_samples: false, ..HybridOptions::default() };
    opts.ode.max_evals = budget.max_evals / SEEDS.len() as u64;
    let near_focus = |x: &[f64]| (x[0] - 0.75).hypot(x[1]) < FOCUS_RADIUS;
    let traj = match integrate_with_section(sys, seed, (0.0, budget.t_final), &opts, Some((&section, usize::MAX))) {
        Ok(t) => t,
        // accumulating crossings at the double tangency
        Err(IntegrationError::ZenoSuspected { partial, .. })
            if partial.final_state().is_some_and(|(_, x)| near_focus(x)) =>
        {
            return Ok((Attractor::FocusPoint, None));
        }
        Err(e) => return Err(e.to_string()),
    };
    let (_, last) = traj.final_state().ok_or("empty trajectory")?;
    if traj.final_mode() == Some(Mode::Sliding) {
        return Ok((Attractor::SlidingAttractor, None));
    }
    if near_focus(last) {
        return Ok((Attractor::FocusPoint, None));
    }
    let s: Vec<f64> = traj.hits.iter().map(|h| section.param(&h.x)).collect();
    if s.len() < 3 {
        return Ok((Attractor::None, None));
    }
    let sn = s[s.len() - 1];
    let step = (sn - s[s.len() - 2]).abs();
    let width = (10.0 * step).max(1e-6);
    let flow = HybridFlow { sys, opts: HybridOptions { ode: opts.ode, ..HybridOptions::default() } };
    match find_limit_cycle(&flow, &section, [sn - width, sn + width], &CycleOptions::default()) {
        Ok(orbit) if orbit.amplitude > 0.0 => Ok((Attractor::PeriodicOrbit, Some(orbit.amplitude))),
        _ => Ok((Attractor::None, None)),
    }
}

/// A fused focus sits where the signed width `x₊ − x₋` of the sliding
/// interval changes sign together with `dS/dλ`.
fn fused_focus_crossings(points: &[ScanPoint]) -> Vec<DetectedBifurcation> {
    let signed = |p: &ScanPoint| {
        let params = WelanderParams::nonsmooth(p.eps);
        sliding_boundaries(&params).ok().map(|(lo, hi)| (hi - lo, ds_dlambda(&params)))
    };
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let Some((w, slope)) = signed(p) else { continue };
        if w == 0.0 {
            out.push(DetectedBifurcation { kind: BifurcationKind::FusedFocus, eps: p.eps, a: 0.0 });
            continue;
        }
        if let Some(q) = points.get(i + 1) {
            let Some((wq, slope_q)) = signed(q) else { continue };
            if w * wq < 0.0 && slope * slope_q < 0.0 {
                let eps = p.eps - w * (q.eps - p.eps) / (wq - w);
                out.push(DetectedBifurcation { kind: BifurcationKind::FusedFocus, eps, a: 0.0 });
            }
        }
    }
    out
}

/// Sweeps the arctan model over `a_list × eps_grid`.
pub fn scan_smooth(a_list: &[f64], eps_grid: &[f64], budget: &Budget) -> BifurcationDiagram {
    let a_vals = sorted_unique(a_list);
    let grid = sorted_unique(eps_grid);
    let tasks: Vec<(f64, f64)> = a_vals.iter().flat_map(|&a| grid.iter().map(move |&e| (a, e))).collect();
    let mut points: Vec<ScanPoint> = tasks.par_iter().map(|&(a, eps)| smooth_point(a, eps, budget)).collect();
    sort_points(&mut points);
    let mut detected_bifurcations: Vec<DetectedBifurcation> = match (grid.first(), grid.last()) {
        (Some(&lo), Some(&hi)) if lo < hi => a_vals
            .par_iter()
            .filter(|&&a| a > 0.0)
            .filter_map(|&a| {
                let opts = HopfOptions { grid: 4 * grid.len().max(50), measure_amplitude: false, ..HopfOptions::default() };
                verify_hopf_numerically(a, [lo, hi], &opts).ok()
            })
            .map(|r| DetectedBifurcation { kind: BifurcationKind::SmoothHopf, eps: r.eps_star, a: r.a })
            .collect(),
        _ => Vec::new(),
    };
    detected_bifurcations.sort_by(|p, q| p.a.total_cmp(&q.a));
    BifurcationDiagram { points, detected_bifurcations }
}

/// Classifies the smooth equilibrium (and cycle, if it repels) at one `(a, ε)`.
pub fn smooth_point(a: f64, eps: f64, budget: &Budget) -> ScanPoint {
    let mut pt = ScanPoint::new(eps, a);
    if !(a > 0.0) {
        pt.failure = Some(format!("the smooth model needs a > 0 (got {a})"));
        return pt;
    }
    let spec = match equilibrium_spectrum(a, eps) {
        Ok(s) => s,
        Err(e) => {
            pt.failure = Some(e.to_string());
            return pt;
        }
    };
    // rescale from the fast time τ = t/a
    pt.eigen_real = Some(spec.eigen.re[0] / a);
    pt.eigen_imag = Some(spec.eigen.im[0] / a);
    if spec.eigen.max_re() < 0.0 {
        pt.attractor = Attractor::EquilibriumPoint;
        return pt;
    }
    let ode = IntegrationOptions { max_evals: budget.max_evals, ..IntegrationOptions::default() };
    match smooth_limit_cycle(&WelanderParams::smooth(eps, a), ode) {
        Ok(orbit) if orbit.amplitude > 0.0 => {
            pt.attractor = Attractor::PeriodicOrbit;
            pt.orbit_amplitude = Some(orbit.amplitude);
        }
        Ok(_) => {}
        Err(e) => pt.failure = Some(e.to_string()),
    }
    pt
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BifurcationDiagram {
    pub const CSV_HEADER: [&'static str; 9] =
        ["a", "eps", "regime", "attractor", "orbit_amplitude", "eigen_real", "eigen_imag", "slide_lo", "slide_hi"];

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for p in &self.points {
            out.write_record([
                p.a.to_string(),
                p.eps.to_string(),
                format!("{:?}", p.regime),
                format!("{:?}", p.attractor),
                opt(p.orbit_amplitude),
                opt(p.eigen_real),
                opt(p.eigen_imag),
                opt(p.slide_interval.map(|s| s.0)),
                opt(p.slide_interval.map(|s| s.1)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Detected bifurcations and per-point failures.
    pub fn summary(&self) -> serde_json::Value {
        let failures: Vec<_> = self
            .points
            .iter()
            .filter_map(|p| p.failure.as_ref().map(|f| serde_json::json!({ "a": p.a, "eps": p.eps, "reason": f })))
            .collect();
        serde_json::json!({
            "points": self.points.len(),
            "detected_bifurcations": self.detected_bifurcations,
            "failures": failures,
        })
    }
}
