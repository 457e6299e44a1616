//! Integration of asymptotic lines in ℝ³ and of the Lie–Cartan field in
//! (x, y, z, p), with per-curve diagnostics.
//!
//! Asymptotic lines are integrated at unit speed, so `t` is arclength. The
//! branch is fixed at the start by the root label of the chart quadratic;
//! afterwards each step follows the root closest to the previous tangent,
//! which keeps the branch through chart changes.

mod diagnostics;
mod lift;
pub mod ode;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{jet_at, lift_direction, quadratic_roots, Chart, ChartFrame};
use crate::liecartan::{project_to_lie_cartan, LieCartanState};
use crate::vec3::{self, dot, normalize, Vec3};

pub use diagnostics::{curve_diagnostics, Diagnostic};
pub use lift::{integrate_lie_cartan, Curve4, LiftParams, LiftSample, TimeScaling};

/// Largest turn of the tangent accepted in one step.
const MAX_TURN: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticParams {
    pub t_max: f64,
    /// Local error bound per step.
    pub tol: f64,
    pub max_step: f64,
    /// Relative threshold for the parabolic event, see [`eps_switch`].
    pub switch: f64,
    /// Continue in the Lie–Cartan lift after reaching the parabolic set.
    pub continue_through_parabolic: bool,
}

impl Default for AsymptoticParams {
    fn default() -> Self {
        Self { t_max: 1.0, tol: 1e-10, max_step: 0.05, switch: 1e-4, continue_through_parabolic: false }
    }
}

/// K threshold for the parabolic event: `switch · (1 + (|e| + |f| + |g|)²)`.
pub fn eps_switch(switch: f64, frame: &ChartFrame<f64>) -> f64 {
    let s = frame.e.abs() + frame.f.abs() + frame.g.abs();
    switch * (1.0 + s * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    ParabolicHit,
    DomainExit,
    StepFailure,
    StagnationNearSingularity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub point: Vec3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub point: Vec3<f64>,
    /// Unit tangent in the direction of travel.
    pub tangent: Vec3<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub samples: Vec<Sample>,
    /// 1 or 2 for asymptotic lines; `None` for projections of lifted curves.
    pub branch: Option<u8>,
    pub events: Vec<Event>,
    pub diagnostics: Option<Vec<Diagnostic>>,
}

/// The two unit asymptotic directions at `x`, in branch order; equal when
/// K ≥ 0 so that the field stays defined just past the parabolic set.
fn asymptotic_pair(spec: &FieldSpec, x: &Vec3<f64>) -> Result<([Vec3<f64>; 2], ChartFrame<f64>)> {
    let jet = jet_at(spec, x, 1)?;
    let frame = ChartFrame::from_jet(&jet, Chart::select(&jet.xi))?;
    if frame.is_degenerate() {
        return Err(Error::DegenerateDirections { point: *x });
    }
    let roots = quadratic_roots(frame.e, frame.f, frame.g, frame.k >= 0.0).expect("single root always exists");
    Ok((roots.map(|r| normalize(&lift_direction(&jet.xi, frame.chart, r))), frame))
}

/// The asymptotic direction closest to `reference`, oriented along it.
fn aligned(spec: &FieldSpec, x: &Vec3<f64>, reference: &Vec3<f64>) -> Result<Vec3<f64>> {
    let ([d1, d2], _) = asymptotic_pair(spec, x)?;
    let (a, b) = (dot(&d1, reference), dot(&d2, reference));
    let (d, s) = if a.abs() >= b.abs() { (d1, a) } else { (d2, b) };
    Ok(if s < 0.0 { vec3::scale(&d, -1.0) } else { d })
}

/// Integrates branch `branch` (1 or 2) of the asymptotic lines from `start`.
pub fn integrate_asymptotic(
    spec: &FieldSpec,
    start: &Vec3<f64>,
    branch: u8,
    params: &AsymptoticParams,
) -> Result<Curve> {
    assert!(branch == 1 || branch == 2, "branch must be 1 or 2");
    let jet = jet_at(spec, start, 1)?;
    let frame = ChartFrame::from_jet(&jet, Chart::select(&jet.xi))?;
    if frame.k > frame.eps_k() || frame.is_degenerate() {
        return Err(Error::StartNotHyperbolic { k: frame.k });
    }
    let single = frame.k >= -frame.eps_k();
    let roots = quadratic_roots(frame.e, frame.f, frame.g, single).expect("D >= 0 when K <= eps");
    let initial = normalize(&lift_direction(&jet.xi, frame.chart, roots[branch as usize - 1]));
    let mut curve = integrate_from(spec, start, &initial, params)?;
    curve.branch = Some(branch);
    Ok(curve)
}

/// Integrates the asymptotic line through `start` whose direction is closest
/// to `direction`, travelling along it.
pub fn integrate_asymptotic_along(
    spec: &FieldSpec,
    start: &Vec3<f64>,
    direction: &Vec3<f64>,
    params: &AsymptoticParams,
) -> Result<Curve> {
    let jet = jet_at(spec, start, 1)?;
    let frame = ChartFrame::from_jet(&jet, Chart::select(&jet.xi))?;
    if frame.k > frame.eps_k() || frame.is_degenerate() {
        return Err(Error::StartNotHyperbolic { k: frame.k });
    }
    let initial = aligned(spec, start, direction)?;
    integrate_from(spec, start, &initial, params)
}

fn integrate_from(
    spec: &FieldSpec,
    start: &Vec3<f64>,
    initial: &Vec3<f64>,
    params: &AsymptoticParams,
) -> Result<Curve> {
    let domain = *spec.domain();
    let h_min = 1e-12 * (1.0 + params.max_step);
    let mut t = 0.0;
    let mut x = *start;
    let mut tangent = *initial;
    let mut samples = vec![Sample { t, point: x, tangent }];
    let mut events = Vec::new();
    let mut h = params.max_step.min(1e-3);
    let mut was_hyperbolic = false;
    while t < params.t_max {
        let (_, frame) = asymptotic_pair(spec, &x)?;
        let eps = eps_switch(params.switch, &frame);
        if frame.k < -eps {
            was_hyperbolic = true;
        } else if was_hyperbolic {
            events.push(Event { t, kind: EventKind::ParabolicHit, point: x });
            if params.continue_through_parabolic {
                continue_in_lift(spec, t, &x, &tangent, params, &mut samples, &mut events)?;
            }
            break;
        }
        h = h.min(params.max_step).min(params.t_max - t);
        let reference = tangent;
        let mut rhs = |_t: f64, y: &[f64; 3]| aligned(spec, y, &reference).ok();
        let accepted = match ode::dopri_step(&mut rhs, t, &x, h, params.tol) {
            Some((y, err)) if err <= 1.0 => match aligned(spec, &y, &reference) {
                Ok(d) if vec3::line_angle(&d, &reference) < MAX_TURN => Some((y, d, err)),
                _ => None,
            },
            Some((_, err)) => {
                h = ode::next_step(h, err);
                None
            }
            None => {
                h *= 0.5;
                None
            }
        };
        match accepted {
            Some((y, d, err)) => {
                t += h;
                x = y;
                tangent = d;
                samples.push(Sample { t, point: x, tangent });
                h = ode::next_step(h, err);
                if !domain.contains(&x) {
                    events.push(Event { t, kind: EventKind::DomainExit, point: x });
                    break;
                }
            }
            None => {
                h = h.min(0.5 * params.max_step);
                if h < h_min {
                    events.push(Event { t, kind: EventKind::StepFailure, point: x });
                    break;
                }
            }
        }
    }
    Ok(Curve { samples, branch: None, events, diagnostics: None })
}

/// Hands a curve that reached the parabolic set over to the lift.
fn continue_in_lift(
    spec: &FieldSpec,
    t0: f64,
    x: &Vec3<f64>,
    tangent: &Vec3<f64>,
    params: &AsymptoticParams,
    samples: &mut Vec<Sample>,
    events: &mut Vec<Event>,
) -> Result<()> {
    let xi = spec.xi(x)?;
    let mut chart = Chart::select(&xi);
    let mut c = chart.to_chart(tangent);
    if c[0].abs() < c[1].abs() {
        chart = chart.swap();
        c = chart.to_chart(tangent);
    }
    let state = project_to_lie_cartan(spec, &LieCartanState::in_chart(*x, c[1] / c[0], chart))?;
    let lp =
        LiftParams { t_max: params.t_max - t0, tol: params.tol, max_step: params.max_step, scaling: TimeScaling::Full };
    let lifted = lift::integrate_oriented(spec, &state, &lp, Some(*tangent))?;
    samples.extend(lifted.projection.samples.iter().skip(1).map(|s| Sample { t: t0 + s.t, ..*s }));
    events.extend(lifted.events.iter().map(|e| Event { t: t0 + e.t, ..e.clone() }));
    Ok(())
}

/// One curve of a portrait.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortraitEntry {
    pub seed: usize,
    pub branch: u8,
    pub curve: std::result::Result<Curve, String>,
}

/// Both branches from every seed, ordered by seed then branch. Failures are
/// kept per entry.
pub fn asymptotic_portrait(spec: &FieldSpec, seeds: &[Vec3<f64>], params: &AsymptoticParams) -> Vec<PortraitEntry> {
    let jobs: Vec<(usize, u8)> = (0..seeds.len()).flat_map(|i| [(i, 1), (i, 2)]).collect();
    jobs.par_iter()
        .map(|&(seed, branch)| PortraitEntry {
            seed,
            branch,
            curve: integrate_asymptotic(spec, &seeds[seed], branch, params).map_err(|e| e.to_string()),
        })
        .collect()
}
