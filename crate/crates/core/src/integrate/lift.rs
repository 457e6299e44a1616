//! Integral curves of the Lie–Cartan field.

use serde::Serialize;

use super::{ode, Curve, Event, EventKind, Sample};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::liecartan::{f_value, lie_cartan_field, LieCartanState};
use crate::vec3::{self, dot, norm, Vec3};

/// Slope magnitude above which the chart with u and v exchanged is used.
const SWAP_SLOPE: f64 = 10.0;
/// Field speed treated as a stop.
const STAGNATION_SPEED: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TimeScaling {
    None,
    /// Divide the field by |X| + 1e-9; orbits are unchanged.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LiftParams {
    pub t_max: f64,
    pub tol: f64,
    pub max_step: f64,
    pub scaling: TimeScaling,
}

impl Default for LiftParams {
    fn default() -> Self {
        Self { t_max: 1.0, tol: 1e-10, max_step: 0.05, scaling: TimeScaling::None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftSample {
    pub t: f64,
    pub state: LieCartanState,
    /// F in the sample's chart.
    pub f_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve4 {
    pub samples: Vec<LiftSample>,
    pub events: Vec<Event>,
    /// The projection to ℝ³; tangents are the unit line elements oriented
    /// along the motion where it is nonzero.
    pub projection: Curve,
}

fn speed(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integrates the lifted field from a state on {F = 0}.
pub fn integrate_lie_cartan(spec: &FieldSpec, state0: &LieCartanState, params: &LiftParams) -> Result<Curve4> {
    integrate_oriented(spec, state0, params, None)
}

/// As [`integrate_lie_cartan`]; with `hint`, time runs so that the initial
/// spatial motion has a nonnegative component along it.
pub(crate) fn integrate_oriented(
    spec: &FieldSpec,
    state0: &LieCartanState,
    params: &LiftParams,
    hint: Option<Vec3<f64>>,
) -> Result<Curve4> {
    let f0 = f_value(spec, state0)?;
    if f0.f.abs() >= 1e-6 {
        return Err(Error::IntegrationFailure(format!("start has |F| = {:e} >= 1e-6", f0.f.abs())));
    }
    let domain = *spec.domain();
    let mut chart = state0.chart;
    let mut sign = 1.0;
    let mut y = state0.as_array();
    let mut t = 0.0;
    let x0 = lie_cartan_field(spec, state0)?;
    if let Some(hint) = hint {
        if dot(&[x0[0], x0[1], x0[2]], &hint) < 0.0 {
            sign = -1.0;
        }
    }
    let scaled = |v: [f64; 4], sign: f64| -> [f64; 4] {
        let s = match params.scaling {
            TimeScaling::None => sign,
            TimeScaling::Full => sign / (speed(&v) + 1e-9),
        };
        v.map(|c| c * s)
    };
    let state_of = |y: &[f64; 4], chart| LieCartanState::in_chart([y[0], y[1], y[2]], y[3], chart);
    let mut samples = vec![LiftSample { t, state: *state0, f_residual: f0.f }];
    let mut events = Vec::new();
    let mut h = params.max_step.min(1e-3);
    let h_min = 1e-12 * (1.0 + params.max_step);
    let mut last_motion = vec3::scale(&[x0[0], x0[1], x0[2]], sign);
    while t < params.t_max {
        let raw = lie_cartan_field(spec, &state_of(&y, chart))?;
        if speed(&raw) < STAGNATION_SPEED {
            events.push(Event { t, kind: EventKind::StagnationNearSingularity, point: [y[0], y[1], y[2]] });
            break;
        }
        h = h.min(params.max_step).min(params.t_max - t);
        let mut rhs = |_t: f64, s: &[f64; 4]| lie_cartan_field(spec, &state_of(s, chart)).ok().map(|v| scaled(v, sign));
        match ode::dopri_step(&mut rhs, t, &y, h, params.tol) {
            Some((next, err)) if err <= 1.0 => {
                t += h;
                y = next;
                h = ode::next_step(h, err);
                let mut state = state_of(&y, chart);
                if state.p.abs() > SWAP_SLOPE {
                    state = state.swapped().expect("p is large");
                    chart = state.chart;
                    y = state.as_array();
                    let v = lie_cartan_field(spec, &state)?;
                    if dot(&[v[0], v[1], v[2]], &last_motion) * sign < 0.0 {
                        sign = -sign;
                    }
                }
                let v = lie_cartan_field(spec, &state)?;
                let motion = vec3::scale(&[v[0], v[1], v[2]], sign);
                if norm(&motion) > 0.0 {
                    last_motion = motion;
                }
                let f = f_value(spec, &state)?.f;
                samples.push(LiftSample { t, state, f_residual: f });
                if !domain.contains(&state.point) {
                    events.push(Event { t, kind: EventKind::DomainExit, point: state.point });
                    break;
                }
            }
            Some((_, err)) => h = ode::next_step(h, err),
            None => h *= 0.5,
        }
        if h < h_min {
            events.push(Event { t, kind: EventKind::StepFailure, point: [y[0], y[1], y[2]] });
            break;
        }
    }
    let projection = project(spec, &samples, sign);
    Ok(Curve4 { samples, events, projection })
}

fn project(spec: &FieldSpec, samples: &[LiftSample], sign: f64) -> Curve {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev: Option<Vec3<f64>> = None;
    for s in samples {
        let q = f_value(spec, &s.state).map(|v| v.q).unwrap_or(0.0);
        let mut d = vec3::normalize(&s.state.direction(q));
        let v = lie_cartan_field(spec, &s.state).unwrap_or([0.0; 4]);
        let motion = vec3::scale(&[v[0], v[1], v[2]], sign);
        let reference = if norm(&motion) > 1e-14 { Some(motion) } else { prev };
        if let Some(r) = reference {
            if dot(&d, &r) < 0.0 {
                d = vec3::scale(&d, -1.0);
            }
        }
        prev = Some(d);
        out.push(Sample { t: s.t, point: s.state.point, tangent: d });
    }
    Curve { samples: out, branch: None, events: Vec::new(), diagnostics: None }
}
