//! Continuation of curves of special parabolic points, {K = 0, φ = 0}, and
//! detection of the transitions along them.

use serde::Serialize;

use super::{
    chart_usable, class_from_verdict, constraint, eps_lambda, parabolic_chart, spectral_verdict, Class, Constraint,
};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{jet_at, Chart};
use crate::liecartan::{spectral_pair, SpectralData};
use crate::vec3::{self, cross, dist, dot, norm, normalize, solve3, Vec3};

/// Corrector iterations per predicted point.
const CORRECTOR_ITER: usize = 12;
/// Smallest step as a fraction of the nominal step.
const MIN_STEP_FRACTION: f64 = 1.0 / 64.0;
/// Bisection stops once the bracket is shorter than this.
const BISECTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceParams {
    /// Upper bound on the distance between consecutive samples.
    pub step: f64,
    /// Samples per direction from the seed.
    pub max_samples: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self { step: 0.01, max_samples: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveSample {
    pub point: Vec3<f64>,
    /// Lift slope in `chart`.
    pub p_lift: f64,
    pub chart: Chart,
    /// Arclength along the polyline, zero at the seed.
    pub s: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub disc: f64,
    pub phi_residual: f64,
    pub k_residual: f64,
    pub class: Class,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum TransitionKind {
    SaddleNode,
    NodeFocus,
    Hopf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    /// Indices of the bracketing samples.
    pub interval: [usize; 2],
    pub kind: TransitionKind,
    pub point: Vec3<f64>,
    pub p_lift: f64,
    /// d(σ₁/2)/ds at a Hopf transition.
    pub delta: Option<f64>,
    /// Hopf sub-class decided by the sign of δ.
    pub class: Option<Class>,
}

/// Why tracing stopped in one direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Termination {
    MaxSamples,
    DomainExit,
    RankDeficient { point: Vec3<f64> },
    StepFailure { point: Vec3<f64> },
    Failure { point: Vec3<f64>, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialCurve {
    pub samples: Vec<CurveSample>,
    pub transitions: Vec<Transition>,
    /// Termination toward decreasing and increasing arclength.
    pub ends: [Termination; 2],
    pub params: TraceParams,
}

fn rows(c: &Constraint) -> Option<Vec3<f64>> {
    let t = cross(&c.grad_k, &c.grad_phi);
    let scale = norm(&c.grad_k) * norm(&c.grad_phi);
    (scale > 0.0 && norm(&t) > 1e-8 * scale).then(|| normalize(&t))
}

/// Newton on (K, φ) = 0. With `plane = (n, anchor)` the extra equation
/// ⟨x − anchor, n⟩ = 0 closes the system; without it, steps are minimum-norm.
fn correct(
    spec: &FieldSpec,
    guess: &Vec3<f64>,
    chart: Chart,
    plane: Option<(Vec3<f64>, Vec3<f64>)>,
) -> Result<Vec3<f64>> {
    let mut x = *guess;
    for _ in 0..CORRECTOR_ITER {
        let c = constraint(spec, &x, chart)?;
        let step = match plane {
            Some((n, anchor)) => {
                let rhs = [-c.k, -c.phi, -dot(&vec3::sub(&x, &anchor), &n)];
                solve3([c.grad_k, c.grad_phi, n], rhs).ok_or(Error::RankDeficient { point: x })?
            }
            None => {
                let (a, b) = (c.grad_k, c.grad_phi);
                let (aa, ab, bb) = (dot(&a, &a), dot(&a, &b), dot(&b, &b));
                let det = aa * bb - ab * ab;
                if det <= 1e-16 * aa * bb {
                    return Err(Error::RankDeficient { point: x });
                }
                let y0 = (bb * c.k - ab * c.phi) / det;
                let y1 = (aa * c.phi - ab * c.k) / det;
                std::array::from_fn(|i| -(a[i] * y0 + b[i] * y1))
            }
        };
        x = vec3::add(&x, &step);
        if norm(&step) <= 1e-11 * (1.0 + norm(&x)) {
            let c = constraint(spec, &x, chart)?;
            if c.k.abs() < c.eps_k() && c.phi.abs() < c.eps_phi() {
                return Ok(x);
            }
        }
    }
    Err(Error::NoConvergence { iterations: CORRECTOR_ITER })
}

/// Keeps `chart` while ξ and g stay well scaled in it.
fn keep_or_switch(spec: &FieldSpec, x: &Vec3<f64>, chart: Chart) -> Result<Chart> {
    let jet = jet_at(spec, x, 1)?;
    if chart_usable(&jet.xi, chart) {
        let frame = crate::geometry::ChartFrame::from_jet(&jet, chart)?;
        if frame.g.abs() >= 1e-3 * (frame.e.abs() + frame.f.abs() + frame.g.abs()) {
            return Ok(chart);
        }
    }
    parabolic_chart(spec, x)
}

fn state_spectrum(spec: &FieldSpec, c: &Constraint, x: &Vec3<f64>) -> Result<SpectralData> {
    spectral_pair(spec, &c.state(*x))
}

fn make_sample(spec: &FieldSpec, x: &Vec3<f64>, chart: Chart, step: f64) -> Result<CurveSample> {
    let c = constraint(spec, x, chart)?;
    let sp = state_spectrum(spec, &c, x)?;
    let verdict = spectral_verdict(sp.sigma1, sp.sigma2, sp.disc);
    let delta = if verdict == super::SpectralVerdict::Hopf { hopf_delta(spec, x, chart, step).ok() } else { None };
    Ok(CurveSample {
        point: *x,
        p_lift: c.p,
        chart,
        s: 0.0,
        sigma1: sp.sigma1,
        sigma2: sp.sigma2,
        disc: sp.disc,
        phi_residual: c.phi,
        k_residual: c.k,
        class: class_from_verdict(verdict, delta),
    })
}

/// Traces one direction from a corrected seed.
fn trace_direction(
    spec: &FieldSpec,
    seed: &Vec3<f64>,
    chart: Chart,
    initial: Vec3<f64>,
    params: &TraceParams,
) -> (Vec<CurveSample>, Termination) {
    let mut out = Vec::new();
    let mut x = *seed;
    let mut chart = chart;
    let mut prev = initial;
    let h_max = 0.9 * params.step;
    let mut h = h_max;
    let domain = *spec.domain();
    while out.len() < params.max_samples {
        let c = match constraint(spec, &x, chart) {
            Ok(c) => c,
            Err(e) => return (out, Termination::Failure { point: x, message: e.to_string() }),
        };
        let Some(mut t) = rows(&c) else {
            return (out, Termination::RankDeficient { point: x });
        };
        if dot(&t, &prev) < 0.0 {
            t = vec3::scale(&t, -1.0);
        }
        let next = loop {
            let pred = vec3::axpy(&x, h, &t);
            if !domain.contains(&pred) {
                return (out, Termination::DomainExit);
            }
            let accepted = correct(spec, &pred, chart, Some((t, pred)))
                .ok()
                .filter(|y| dist(y, &x) <= params.step && dot(&vec3::sub(y, &x), &t) > 0.0);
            if let Some(y) = accepted {
                break y;
            }
            h *= 0.5;
            if h < params.step * MIN_STEP_FRACTION {
                return (out, Termination::StepFailure { point: x });
            }
        };
        if !domain.contains(&next) {
            return (out, Termination::DomainExit);
        }
        chart = match keep_or_switch(spec, &next, chart) {
            Ok(ch) => ch,
            Err(e) => return (out, Termination::Failure { point: next, message: e.to_string() }),
        };
        match make_sample(spec, &next, chart, params.step) {
            Ok(s) => out.push(s),
            Err(e) => return (out, Termination::Failure { point: next, message: e.to_string() }),
        }
        prev = vec3::sub(&next, &x);
        x = next;
        h = (2.0 * h).min(h_max);
    }
    (out, Termination::MaxSamples)
}

/// Traces the curve of special parabolic points through `seed` in both
/// directions. Transitions are left empty; see [`detect_transitions`].
pub fn trace_special_curve(spec: &FieldSpec, seed: &Vec3<f64>, params: &TraceParams) -> Result<SpecialCurve> {
    let chart = parabolic_chart(spec, seed)?;
    let x0 = match correct(spec, seed, chart, None) {
        Ok(x) => x,
        Err(Error::RankDeficient { point }) => return Err(Error::RankDeficient { point }),
        Err(_) => return Err(Error::SeedNotConverged),
    };
    let chart = parabolic_chart(spec, &x0)?;
    let c0 = constraint(spec, &x0, chart)?;
    let t0 = rows(&c0).ok_or(Error::RankDeficient { point: x0 })?;
    let first = make_sample(spec, &x0, chart, params.step)?;
    let (back, end_back) = trace_direction(spec, &x0, chart, vec3::scale(&t0, -1.0), params);
    let (fwd, end_fwd) = trace_direction(spec, &x0, chart, t0, params);
    let mut samples: Vec<CurveSample> = back.into_iter().rev().collect();
    samples.push(first);
    samples.extend(fwd);
    let mut s = 0.0;
    for i in 1..samples.len() {
        s += dist(&samples[i].point, &samples[i - 1].point);
        samples[i].s = s;
    }
    let origin = samples.iter().position(|x| x.point == x0).unwrap_or(0);
    let shift = samples[origin].s;
    for x in &mut samples {
        x.s -= shift;
    }
    Ok(SpecialCurve { samples, transitions: Vec::new(), ends: [end_back, end_fwd], params: *params })
}

fn quantity(kind: TransitionKind, s: &CurveSample) -> f64 {
    match kind {
        TransitionKind::SaddleNode => s.sigma2,
        TransitionKind::NodeFocus => s.disc,
        TransitionKind::Hopf => s.sigma1,
    }
}

/// Whether a bracketing sample satisfies the side condition of `kind`.
fn side_condition(kind: TransitionKind, s: &CurveSample) -> bool {
    let eps = eps_lambda(s.sigma1, s.sigma2);
    match kind {
        TransitionKind::SaddleNode => true,
        TransitionKind::NodeFocus => s.sigma1.abs() > eps,
        TransitionKind::Hopf => s.disc < -eps,
    }
}

/// Scans for sign changes of σ₂, disc and σ₁ between samples that are
/// clearly nonzero, skipping near-zero samples between them, and refines
/// each by bisection along the curve.
pub fn detect_transitions(spec: &FieldSpec, curve: &SpecialCurve) -> SpecialCurve {
    let mut out = curve.clone();
    out.transitions.clear();
    let samples = &curve.samples;
    for kind in [TransitionKind::SaddleNode, TransitionKind::NodeFocus, TransitionKind::Hopf] {
        let mut last: Option<usize> = None;
        for (j, s) in samples.iter().enumerate() {
            let v = quantity(kind, s);
            if v.abs() <= eps_lambda(s.sigma1, s.sigma2) {
                continue;
            }
            if let Some(i) = last {
                let a = &samples[i];
                let same_chart = samples[i..=j].iter().all(|x| x.chart == a.chart);
                if quantity(kind, a).signum() != v.signum()
                    && same_chart
                    && side_condition(kind, a)
                    && side_condition(kind, s)
                {
                    if let Some(t) = refine(spec, curve, kind, i, j) {
                        out.transitions.push(t);
                    }
                }
            }
            last = Some(j);
        }
    }
    out.transitions.sort_by_key(|t| t.interval);
    out
}

fn refine(spec: &FieldSpec, curve: &SpecialCurve, kind: TransitionKind, i: usize, j: usize) -> Option<Transition> {
    let (a, b) = (&curve.samples[i], &curve.samples[j]);
    let chart = a.chart;
    let chord = vec3::sub(&b.point, &a.point);
    let len = norm(&chord);
    let n = normalize(&chord);
    let sign_lo = quantity(kind, a).signum();
    let at = |t: f64| -> Option<(Vec3<f64>, CurveSample)> {
        let m = vec3::axpy(&a.point, t, &chord);
        let y = correct(spec, &m, chart, Some((n, m))).ok()?;
        let s = make_sample(spec, &y, chart, curve.params.step).ok()?;
        Some((y, s))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = at(0.5)?;
    while (hi - lo) * len > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        best = at(mid)?;
        let v = quantity(kind, &best.1);
        if v == 0.0 {
            break;
        }
        if v.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (point, sample) = best;
    let (delta, class) = if kind == TransitionKind::Hopf {
        let d = hopf_delta(spec, &point, chart, curve.params.step).ok();
        (d, Some(class_from_verdict(super::SpectralVerdict::Hopf, d)))
    } else {
        (None, None)
    };
    Some(Transition { interval: [i, j], kind, point, p_lift: sample.p_lift, delta, class })
}

/// δ = d(σ₁/2)/ds at a point of a special curve, by a centered difference
/// with spacing `h`. Arclength increases along 𝒜 × N with N = ξ·sign(ξ_w),
/// w being the chart's solved axis.
pub fn hopf_delta(spec: &FieldSpec, point: &Vec3<f64>, chart: Chart, h: f64) -> Result<f64> {
    let c = constraint(spec, point, chart)?;
    let mut t = rows(&c).ok_or(Error::RankDeficient { point: *point })?;
    let xi = jet_at(spec, point, 1)?.xi;
    let n = vec3::scale(&xi, xi[chart.axis].signum());
    if dot(&t, &cross(&c.a, &n)) < 0.0 {
        t = vec3::scale(&t, -1.0);
    }
    let side = |sign: f64| -> Result<(f64, f64)> {
        let m = vec3::axpy(point, sign * h, &t);
        let y = correct(spec, &m, chart, Some((t, m)))?;
        let cy = constraint(spec, &y, chart)?;
        let sp = state_spectrum(spec, &cy, &y)?;
        Ok((sign * dist(&y, point), sp.sigma1))
    };
    let (sp, up) = side(1.0)?;
    let (sm, um) = side(-1.0)?;
    Ok(0.5 * (up - um) / (sp - sm))
}
