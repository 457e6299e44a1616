//! The worked examples: their fields, golden data and scripted checks.
//!
//! Golden data lives in `fixtures/goldens.json`; every check reports a name,
//! a verdict and the measured value against its pinned tolerance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::field::{Domain, FieldSource, FieldSpec};
use crate::geometry::{chart_frame, direction_data, integrability_defect, jet_at, Chart, ChartFrame};
use crate::liecartan::spectral_pair;
use crate::parabolic::{
    classify_parabolic_point, constraint, cusp_model, detect_transitions, extract_parabolic_surface, parabolic_chart,
    trace_special_curve, Class, MeshOptions, SpecialCurve, TraceParams, TransitionKind,
};
use crate::vec3::{self, norm, Vec3};

const GOLDENS: &str = include_str!("../../../fixtures/goldens.json");

/// Example names in catalogue order.
pub const EXAMPLES: [&str; 10] = [
    "cusp",
    "saddle",
    "node",
    "focus",
    "saddle-node",
    "node-focus",
    "hopf-hyperbolic",
    "hopf-elliptic",
    "circle",
    "sphere-k",
];

/// Points sampled on each golden surface.
pub const SURFACE_SAMPLES: usize = 500;
/// |K| bound on golden surfaces.
pub const SURFACE_TOL: f64 = 1e-8;
/// Offset along the solved axis at which K must be nonzero.
pub const SURFACE_OFFSET: f64 = 1e-2;
/// Pointwise distance between traced and golden special curves.
pub const CURVE_TOL: f64 = 1e-6;
/// Distance of a refined transition from its golden location.
pub const TRANSITION_TOL: f64 = 1e-6;
/// Samples this close to a transition (in the curve parameter) are not
/// required to carry a side's class.
pub const SIDE_MARGIN: f64 = 0.02;
/// Tolerance on the eigenvalues and cusp model values.
pub const VALUE_TOL: f64 = 1e-9;
/// Residual bound on the circle.
pub const CIRCLE_TOL: f64 = 1e-8;
pub const CIRCLE_SAMPLES: usize = 360;
/// Random points for the K-polynomial proportionality check.
pub const PROPORTION_SAMPLES: usize = 1000;
/// Both values must exceed this for the ratio to be compared.
pub const PROPORTION_FLOOR: f64 = 1e-6;
/// Relative spread allowed in the ratio.
pub const PROPORTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Deserialize)]
pub struct ClosedFormSurface {
    pub expr: String,
    pub solve: String,
    /// Half-width of the sampled square in the two free coordinates.
    pub window: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ClosedFormCurve {
    pub param: String,
    pub x: String,
    pub y: String,
    pub z: String,
    pub range: [f64; 2],
    #[serde(default)]
    pub class: Option<Class>,
    /// `given` or `traced`.
    pub source: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct GoldenTransition {
    pub kind: TransitionKind,
    pub point: Vec3<f64>,
    #[serde(default)]
    pub negative_side: Option<Class>,
    #[serde(default)]
    pub positive_side: Option<Class>,
    #[serde(default)]
    pub class: Option<Class>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CuspGolden {
    pub i: f64,
    pub r: f64,
    pub points: Vec<Vec3<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct DefectGolden {
    pub point: Vec3<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Golden {
    pub field: FieldSource,
    pub surface: Option<ClosedFormSurface>,
    pub curve: Option<ClosedFormCurve>,
    #[serde(default)]
    pub transition: Option<GoldenTransition>,
    #[serde(default)]
    pub cusp_model: Option<CuspGolden>,
    #[serde(default)]
    pub eigenvalues: Option<[f64; 2]>,
    #[serde(default)]
    pub defect: Option<DefectGolden>,
    #[serde(default)]
    pub k_polynomial: Option<String>,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub euler: Option<i64>,
}

pub fn goldens() -> BTreeMap<String, Golden> {
    serde_json::from_str(GOLDENS).expect("goldens fixture is valid")
}

pub fn golden(name: &str) -> Result<Golden> {
    goldens().remove(name).ok_or_else(|| Error::FieldSpec(format!("unknown example {name:?}")))
}

pub fn example_field(name: &str) -> Result<FieldSpec> {
    FieldSpec::from_source(golden(name)?.field)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Measured value and bound, for the report line.
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }

    fn bound(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value < tol, format!("{value:e} < {tol:e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub example: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Quasi-random points in [0, 1)², from the additive recurrence with the
/// plastic-number increments.
fn lattice(n: usize) -> impl Iterator<Item = [f64; 2]> {
    const G: f64 = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / G, 1.0 / (G * G));
    (1..=n).map(move |i| [(0.5 + a1 * i as f64).fract(), (0.5 + a2 * i as f64).fract()])
}

fn axis_index(name: &str) -> Result<usize> {
    match name {
        "x" => Ok(0),
        "y" => Ok(1),
        "z" => Ok(2),
        _ => Err(Error::FieldSpec(format!("unknown axis {name:?}"))),
    }
}

fn parse_expr(text: &str) -> Result<Expr> {
    parse(text).map_err(|source| Error::Parse { component: "golden", source })
}

/// Points of a golden surface, solved for its axis by Newton's method.
fn surface_points(s: &ClosedFormSurface) -> Result<Vec<Vec3<f64>>> {
    let p = parse_expr(&s.expr)?;
    let axis = axis_index(&s.solve)?;
    let dp = crate::expr::differentiate(&p, crate::expr::Var::ALL[axis]);
    let free: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
    let mut out = Vec::with_capacity(SURFACE_SAMPLES);
    for [u, v] in lattice(SURFACE_SAMPLES) {
        let mut x = [0.0; 3];
        x[free[0]] = s.window * (2.0 * u - 1.0);
        x[free[1]] = s.window * (2.0 * v - 1.0);
        for _ in 0..50 {
            let step = p.eval::<f64>(&x)? / dp.eval::<f64>(&x)?;
            x[axis] -= step;
            if step.abs() <= 1e-15 * (1.0 + x[axis].abs()) {
                break;
            }
        }
        out.push(x);
    }
    Ok(out)
}

fn surface_checks(spec: &FieldSpec, s: &ClosedFormSurface) -> Result<Vec<Check>> {
    let pts = surface_points(s)?;
    let axis = axis_index(&s.solve)?;
    let mut worst_on = 0.0f64;
    let mut least_off = f64::INFINITY;
    for x in &pts {
        worst_on = worst_on.max(chart_frame(spec, x)?.k.abs());
        for sign in [-1.0, 1.0] {
            let mut y = *x;
            y[axis] += sign * SURFACE_OFFSET;
            least_off = least_off.min(chart_frame(spec, &y)?.k.abs());
        }
    }
    Ok(vec![
        Check::bound("surface: |K| on golden surface", worst_on, SURFACE_TOL),
        Check::new(
            "surface: K nonzero at offsets",
            least_off > SURFACE_TOL,
            format!("min |K| {least_off:e} > {SURFACE_TOL:e}"),
        ),
    ])
}

struct CurveExprs {
    param: usize,
    coords: [Expr; 3],
}

impl CurveExprs {
    fn new(c: &ClosedFormCurve) -> Result<Self> {
        Ok(Self { param: axis_index(&c.param)?, coords: [parse_expr(&c.x)?, parse_expr(&c.y)?, parse_expr(&c.z)?] })
    }

    fn at(&self, t: f64) -> Result<Vec3<f64>> {
        let mut arg = [0.0; 3];
        arg[self.param] = t;
        Ok([self.coords[0].eval(&arg)?, self.coords[1].eval(&arg)?, self.coords[2].eval(&arg)?])
    }
}

/// Traces the special curve through the golden curve's point at parameter 0,
/// restricted to the box spanned by the golden curve over its range.
fn trace_golden(spec: &FieldSpec, c: &ClosedFormCurve, exprs: &CurveExprs) -> Result<SpecialCurve> {
    let n = 200;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for k in 0..=n {
        let t = c.range[0] + (c.range[1] - c.range[0]) * k as f64 / n as f64;
        let p = exprs.at(t)?;
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let pad = 1e-3;
    let local = spec.with_domain(Domain::new(lo.map(|v| v - pad), hi.map(|v| v + pad))?);
    let width = c.range[1] - c.range[0];
    let params = TraceParams { step: width / 40.0, max_samples: 400 };
    let curve = trace_special_curve(&local, &exprs.at(0.0)?, &params)?;
    Ok(detect_transitions(&local, &curve))
}

fn curve_checks(spec: &FieldSpec, g: &Golden, c: &ClosedFormCurve) -> Result<Vec<Check>> {
    let exprs = CurveExprs::new(c)?;
    let curve = trace_golden(spec, c, &exprs)?;
    let mut checks = Vec::new();
    let worst = curve
        .samples
        .iter()
        .map(|s| exprs.at(s.point[exprs.param]).map(|p| vec3::dist(&p, &s.point)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let covered = curve.samples.first().map(|s| s.point[exprs.param]).unwrap_or(0.0)
        <= c.range[0] + 0.05 * (c.range[1] - c.range[0])
        && curve.samples.last().map(|s| s.point[exprs.param]).unwrap_or(0.0)
            >= c.range[1] - 0.05 * (c.range[1] - c.range[0]);
    let covered = covered
        || (curve.samples.last().map(|s| s.point[exprs.param]).unwrap_or(0.0)
            <= c.range[0] + 0.05 * (c.range[1] - c.range[0])
            && curve.samples.first().map(|s| s.point[exprs.param]).unwrap_or(0.0)
                >= c.range[1] - 0.05 * (c.range[1] - c.range[0]));
    checks.push(Check::new(
        format!("curve: traced samples span the {} curve", c.source),
        covered && curve.samples.len() >= 20,
        format!("{} samples", curve.samples.len()),
    ));
    checks.push(Check::bound(format!("curve: distance to the {} curve", c.source), worst, CURVE_TOL));
    if let Some(class) = c.class {
        let bad = curve.samples.iter().filter(|s| s.class != class).count();
        checks.push(Check::new(
            format!("curve: every sample is {class}"),
            bad == 0,
            format!("{bad} of {} samples differ", curve.samples.len()),
        ));
    }
    if let Some(t) = &g.transition {
        let found: Vec<_> = curve.transitions.iter().filter(|x| x.kind == t.kind).collect();
        checks.push(Check::new(
            format!("transition: exactly one {:?}", t.kind),
            found.len() == 1,
            format!("{} found ({} transitions in total)", found.len(), curve.transitions.len()),
        ));
        if let Some(tr) = found.first() {
            checks.push(Check::bound(
                format!("transition: {:?} location", t.kind),
                vec3::dist(&tr.point, &t.point),
                TRANSITION_TOL,
            ));
            if t.kind == TransitionKind::Hopf {
                let [i, j] = tr.interval;
                let (a, b) = (&curve.samples[i], &curve.samples[j]);
                checks.push(Check::new(
                    "transition: disc < 0 on both sides",
                    a.disc < 0.0 && b.disc < 0.0,
                    format!("disc {:e}, {:e}", a.disc, b.disc),
                ));
            }
            if let Some(class) = t.class {
                checks.push(Check::new(
                    format!("transition: class {class}"),
                    tr.class == Some(class),
                    format!("got {:?} with delta {:?}", tr.class, tr.delta),
                ));
            }
        }
        for (side, want) in [(-1.0, t.negative_side), (1.0, t.positive_side)] {
            let Some(want) = want else { continue };
            let on_side: Vec<_> = curve.samples.iter().filter(|s| side * s.point[exprs.param] > SIDE_MARGIN).collect();
            let bad = on_side.iter().filter(|s| s.class != want).count();
            let label = if side < 0.0 { "negative" } else { "positive" };
            checks.push(Check::new(
                format!("transition: {label} side is {want}"),
                bad == 0 && !on_side.is_empty(),
                format!("{bad} of {} samples differ", on_side.len()),
            ));
        }
    }
    Ok(checks)
}

fn cusp_checks(spec: &FieldSpec, g: &CuspGolden) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut wrong = 0;
    for [u, v] in lattice(50) {
        let p = [0.0, 2.0 * u - 1.0, 2.0 * v - 1.0];
        if classify_parabolic_point(spec, &p)?.class != Class::ParabolicCuspidal {
            wrong += 1;
        }
    }
    checks.push(Check::new("classification: x = 0 is cuspidal", wrong == 0, format!("{wrong} of 50 differ")));
    for p in &g.points {
        let m = cusp_model(spec, p)?;
        let err = (m.i - g.i).abs().max((m.r - g.r).abs());
        checks.push(Check::bound(format!("cusp model (I, R) at {p:?}"), err, VALUE_TOL));
    }
    Ok(checks)
}

fn eigen_checks(spec: &FieldSpec, want: [f64; 2]) -> Result<Vec<Check>> {
    let p = [0.0; 3];
    let c = constraint(spec, &p, parabolic_chart(spec, &p)?)?;
    let sp = spectral_pair(spec, &c.state(p))?;
    let mut got = [sp.lambda[0].0, sp.lambda[1].0];
    got.sort_by(|a, b| b.total_cmp(a));
    let err = (got[0] - want[0]).abs().max((got[1] - want[1]).abs()).max(sp.lambda[0].1.abs());
    let closed = sp.sigma1_closed;
    let disc = closed * closed - 4.0 * sp.sigma2;
    let r = disc.max(0.0).sqrt();
    let from_closed = [0.5 * (closed + r), 0.5 * (closed - r)];
    let err_closed = (from_closed[0] - want[0]).abs().max((from_closed[1] - want[1]).abs());
    Ok(vec![
        Check::bound("spectrum: eigenvalues from the Jacobian", err, VALUE_TOL),
        Check::bound("spectrum: eigenvalues from the closed-form trace", err_closed, VALUE_TOL),
    ])
}

fn circle_checks(spec: &FieldSpec, d: &DefectGolden) -> Result<Vec<Check>> {
    let mut tangency = 0.0f64;
    let mut asymptotic = 0.0f64;
    for k in 0..CIRCLE_SAMPLES {
        let th = std::f64::consts::TAU * k as f64 / CIRCLE_SAMPLES as f64;
        let p = [th.cos(), th.sin(), 0.0];
        let t = [-th.sin(), th.cos(), 0.0];
        let jet = jet_at(spec, &p, 1)?;
        tangency = tangency.max(vec3::dot(&jet.xi, &t).abs() / norm(&jet.xi));
        asymptotic = asymptotic.max(direction_data(spec, &p, &t)?.kn.abs());
    }
    let (_, defect) = integrability_defect(spec, &d.point)?;
    Ok(vec![
        Check::bound("circle: tangency residual", tangency, CIRCLE_TOL),
        Check::bound("circle: normal curvature residual", asymptotic, CIRCLE_TOL),
        Check::new("circle: defect is nonzero", defect.abs() > 0.5, format!("{defect}")),
        Check::bound("circle: defect value", (defect - d.value).abs(), VALUE_TOL),
    ])
}

fn sphere_checks(spec: &FieldSpec, g: &Golden) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let resolution = g.resolution.unwrap_or(64);
    let mesh = extract_parabolic_surface(spec, spec.domain(), resolution, &MeshOptions { classify: false })?;
    let closed: Vec<_> = mesh.components.iter().filter(|c| c.is_closed()).collect();
    let want = g.euler.unwrap_or(2);
    checks.push(Check::new(
        format!("topology: a closed component with Euler characteristic {want}"),
        closed.iter().any(|c| c.euler == want),
        format!("closed components: {:?}", closed.iter().map(|c| (c.euler, c.triangles)).collect::<Vec<_>>()),
    ));
    checks.push(Check::new(
        "topology: manifold mesh",
        mesh.nonmanifold_edges == 0,
        format!("{} non-manifold edges", mesh.nonmanifold_edges),
    ));
    if let Some(text) = &g.k_polynomial {
        let poly = parse_expr(text)?;
        let half = spec.domain().extent()[0] / 2.0;
        let mut sign_bad = 0;
        let mut ratios = Vec::new();
        for k in 0..PROPORTION_SAMPLES {
            // Three-dimensional additive recurrence.
            const G: f64 = 1.220_744_084_605_759_5;
            let a = [1.0 / G, 1.0 / (G * G), 1.0 / (G * G * G)];
            let p: Vec3<f64> = std::array::from_fn(|i| half * (2.0 * (0.5 + a[i] * (k + 1) as f64).fract() - 1.0));
            let kc = ChartFrame::from_jet(&jet_at(spec, &p, 1)?, Chart::CANONICAL)?.k;
            let kp: f64 = poly.eval(&p)?;
            if kc.abs() > PROPORTION_FLOOR && kp.abs() > PROPORTION_FLOOR {
                if kc.signum() != kp.signum() {
                    sign_bad += 1;
                }
                ratios.push(kp / kc);
            }
        }
        checks.push(Check::new(
            "proportionality: signs agree",
            sign_bad == 0,
            format!("{sign_bad} of {} differ", ratios.len()),
        ));
        let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        let spread = ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
        checks.push(Check::bound(format!("proportionality: ratio spread (ratio {mean:.6})"), spread, PROPORTION_TOL));
    }
    Ok(checks)
}

/// Only the golden-surface checks of an example.
pub fn surface_report(name: &str) -> Result<Report> {
    let g = golden(name)?;
    let spec = FieldSpec::from_source(g.field.clone())?;
    let checks = match &g.surface {
        Some(s) => surface_checks(&spec, s)?,
        None => Vec::new(),
    };
    Ok(Report { example: name.to_string(), checks })
}

/// Runs every golden check of an example.
pub fn reproduce(name: &str) -> Result<Report> {
    let g = golden(name)?;
    let spec = FieldSpec::from_source(g.field.clone())?;
    let mut checks = Vec::new();
    if let Some(s) = &g.surface {
        checks.extend(surface_checks(&spec, s)?);
    }
    if let Some(c) = &g.cusp_model {
        checks.extend(cusp_checks(&spec, c)?);
    }
    if let Some(want) = g.eigenvalues {
        checks.extend(eigen_checks(&spec, want)?);
    }
    if let Some(c) = &g.curve {
        checks.extend(curve_checks(&spec, &g, c)?);
    }
    if let Some(d) = &g.defect {
        checks.extend(circle_checks(&spec, d)?);
    }
    if g.k_polynomial.is_some() || g.euler.is_some() {
        checks.extend(sphere_checks(&spec, &g)?);
    }
    Ok(Report { example: name.to_string(), checks })
}
