//! Parabolic points: projection onto K = 0, the special-point defect
//! φ = ⟨∇K, 𝒜⟩, classification, special curves and surface extraction.

mod curve;
mod mesh;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{coefficient_jets, jet_at, Chart, ChartFrame, EPS_XI};
use crate::jet::Grad;
use crate::liecartan::{spectral_pair, LieCartanState, SpectralData};
use crate::vec3::{self, norm, Vec3};

pub use curve::{
    detect_transitions, hopf_delta, trace_special_curve, CurveSample, SpecialCurve, Termination, TraceParams,
    Transition, TransitionKind,
};
pub use mesh::{extract_parabolic_surface, MeshComponent, MeshOptions, ParabolicMesh, VertexData};

/// Lower bound on |∇K| for Newton projection and surface regularity.
pub const EPS_GRAD: f64 = 1e-8;

/// Tolerance on φ = ⟨∇K, 𝒜⟩ for special points.
pub fn eps_phi(grad_k: &Vec3<f64>, a: &Vec3<f64>) -> f64 {
    1e-8 * (1.0 + norm(grad_k) * norm(a))
}

/// Tolerance for spectral sign decisions.
pub fn eps_lambda(sigma1: f64, sigma2: f64) -> f64 {
    1e-6 * (1.0 + sigma1.abs() + sigma2.abs().sqrt())
}

/// Point classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    Elliptic,
    Hyperbolic,
    ParabolicCuspidal,
    ParabolicSaddle,
    ParabolicNode,
    ParabolicFocus,
    ParabolicSaddleNode,
    ParabolicNodeFocus,
    ParabolicHopfHyperbolic,
    ParabolicHopfElliptic,
    ParabolicDegenerate,
    SingularXi,
}

impl Class {
    pub fn name(self) -> &'static str {
        match self {
            Class::Elliptic => "Elliptic",
            Class::Hyperbolic => "Hyperbolic",
            Class::ParabolicCuspidal => "ParabolicCuspidal",
            Class::ParabolicSaddle => "ParabolicSaddle",
            Class::ParabolicNode => "ParabolicNode",
            Class::ParabolicFocus => "ParabolicFocus",
            Class::ParabolicSaddleNode => "ParabolicSaddleNode",
            Class::ParabolicNodeFocus => "ParabolicNodeFocus",
            Class::ParabolicHopfHyperbolic => "ParabolicHopfHyperbolic",
            Class::ParabolicHopfElliptic => "ParabolicHopfElliptic",
            Class::ParabolicDegenerate => "ParabolicDegenerate",
            Class::SingularXi => "SingularXi",
        }
    }

    /// Special classes, i.e. singular points of the lifted field.
    pub fn is_special(self) -> bool {
        matches!(
            self,
            Class::ParabolicSaddle
                | Class::ParabolicNode
                | Class::ParabolicFocus
                | Class::ParabolicSaddleNode
                | Class::ParabolicNodeFocus
                | Class::ParabolicHopfHyperbolic
                | Class::ParabolicHopfElliptic
        )
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The quantities a classification was decided from.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Evidence {
    /// Point the later stages were evaluated at (after projection).
    pub point: Vec3<f64>,
    pub k: Option<f64>,
    pub phi: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub disc: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub class: Class,
    pub evidence: Evidence,
}

/// Outcome of the spectral stage of the decision tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralVerdict {
    Saddle,
    Node,
    Focus,
    SaddleNode,
    NodeFocus,
    Hopf,
    Degenerate,
}

/// The spectral branch of the decision tree, in its documented order.
pub fn spectral_verdict(sigma1: f64, sigma2: f64, disc: f64) -> SpectralVerdict {
    let eps = eps_lambda(sigma1, sigma2);
    if sigma2 < -eps {
        SpectralVerdict::Saddle
    } else if sigma2 > eps && disc > eps {
        SpectralVerdict::Node
    } else if disc < -eps && sigma1.abs() > eps {
        SpectralVerdict::Focus
    } else if sigma2.abs() <= eps && sigma1.abs() > eps {
        SpectralVerdict::SaddleNode
    } else if disc.abs() <= eps && sigma1.abs() > eps {
        SpectralVerdict::NodeFocus
    } else if sigma1.abs() <= eps && disc < -eps {
        SpectralVerdict::Hopf
    } else {
        SpectralVerdict::Degenerate
    }
}

/// Maps a spectral verdict to a class; Hopf points need the sign of δ.
pub fn class_from_verdict(v: SpectralVerdict, delta: Option<f64>) -> Class {
    match v {
        SpectralVerdict::Saddle => Class::ParabolicSaddle,
        SpectralVerdict::Node => Class::ParabolicNode,
        SpectralVerdict::Focus => Class::ParabolicFocus,
        SpectralVerdict::SaddleNode => Class::ParabolicSaddleNode,
        SpectralVerdict::NodeFocus => Class::ParabolicNodeFocus,
        SpectralVerdict::Hopf => match delta {
            Some(d) if d > 0.0 => Class::ParabolicHopfHyperbolic,
            Some(d) if d < 0.0 => Class::ParabolicHopfElliptic,
            _ => Class::ParabolicDegenerate,
        },
        SpectralVerdict::Degenerate => Class::ParabolicDegenerate,
    }
}

/// Chart for parabolic work at `point`: the selected chart, with u and v
/// exchanged when |g| < |e| so that the lift p = −f/g is well conditioned.
pub fn parabolic_chart(spec: &FieldSpec, point: &Vec3<f64>) -> Result<Chart> {
    let jet = jet_at(spec, point, 1)?;
    let chart = Chart::select(&jet.xi);
    let frame = ChartFrame::from_jet(&jet, chart)?;
    Ok(if frame.g.abs() >= frame.e.abs() { chart } else { chart.swap() })
}

/// K, φ and the asymptotic data at a point, in a fixed chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub chart: Chart,
    pub k: f64,
    pub grad_k: Vec3<f64>,
    pub phi: f64,
    pub grad_phi: Vec3<f64>,
    /// Lift p = −f/g in `chart`.
    pub p: f64,
    /// 𝒜 = (1, p, q) in chart coordinates, as a world vector.
    pub a: Vec3<f64>,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl Constraint {
    pub fn eps_k(&self) -> f64 {
        crate::geometry::eps_k(self.e, self.f, self.g)
    }

    pub fn eps_phi(&self) -> f64 {
        eps_phi(&self.grad_k, &self.a)
    }

    pub fn state(&self, point: Vec3<f64>) -> LieCartanState {
        LieCartanState::in_chart(point, self.p, self.chart)
    }
}

/// Evaluates (K, φ) and their gradients in `chart`.
pub fn constraint(spec: &FieldSpec, point: &Vec3<f64>, chart: Chart) -> Result<Constraint> {
    let jet = jet_at(spec, point, 3)?;
    let c = coefficient_jets(&jet, chart)?;
    let k = c.e.clone() * c.g.clone() - c.f.clone() * c.f.clone();
    let grad = |j: &crate::jet::Jet<f64>| Grad { v: j.v, g: j.g };
    let (f, g) = (grad(&c.f), grad(&c.g));
    if g.v == 0.0 {
        return Err(Error::ChartMismatch { axis: chart.axis, point: *point });
    }
    let p = -(f / g);
    let q = grad(&c.alpha) + grad(&c.beta) * p.clone();
    let dk = |j: usize| Grad { v: k.g[j], g: k.h[j] };
    let phi = dk(0) + p.clone() * dk(1) + q.clone() * dk(2);
    Ok(Constraint {
        chart,
        k: k.v,
        grad_k: chart.to_world(&k.g),
        phi: phi.v,
        grad_phi: chart.to_world(&phi.g),
        p: p.v,
        a: chart.to_world(&[1.0, p.v, q.v]),
        e: c.e.v,
        f: c.f.v,
        g: c.g.v,
    })
}

/// Newton projection onto K = 0 along ∇K, in the chart selected at `guess`.
pub fn project_to_parabolic(spec: &FieldSpec, guess: &Vec3<f64>) -> Result<Vec3<f64>> {
    let chart = Chart::select(&jet_at(spec, guess, 1)?.xi);
    project_in_chart(spec, guess, chart)
}

pub(crate) fn project_in_chart(spec: &FieldSpec, guess: &Vec3<f64>, chart: Chart) -> Result<Vec3<f64>> {
    const MAX_ITER: usize = 25;
    let mut x = *guess;
    for _ in 0..MAX_ITER {
        let (k, grad) = crate::geometry::k_gradient(spec, &x, chart)?;
        if k == 0.0 {
            return Ok(x);
        }
        let g2 = vec3::dot(&grad, &grad);
        if g2.sqrt() <= EPS_GRAD {
            return Err(Error::DegenerateGradient { point: x });
        }
        let step = vec3::scale(&grad, -k / g2);
        x = vec3::add(&x, &step);
        if norm(&step) <= 1e-14 * (1.0 + norm(&x)) {
            let frame = crate::geometry::chart_frame_in(spec, &x, chart)?;
            if frame.k.abs() < frame.eps_k() {
                return Ok(x);
            }
        }
    }
    let frame = crate::geometry::chart_frame_in(spec, &x, chart)?;
    if frame.k.abs() < frame.eps_k() {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: MAX_ITER })
    }
}

/// φ = ⟨∇K, 𝒜⟩ and 𝒜 at a parabolic point.
pub fn special_defect(spec: &FieldSpec, point: &Vec3<f64>) -> Result<(f64, Vec3<f64>)> {
    let chart = parabolic_chart(spec, point)?;
    let c = constraint(spec, point, chart)?;
    if c.e.abs() + c.f.abs() + c.g.abs() <= 1e-9 {
        return Err(Error::DegenerateDirections { point: *point });
    }
    if c.k.abs() >= c.eps_k() {
        return Err(Error::NotParabolic { k: c.k });
    }
    Ok((c.phi, c.a))
}

/// Decision tree for the class of a point.
pub fn classify_parabolic_point(spec: &FieldSpec, point: &Vec3<f64>) -> Result<Classification> {
    classify_with(spec, point, true)
}

/// As [`classify_parabolic_point`]; `resolve_hopf` controls whether Hopf
/// points trace a short stretch of their special curve to fix the sign of δ.
pub(crate) fn classify_with(spec: &FieldSpec, point: &Vec3<f64>, resolve_hopf: bool) -> Result<Classification> {
    let mut ev = Evidence { point: *point, ..Default::default() };
    let jet = match jet_at(spec, point, 1) {
        Ok(j) => j,
        Err(Error::SingularXi { .. }) => return Ok(Classification { class: Class::SingularXi, evidence: ev }),
        Err(e) => return Err(e),
    };
    let chart = Chart::select(&jet.xi);
    let frame = ChartFrame::from_jet(&jet, chart)?;
    ev.k = Some(frame.k);
    let eps = frame.eps_k();
    if frame.k > eps {
        return Ok(Classification { class: Class::Elliptic, evidence: ev });
    }
    if frame.k < -eps {
        return Ok(Classification { class: Class::Hyperbolic, evidence: ev });
    }
    if frame.is_degenerate() {
        return Ok(Classification { class: Class::ParabolicDegenerate, evidence: ev });
    }
    let x = match project_in_chart(spec, point, chart) {
        Ok(x) => x,
        Err(Error::DegenerateGradient { .. }) => *point,
        Err(e) => return Err(e),
    };
    ev.point = x;
    let chart = parabolic_chart(spec, &x)?;
    let c = constraint(spec, &x, chart)?;
    ev.k = Some(c.k);
    ev.phi = Some(c.phi);
    if c.e.abs() + c.f.abs() + c.g.abs() <= 1e-9 {
        return Ok(Classification { class: Class::ParabolicDegenerate, evidence: ev });
    }
    if c.phi.abs() > c.eps_phi() {
        return Ok(Classification { class: Class::ParabolicCuspidal, evidence: ev });
    }
    let sp: SpectralData = spectral_pair(spec, &c.state(x))?;
    ev.sigma1 = Some(sp.sigma1);
    ev.sigma2 = Some(sp.sigma2);
    ev.disc = Some(sp.disc);
    let verdict = spectral_verdict(sp.sigma1, sp.sigma2, sp.disc);
    if verdict == SpectralVerdict::Hopf && resolve_hopf {
        ev.delta = hopf_delta(spec, &x, chart, 1e-3).ok();
    }
    Ok(Classification { class: class_from_verdict(verdict, ev.delta), evidence: ev })
}

/// Parameters (I, R) of the cuspidal normal form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CuspModel {
    /// |∇K| |𝒜| cos θ = ⟨∇K, 𝒜⟩.
    pub i: f64,
    /// ⟨curl ξ, ξ⟩.
    pub r: f64,
}

pub fn cusp_model(spec: &FieldSpec, point: &Vec3<f64>) -> Result<CuspModel> {
    let cls = classify_with(spec, point, false)?;
    let phi = cls.evidence.phi.unwrap_or(0.0);
    if cls.class != Class::ParabolicCuspidal {
        return Err(Error::NotCuspidal { phi });
    }
    let jet = jet_at(spec, &cls.evidence.point, 1)?;
    Ok(CuspModel { i: phi, r: jet.defect() })
}

/// `true` when ξ is large enough in `chart`'s solved axis at `point`.
pub(crate) fn chart_usable(xi: &Vec3<f64>, chart: Chart) -> bool {
    xi[chart.axis].abs() >= 1e3 * EPS_XI.max(1e-9 * norm(xi))
}
