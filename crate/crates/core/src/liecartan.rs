//! The Lie–Cartan lift of the asymptotic equation.
//!
//! In a chart (u, v, w) with slope p = dv/du, asymptotic directions are the
//! zeros of F = e + 2fp + gp² and the Pfaffian gives dw = q du with
//! q = α + βp. The lifted field
//!
//! ```text
//! X = (F_p, p F_p, q F_p, −(F_u + p F_v + q F_w))
//! ```
//!
//! is tangent to {F = 0} and has F as a first integral. Its zeros lie on the
//! criminant {F = F_p = 0}, and there the Jacobian has characteristic
//! polynomial λ²(λ² − σ₁λ + σ₂).
//!
//! Swapping u and v gives the second chart G(q) = e q² + 2f q + g with
//! q = 1/p, used where the slope is near vertical.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::{coefficient_grads, coefficient_jets, jet_at, Chart, Coefficients};
use crate::jet::{Grad, Jet};
use crate::scalar::Scalar;
use crate::vec3::Vec3;

/// A point (x, y, z) with a slope p in `chart`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LieCartanState {
    pub point: Vec3<f64>,
    pub p: f64,
    pub chart: Chart,
}

impl LieCartanState {
    pub fn new(point: Vec3<f64>, p: f64) -> Self {
        Self { point, p, chart: Chart::CANONICAL }
    }

    pub fn in_chart(point: Vec3<f64>, p: f64, chart: Chart) -> Self {
        Self { point, p, chart }
    }

    /// Same line element in the chart with u and v exchanged.
    pub fn swapped(&self) -> Option<Self> {
        (self.p != 0.0).then(|| Self { point: self.point, p: 1.0 / self.p, chart: self.chart.swap() })
    }

    /// World-frame tangent (du, dv, q du) of the line element, with du = 1.
    pub fn direction(&self, q: f64) -> Vec3<f64> {
        self.chart.to_world(&[1.0, self.p, q])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.point[0], self.point[1], self.point[2], self.p]
    }
}

/// F, F_p and q at a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FValue {
    pub f: f64,
    pub fp: f64,
    pub q: f64,
}

/// Scale-adjusted tolerance on F and F_p.
pub fn eps_f(c: &Coefficients<f64>) -> f64 {
    1e-9 * (1.0 + c.e.abs() + c.f.abs() + c.g.abs())
}

/// First-order quantities in chart coordinates.
#[derive(Clone, Debug)]
pub(crate) struct FirstTerms<T> {
    pub f: T,
    pub fp: T,
    pub fpp: T,
    /// ∂F/∂(u, v, w).
    pub fx: [T; 3],
    pub q: T,
    pub qp: T,
    pub coeffs: Coefficients<T>,
}

/// First and second order quantities in chart coordinates.
#[derive(Clone, Debug)]
pub(crate) struct SecondTerms<T> {
    pub first: FirstTerms<T>,
    /// ∂F_p/∂(u, v, w).
    pub fpx: [T; 3],
    pub fxx: [[T; 3]; 3],
    pub qx: [T; 3],
}

fn values<T: Scalar>(c: &Coefficients<Grad<T>>) -> Coefficients<T> {
    Coefficients {
        e: c.e.v.clone(),
        f: c.f.v.clone(),
        g: c.g.v.clone(),
        alpha: c.alpha.v.clone(),
        beta: c.beta.v.clone(),
    }
}

fn first_from<T: Scalar>(c: &Coefficients<Grad<T>>, p: &T) -> FirstTerms<T> {
    let two = T::from_int(2);
    let pp = p.clone() * p.clone();
    let v = values(c);
    let f = v.e.clone() + two.clone() * v.f.clone() * p.clone() + v.g.clone() * pp.clone();
    let fp = two.clone() * (v.f.clone() + v.g.clone() * p.clone());
    let fpp = two.clone() * v.g.clone();
    let fx = std::array::from_fn(|j| {
        c.e.g[j].clone() + two.clone() * c.f.g[j].clone() * p.clone() + c.g.g[j].clone() * pp.clone()
    });
    let q = v.alpha.clone() + v.beta.clone() * p.clone();
    let qp = v.beta.clone();
    FirstTerms { f, fp, fpp, fx, q, qp, coeffs: v }
}

pub(crate) fn first_terms<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>, p: &T, chart: Chart) -> Result<FirstTerms<T>> {
    let jet = jet_at(spec, point, 2)?;
    Ok(first_from(&coefficient_grads(&jet, chart)?, p))
}

pub(crate) fn second_terms<T: Scalar>(
    spec: &FieldSpec,
    point: &Vec3<T>,
    p: &T,
    chart: Chart,
) -> Result<SecondTerms<T>> {
    let jet = jet_at(spec, point, 3)?;
    let c: Coefficients<Jet<T>> = coefficient_jets(&jet, chart)?;
    let grads = Coefficients {
        e: Grad { v: c.e.v.clone(), g: c.e.g.clone() },
        f: Grad { v: c.f.v.clone(), g: c.f.g.clone() },
        g: Grad { v: c.g.v.clone(), g: c.g.g.clone() },
        alpha: Grad { v: c.alpha.v.clone(), g: c.alpha.g.clone() },
        beta: Grad { v: c.beta.v.clone(), g: c.beta.g.clone() },
    };
    let first = first_from(&grads, p);
    let two = T::from_int(2);
    let pp = p.clone() * p.clone();
    let fpx = std::array::from_fn(|j| two.clone() * (c.f.g[j].clone() + c.g.g[j].clone() * p.clone()));
    let fxx = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            c.e.h[j][k].clone() + two.clone() * c.f.h[j][k].clone() * p.clone() + c.g.h[j][k].clone() * pp.clone()
        })
    });
    let qx = std::array::from_fn(|j| c.alpha.g[j].clone() + c.beta.g[j].clone() * p.clone());
    Ok(SecondTerms { first, fpx, fxx, qx })
}

impl<T: Scalar> FirstTerms<T> {
    /// The lifted field in chart order (u, v, w, p).
    pub fn field(&self, p: &T) -> [T; 4] {
        let fp = self.fp.clone();
        [
            fp.clone(),
            p.clone() * fp.clone(),
            self.q.clone() * fp,
            -(self.fx[0].clone() + p.clone() * self.fx[1].clone() + self.q.clone() * self.fx[2].clone()),
        ]
    }
}

impl<T: Scalar> SecondTerms<T> {
    /// Jacobian of the lifted field in chart order (u, v, w, p).
    pub fn jacobian(&self, p: &T) -> [[T; 4]; 4] {
        let t = &self.first;
        let zero = || T::zero();
        let row0: [T; 4] = [self.fpx[0].clone(), self.fpx[1].clone(), self.fpx[2].clone(), t.fpp.clone()];
        let mut m: [[T; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero()));
        for j in 0..4 {
            m[0][j] = row0[j].clone();
            m[1][j] = p.clone() * row0[j].clone();
            m[2][j] = t.q.clone() * row0[j].clone();
        }
        m[1][3] = m[1][3].clone() + t.fp.clone();
        for j in 0..3 {
            m[2][j] = m[2][j].clone() + t.fp.clone() * self.qx[j].clone();
        }
        m[2][3] = m[2][3].clone() + t.fp.clone() * t.qp.clone();
        for j in 0..3 {
            m[3][j] = -(self.fxx[0][j].clone()
                + p.clone() * self.fxx[1][j].clone()
                + self.qx[j].clone() * t.fx[2].clone()
                + t.q.clone() * self.fxx[2][j].clone());
        }
        m[3][3] = -(self.fpx[0].clone()
            + t.fx[1].clone()
            + p.clone() * self.fpx[1].clone()
            + t.qp.clone() * t.fx[2].clone()
            + t.q.clone() * self.fpx[2].clone());
        m
    }
}

/// Reorders a chart-ordered (u, v, w, p) vector into (x, y, z, p).
pub fn vec4_to_world<T: Clone>(chart: Chart, v: &[T; 4]) -> [T; 4] {
    let s = chart.to_world(&[v[0].clone(), v[1].clone(), v[2].clone()]);
    [s[0].clone(), s[1].clone(), s[2].clone(), v[3].clone()]
}

/// Reorders a chart-ordered 4×4 matrix into (x, y, z, p) order.
pub fn mat4_to_world<T: Clone>(chart: Chart, m: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    let perm = chart.perm();
    let idx = |k: usize| if k < 3 { perm[k] } else { 3 };
    let mut out = m.clone();
    for i in 0..4 {
        for j in 0..4 {
            out[idx(i)][idx(j)] = m[i][j].clone();
        }
    }
    out
}

pub fn f_value(spec: &FieldSpec, state: &LieCartanState) -> Result<FValue> {
    let t = first_terms(spec, &state.point, &state.p, state.chart)?;
    Ok(FValue { f: t.f, fp: t.fp, q: t.q })
}

/// The lifted field in world order (ẋ, ẏ, ż, ṗ).
pub fn lie_cartan_field(spec: &FieldSpec, state: &LieCartanState) -> Result<[f64; 4]> {
    let t = first_terms(spec, &state.point, &state.p, state.chart)?;
    Ok(vec4_to_world(state.chart, &t.field(&state.p)))
}

fn check_criminant(t: &FirstTerms<f64>) -> Result<()> {
    let eps = eps_f(&t.coeffs);
    if t.f.abs() < eps && t.fp.abs() < eps {
        Ok(())
    } else {
        Err(Error::NotOnCriminant { f: t.f, fp: t.fp })
    }
}

/// Jacobian of the lifted field at a criminant state, in world order.
pub fn jacobian_on_criminant(spec: &FieldSpec, state: &LieCartanState) -> Result<[[f64; 4]; 4]> {
    let t = second_terms(spec, &state.point, &state.p, state.chart)?;
    check_criminant(&t.first)?;
    Ok(mat4_to_world(state.chart, &t.jacobian(&state.p)))
}

/// Projects onto {F = 0} along ∇F.
pub fn project_to_lie_cartan(spec: &FieldSpec, state: &LieCartanState) -> Result<LieCartanState> {
    let mut s = *state;
    for _ in 0..25 {
        let t = first_terms(spec, &s.point, &s.p, s.chart)?;
        let grad = vec4_to_world(s.chart, &[t.fx[0], t.fx[1], t.fx[2], t.fp]);
        let n2: f64 = grad.iter().map(|g| g * g).sum();
        if t.f.abs() < 1e-14 * (1.0 + n2.sqrt()) {
            return Ok(s);
        }
        if n2 == 0.0 {
            return Err(Error::DegenerateGradient { point: s.point });
        }
        let k = t.f / n2;
        let step: [f64; 4] = std::array::from_fn(|i| -k * grad[i]);
        s.point = std::array::from_fn(|i| s.point[i] + step[i]);
        s.p += step[3];
        if step.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-15 {
            return Ok(s);
        }
    }
    Err(Error::NoConvergence { iterations: 25 })
}

/// Projects onto the criminant {F = F_p = 0} by minimum-norm Newton steps in
/// (x, y, z, p).
pub fn project_to_criminant(spec: &FieldSpec, state: &LieCartanState) -> Result<LieCartanState> {
    const MAX_ITER: usize = 25;
    let mut s = *state;
    for _ in 0..MAX_ITER {
        let t = second_terms(spec, &s.point, &s.p, s.chart)?;
        let r = [t.first.f, t.first.fp];
        let j0 = vec4_to_world(s.chart, &[t.first.fx[0], t.first.fx[1], t.first.fx[2], t.first.fp]);
        let j1 = vec4_to_world(s.chart, &[t.fpx[0], t.fpx[1], t.fpx[2], t.first.fpp]);
        let d = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| a[i] * b[i]).sum::<f64>();
        let (a, b, c) = (d(&j0, &j0), d(&j0, &j1), d(&j1, &j1));
        let det = a * c - b * b;
        if det.abs() <= 1e-24 * (a * c).max(1e-300) {
            return Err(Error::DegenerateGradient { point: s.point });
        }
        let y0 = (c * r[0] - b * r[1]) / det;
        let y1 = (a * r[1] - b * r[0]) / det;
        let step: [f64; 4] = std::array::from_fn(|i| -(j0[i] * y0 + j1[i] * y1));
        s.point = std::array::from_fn(|i| s.point[i] + step[i]);
        s.p += step[3];
        let size = step.iter().map(|v| v * v).sum::<f64>().sqrt();
        if size < 1e-12 {
            let t = first_terms(spec, &s.point, &s.p, s.chart)?;
            check_criminant(&t)?;
            return Ok(s);
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITER })
}

/// A complex number as (re, im).
pub type Complex = (f64, f64);

/// Spectrum of the nontrivial eigenpair at a criminant state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    pub sigma1: f64,
    pub sigma2: f64,
    pub disc: f64,
    pub lambda: [Complex; 2],
    /// Real eigenvectors in world order (x, y, z, p), present when the pair is
    /// real and F_pp ≠ 0.
    pub eigvecs: Option<[[f64; 4]; 2]>,
    /// −(F_v + q_p F_w) in the state's chart.
    pub sigma1_closed: f64,
}

/// Sum of the principal 2×2 minors.
pub fn sum_principal_minors(m: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            s += m[i][i] * m[j][j] - m[i][j] * m[j][i];
        }
    }
    s
}

pub fn spectral_pair(spec: &FieldSpec, state: &LieCartanState) -> Result<SpectralData> {
    let t = second_terms(spec, &state.point, &state.p, state.chart)?;
    check_criminant(&t.first)?;
    let m = t.jacobian(&state.p);
    let sigma1: f64 = (0..4).map(|i| m[i][i]).sum();
    let sigma2 = sum_principal_minors(&m);
    let disc = sigma1 * sigma1 - 4.0 * sigma2;
    let lambda = if disc >= 0.0 {
        let r = disc.sqrt();
        // Larger root first; the product form avoids cancellation.
        let big = 0.5 * (sigma1 + sigma1.signum() * r);
        let small = if big != 0.0 { sigma2 / big } else { 0.0 };
        let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
        [(l1, 0.0), (l2, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [(0.5 * sigma1, im), (0.5 * sigma1, -im)]
    };
    let first = &t.first;
    let sigma1_closed = -(first.fx[1] + first.qp * first.fx[2]);
    let eigvecs = if disc >= 0.0 && first.fpp != 0.0 {
        let base = t.fpx[0] + state.p * t.fpx[1] + first.q * t.fpx[2];
        let mut out = [[0.0; 4]; 2];
        for (k, (l, _)) in lambda.iter().enumerate() {
            let v = [1.0, state.p, first.q, (l - base) / first.fpp];
            let mv: [f64; 4] = std::array::from_fn(|i| (0..4).map(|j| m[i][j] * v[j]).sum());
            let scale = 1.0 + m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let residual = (0..4).map(|i| (mv[i] - l * v[i]).powi(2)).sum::<f64>().sqrt();
            if residual > 1e-7 * scale * vn {
                return Err(Error::IntegrationFailure(format!("eigenvector check failed (residual {residual:e})")));
            }
            out[k] = vec4_to_world(state.chart, &v);
        }
        Some(out)
    } else {
        None
    };
    Ok(SpectralData { sigma1, sigma2, disc, lambda, eigvecs, sigma1_closed })
}

/// The closed-form discriminant of the nontrivial pair, transcribed with
/// the `A + pB + qC` reading of its last term. It agrees with σ₁² − 4σ₂ only
/// where ξ = (0, 0, 1) and p = q = 0; elsewhere it is not an identity.
pub fn omega_closed_form(spec: &FieldSpec, state: &LieCartanState) -> Result<f64> {
    let t = second_terms(spec, &state.point, &state.p, state.chart)?;
    let f = &t.first;
    let p = state.p;
    let q = f.q;
    let (fy, fz) = (f.fx[1], f.fx[2]);
    let (fpx, fpy, fpz) = (t.fpx[0], t.fpx[1], t.fpx[2]);
    let row = |j: usize| -(t.fxx[0][j] + p * t.fxx[1][j] + t.qx[j] * fz + q * t.fxx[2][j]);
    let (a, b, c) = (row(0), row(1), row(2));
    Ok(fy * fy
        + 4.0 * (p * fpy + q * fpz) * fy
        + 4.0 * fpx * fpx
        + 4.0 * (fy + 2.0 * p * fpy + 2.0 * q * fpz) * fpx
        + 4.0 * (p * p * fpy * fpy + 2.0 * p * q * fpy * fpz + q * q * fpz * fpz + (a + p * b + q * c) * f.fpp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Domain;

    fn field(a: &str, b: &str) -> FieldSpec {
        FieldSpec::new(a, b, "1", Domain::cube(2.0)).unwrap()
    }

    fn saddle() -> FieldSpec {
        field("x*y - y", "x + y")
    }

    #[test]
    fn f_value_examples() {
        let s = saddle();
        let v = f_value(&s, &LieCartanState::new([0.0; 3], 0.0)).unwrap();
        assert_eq!((v.f, v.fp, v.q), (0.0, 0.0, 0.0));
        let v = f_value(&s, &LieCartanState::new([0.0, -1.0, 0.0], 1.0)).unwrap();
        assert_eq!((v.f, v.fp), (0.0, 2.0));
        let cusp = field("x^2 - y", "x + y");
        let v = f_value(&cusp, &LieCartanState::new([0.3, 0.0, 0.0], 0.5)).unwrap();
        assert!((v.f - 0.85).abs() < 1e-15);
    }

    #[test]
    fn field_examples() {
        assert_eq!(lie_cartan_field(&saddle(), &LieCartanState::new([0.0; 3], 0.0)).unwrap(), [0.0; 4]);
        let cusp = field("x^2 - y", "x + y");
        assert_eq!(lie_cartan_field(&cusp, &LieCartanState::new([0.0; 3], 0.0)).unwrap(), [0.0, 0.0, 0.0, -2.0]);
    }

    #[test]
    fn saddle_jacobian_and_spectrum() {
        let st = LieCartanState::new([0.0; 3], 0.0);
        let m = jacobian_on_criminant(&saddle(), &st).unwrap();
        assert_eq!(m[0], [1.0, 0.0, 0.0, 2.0]);
        let sp = spectral_pair(&saddle(), &st).unwrap();
        assert_eq!((sp.sigma1, sp.sigma2, sp.disc), (-1.0, -2.0, 9.0));
        assert_eq!(sp.lambda, [(1.0, 0.0), (-2.0, 0.0)]);
        assert_eq!(sp.sigma1_closed, -1.0);
        assert!(sp.eigvecs.is_some());
        let off = LieCartanState::new([0.0, -1.0, 0.0], 1.0);
        assert!(matches!(spectral_pair(&saddle(), &off), Err(Error::NotOnCriminant { .. })));
    }

    #[test]
    fn swapped_chart_describes_the_same_line() {
        let s = field("x*y - y + 5*z", "x^2 + x + y");
        let st = project_to_lie_cartan(&s, &LieCartanState::new([0.1, -0.2, 0.05], 0.7)).unwrap();
        let v = f_value(&s, &st).unwrap();
        let sw = st.swapped().unwrap();
        let w = f_value(&s, &sw).unwrap();
        assert!(w.f.abs() < 1e-12, "{}", w.f);
        let (a, b) = (st.direction(v.q), sw.direction(w.q));
        assert!(crate::vec3::line_sin(&a, &b) < 1e-12);
    }

    #[test]
    fn criminant_projection() {
        let s = field("x*y - y + 5*z", "x^2 + x + y");
        let st = project_to_criminant(&s, &LieCartanState::new([0.01, 0.02, -0.01], 0.1)).unwrap();
        let v = f_value(&s, &st).unwrap();
        assert!(v.f.abs() < 1e-12 && v.fp.abs() < 1e-12);
    }
}
