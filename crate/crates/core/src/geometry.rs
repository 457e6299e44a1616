//! Pointwise invariants of the plane field Δ = ξ^⊥.
//!
//! Chart coefficients e, f, g come from solving ⟨ξ, dr⟩ = 0 for the
//! differential of one axis w: with (u, v) the remaining axes,
//! `dw = α du + β dv`, α = −ξ_u/ξ_w, β = −ξ_v/ξ_w, and
//! `e du² + 2f du dv + g dv² = ⟨dξ, dr⟩` restricted to Δ. The sign and zero set
//! of K = eg − f² do not depend on the chart; its magnitude scales as
//! `K = k₁k₂ |ξ|⁴ / ξ_w²`.
//!
//! Normal curvature and geodesic torsion are reported for the unit normal
//! ξ/|ξ|, so they are invariant under rescaling ξ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::jet::{Grad, Jet};
use crate::scalar::{Arith, Real, Scalar};
use crate::vec3::{self, cross, dot, mat_vec, norm, normalize, triple, Vec3};

/// |ξ| below this makes the plane undefined.
pub const EPS_XI: f64 = 1e-12;
/// Tolerance on ⟨ξ̂, dir⟩ for in-plane directions.
pub const EPS_TAN: f64 = 1e-9;
/// The z chart is kept while |ξ_z| ≥ this fraction of max |ξ_i|.
pub const CHART_PREFERENCE: f64 = 0.125;

/// Parabolic membership tolerance on K.
pub fn eps_k(e: f64, f: f64, g: f64) -> f64 {
    1e-9 * (1.0 + e.abs() + f.abs() + g.abs())
}

/// A coordinate chart: `axis` is solved for, `swapped` exchanges the roles of
/// the two remaining axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Chart {
    pub axis: usize,
    pub swapped: bool,
}

impl Chart {
    pub const CANONICAL: Chart = Chart { axis: 2, swapped: false };

    pub fn new(axis: usize) -> Self {
        assert!(axis < 3);
        Self { axis, swapped: false }
    }

    pub fn swap(self) -> Self {
        Self { swapped: !self.swapped, ..self }
    }

    /// World indices of the chart coordinates (u, v, w).
    pub fn perm(self) -> [usize; 3] {
        let [u, v] = match self.axis {
            0 => [1, 2],
            1 => [2, 0],
            _ => [0, 1],
        };
        if self.swapped {
            [v, u, self.axis]
        } else {
            [u, v, self.axis]
        }
    }

    /// The z chart while it has headroom, else the largest component.
    pub fn select<T: Scalar>(xi: &Vec3<T>) -> Self {
        let m = xi.clone().map(|c| c.magnitude().approx_f64());
        let max = m.iter().cloned().fold(0.0, f64::max);
        if m[2] >= CHART_PREFERENCE * max {
            return Chart::CANONICAL;
        }
        Chart::new(if m[0] >= m[1] { 0 } else { 1 })
    }

    /// Reorders a world vector into chart order.
    pub fn to_chart<T: Clone>(self, w: &Vec3<T>) -> Vec3<T> {
        let p = self.perm();
        [w[p[0]].clone(), w[p[1]].clone(), w[p[2]].clone()]
    }

    /// Reorders a chart vector into world order.
    pub fn to_world<T: Clone>(self, c: &Vec3<T>) -> Vec3<T> {
        let p = self.perm();
        let mut out = c.clone();
        for k in 0..3 {
            out[p[k]] = c[k].clone();
        }
        out
    }
}

/// ξ and its partial derivatives at a point; `jac[i][j] = ∂_j ξ_i`.
#[derive(Clone, Debug)]
pub struct JetFrame<T> {
    pub point: Vec3<T>,
    pub xi: Vec3<T>,
    pub jac: [[T; 3]; 3],
    pub hess: Option<[[[T; 3]; 3]; 3]>,
    pub third: Option<[[[[T; 3]; 3]; 3]; 3]>,
}

fn mi(ks: &[usize]) -> [u8; 3] {
    let mut m = [0u8; 3];
    for &k in ks {
        m[k] += 1;
    }
    m
}

/// Evaluates ξ and its partials up to `order` (1, 2 or 3).
pub fn jet_at<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>, order: u8) -> Result<JetFrame<T>> {
    assert!((1..=3).contains(&order), "jet order must be 1, 2 or 3");
    let xi = spec.xi(point)?;
    if xi_norm(&xi) < EPS_XI {
        return Err(Error::SingularXi { point: vec3::to_f64(point) });
    }
    let d = |i: usize, ks: &[usize]| spec.eval_partial(i, mi(ks), point);
    let mut jac: [[T; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| T::zero()));
    for i in 0..3 {
        for j in 0..3 {
            jac[i][j] = d(i, &[j])?;
        }
    }
    let hess = if order >= 2 {
        let mut h: [[[T; 3]; 3]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| T::zero())));
        for i in 0..3 {
            for j in 0..3 {
                for k in j..3 {
                    let v = d(i, &[j, k])?;
                    h[i][k][j] = v.clone();
                    h[i][j][k] = v;
                }
            }
        }
        Some(h)
    } else {
        None
    };
    let third = if order >= 3 {
        let mut t: [[[[T; 3]; 3]; 3]; 3] = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| T::zero())))
        });
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t[i][j][k][l] = d(i, &[j, k, l])?;
                    }
                }
            }
        }
        Some(t)
    } else {
        None
    };
    Ok(JetFrame { point: point.clone(), xi, jac, hess, third })
}

fn xi_norm<T: Scalar>(xi: &Vec3<T>) -> f64 {
    xi.iter().map(|c| c.approx_f64().powi(2)).sum::<f64>().sqrt()
}

impl<T: Scalar> JetFrame<T> {
    pub fn xi_norm(&self) -> f64 {
        xi_norm(&self.xi)
    }

    /// curl ξ = (c_y − b_z, a_z − c_x, b_x − a_y).
    pub fn curl(&self) -> Vec3<T> {
        let j = &self.jac;
        [j[2][1].clone() - j[1][2].clone(), j[0][2].clone() - j[2][0].clone(), j[1][0].clone() - j[0][1].clone()]
    }

    /// ⟨ξ, curl ξ⟩; identically zero iff Δ is integrable.
    pub fn defect(&self) -> T {
        dot(&self.xi, &self.curl())
    }

    fn chart_valid(&self, chart: Chart) -> bool {
        self.xi[chart.axis].magnitude().approx_f64() >= EPS_XI
    }

    fn check_chart(&self, chart: Chart) -> Result<()> {
        if self.chart_valid(chart) && !self.xi[chart.axis].is_zero() {
            Ok(())
        } else {
            Err(Error::ChartMismatch { axis: chart.axis, point: vec3::to_f64(&self.point) })
        }
    }

    /// ξ and ∂ξ in chart order, as plain values.
    fn chart_values(&self, chart: Chart) -> (Vec3<T>, [[T; 3]; 3]) {
        let p = chart.perm();
        let xi = std::array::from_fn(|i| self.xi[p[i]].clone());
        let d = std::array::from_fn(|i| std::array::from_fn(|j| self.jac[p[i]][p[j]].clone()));
        (xi, d)
    }

    /// ξ and ∂ξ in chart order carrying first derivatives. Needs order ≥ 2.
    fn chart_grads(&self, chart: Chart) -> (Vec3<Grad<T>>, [[Grad<T>; 3]; 3]) {
        let p = chart.perm();
        let h = self.hess.as_ref().expect("jet order >= 2");
        let xi = std::array::from_fn(|i| Grad {
            v: self.xi[p[i]].clone(),
            g: std::array::from_fn(|j| self.jac[p[i]][p[j]].clone()),
        });
        let d = std::array::from_fn(|i| {
            std::array::from_fn(|j| Grad {
                v: self.jac[p[i]][p[j]].clone(),
                g: std::array::from_fn(|k| h[p[i]][p[j]][p[k]].clone()),
            })
        });
        (xi, d)
    }

    /// ξ and ∂ξ in chart order carrying first and second derivatives. Needs order 3.
    fn chart_jets(&self, chart: Chart) -> (Vec3<Jet<T>>, [[Jet<T>; 3]; 3]) {
        let p = chart.perm();
        let h = self.hess.as_ref().expect("jet order >= 2");
        let t = self.third.as_ref().expect("jet order 3");
        let xi = std::array::from_fn(|i| Jet {
            v: self.xi[p[i]].clone(),
            g: std::array::from_fn(|j| self.jac[p[i]][p[j]].clone()),
            h: std::array::from_fn(|j| std::array::from_fn(|k| h[p[i]][p[j]][p[k]].clone())),
        });
        let d = std::array::from_fn(|i| {
            std::array::from_fn(|j| Jet {
                v: self.jac[p[i]][p[j]].clone(),
                g: std::array::from_fn(|k| h[p[i]][p[j]][p[k]].clone()),
                h: std::array::from_fn(|k| std::array::from_fn(|l| t[p[i]][p[j]][p[k]][p[l]].clone())),
            })
        });
        (xi, d)
    }
}

/// Chart-ordered coefficients of the asymptotic quadratic and of the
/// Pfaffian equation `dw = α du + β dv`.
#[derive(Clone, Debug)]
pub struct Coefficients<J> {
    pub e: J,
    pub f: J,
    pub g: J,
    pub alpha: J,
    pub beta: J,
}

impl<J: Arith> Coefficients<J> {
    /// `xi` and `d[i][j] = ∂_j ξ_i` in chart order (u, v, w).
    pub fn compute(xi: &Vec3<J>, d: &[[J; 3]; 3]) -> Self {
        let [a, b, c] = xi.clone();
        let ra = a / c.clone();
        let rb = b / c;
        let cw = d[2][2].clone();
        let su = d[0][2].clone() + d[2][0].clone();
        let sv = d[1][2].clone() + d[2][1].clone();
        let e = d[0][0].clone() - su.clone() * ra.clone() + ra.clone() * ra.clone() * cw.clone();
        let g = d[1][1].clone() - sv.clone() * rb.clone() + rb.clone() * rb.clone() * cw.clone();
        let f = (d[0][1].clone() + d[1][0].clone() - su * rb.clone() - sv * ra.clone()).half()
            + ra.clone() * rb.clone() * cw;
        Self { e, f, g, alpha: -ra, beta: -rb }
    }

    pub fn k(&self) -> J {
        self.e.clone() * self.g.clone() - self.f.clone() * self.f.clone()
    }
}

/// e, f, g, K and H in one chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartFrame<T> {
    pub chart: Chart,
    pub e: T,
    pub f: T,
    pub g: T,
    pub k: T,
    pub h: T,
    pub valid: bool,
}

impl<T: Scalar> ChartFrame<T> {
    pub fn from_jet(jet: &JetFrame<T>, chart: Chart) -> Result<Self> {
        jet.check_chart(chart)?;
        let (xi, d) = jet.chart_values(chart);
        let c = Coefficients::compute(&xi, &d);
        let k = c.k();
        let h = -(c.e.clone() + c.g.clone()).half();
        Ok(Self { chart, e: c.e, f: c.f, g: c.g, k, h, valid: true })
    }

    pub fn eps_k(&self) -> f64 {
        eps_k(self.e.approx_f64(), self.f.approx_f64(), self.g.approx_f64())
    }

    /// e = f = g = 0 up to roundoff.
    pub fn is_degenerate(&self) -> bool {
        self.e.approx_f64().abs() + self.f.approx_f64().abs() + self.g.approx_f64().abs() <= 1e-9
    }
}

pub fn chart_frame<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>) -> Result<ChartFrame<T>> {
    let jet = jet_at(spec, point, 1)?;
    ChartFrame::from_jet(&jet, Chart::select(&jet.xi))
}

pub fn chart_frame_in<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>, chart: Chart) -> Result<ChartFrame<T>> {
    ChartFrame::from_jet(&jet_at(spec, point, 1)?, chart)
}

/// Coefficients with gradients, in chart coordinates. Needs a jet of order ≥ 2.
pub fn coefficient_grads<T: Scalar>(jet: &JetFrame<T>, chart: Chart) -> Result<Coefficients<Grad<T>>> {
    jet.check_chart(chart)?;
    let (xi, d) = jet.chart_grads(chart);
    Ok(Coefficients::compute(&xi, &d))
}

/// Coefficients with gradients and Hessians, in chart coordinates. Needs a
/// jet of order 3.
pub fn coefficient_jets<T: Scalar>(jet: &JetFrame<T>, chart: Chart) -> Result<Coefficients<Jet<T>>> {
    jet.check_chart(chart)?;
    let (xi, d) = jet.chart_jets(chart);
    Ok(Coefficients::compute(&xi, &d))
}

/// K and its world-frame gradient in the given chart.
pub fn k_gradient<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>, chart: Chart) -> Result<(T, Vec3<T>)> {
    let jet = jet_at(spec, point, 2)?;
    let k = coefficient_grads(&jet, chart)?.k();
    Ok((k.v, chart.to_world(&k.g)))
}

/// (curl ξ, ⟨ξ, curl ξ⟩).
pub fn integrability_defect<T: Scalar>(spec: &FieldSpec, point: &Vec3<T>) -> Result<(Vec3<T>, T)> {
    let jet = jet_at(spec, point, 1)?;
    Ok((jet.curl(), jet.defect()))
}

/// Gaussian curvature k₁k₂ of Δ, from any valid chart.
pub fn gaussian_curvature<T: Real>(jet: &JetFrame<T>, frame: &ChartFrame<T>) -> T {
    let n2 = dot(&jet.xi, &jet.xi);
    let w = jet.xi[frame.chart.axis];
    frame.k * w * w / (n2 * n2)
}

/// Normal curvature and geodesic torsion of Δ along an in-plane direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DirectionData<T> {
    pub dir: Vec3<T>,
    pub kn: T,
    pub tg: T,
}

impl<T: Real> DirectionData<T> {
    fn from_jet(jet: &JetFrame<T>, dir: &Vec3<T>) -> Result<Self> {
        let n = norm(&jet.xi);
        let d = norm(dir);
        let residual = dot(&jet.xi, dir) / (n * d);
        if d == T::zero() || residual.abs().to_f64().unwrap_or(f64::INFINITY) > EPS_TAN {
            return Err(Error::NotInPlane { residual: residual.approx_f64() });
        }
        let jd = mat_vec(&jet.jac, dir);
        let d2 = d * d;
        Ok(Self { dir: normalize(dir), kn: -dot(&jd, dir) / (n * d2), tg: triple(dir, &jet.xi, &jd) / (n * n * d2) })
    }
}

pub fn direction_data<T: Real>(spec: &FieldSpec, point: &Vec3<T>, dir: &Vec3<T>) -> Result<DirectionData<T>> {
    DirectionData::from_jet(&jet_at(spec, point, 1)?, dir)
}

/// Asymptotic directions at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Asymptotic<T> {
    /// Unit directions: none (elliptic), one (parabolic) or two (hyperbolic,
    /// ordered as branch 1, branch 2).
    Directions(Vec<Vec3<T>>),
    AllDirections,
}

/// Roots (du, dv) of `e du² + 2f du dv + g dv² = 0` in chart order.
///
/// Branch 1 takes `+√D` and branch 2 `−√D` in the solved form: dv/du when
/// |g| ≥ |e|, else du/dv. `None` for D < 0.
pub fn quadratic_roots<T: Real>(e: T, f: T, g: T, single: bool) -> Option<[[T; 2]; 2]> {
    let (lead, other, by_g) = if g.abs() >= e.abs() { (g, e, true) } else { (e, g, false) };
    let disc = f * f - e * g;
    if disc < T::zero() && !single {
        return None;
    }
    let sq = if single { T::zero() } else { disc.sqrt() };
    // Stable pair: r_big = q/lead, r_small = other/q with q = −(f + sign(f)√D).
    let sign = if f >= T::zero() { T::one() } else { -T::one() };
    let q = -(f + sign * sq);
    // Roots as (1, r) in the solved form; the large root is kept as the
    // vector (lead, q) so that lead = 0 gives the vertical root.
    let lift = |a: T, b: T| if by_g { [a, b] } else { [b, a] };
    let (plus, minus) = if q == T::zero() {
        let r = lift(T::one(), -f / lead);
        (r, r)
    } else {
        let big = if lead < T::zero() { lift(-lead, -q) } else { lift(lead, q) };
        let small = lift(T::one(), other / q);
        if f >= T::zero() {
            (small, big)
        } else {
            (big, small)
        }
    };
    Some([plus, minus])
}

/// Lifts a chart-plane direction (du, dv) to a world vector on Δ.
pub fn lift_direction<T: Real>(xi: &Vec3<T>, chart: Chart, duv: [T; 2]) -> Vec3<T> {
    let c = chart.to_chart(xi);
    let dw = -(c[0] * duv[0] + c[1] * duv[1]) / c[2];
    chart.to_world(&[duv[0], duv[1], dw])
}

pub fn asymptotic_directions<T: Real>(spec: &FieldSpec, point: &Vec3<T>) -> Result<Asymptotic<T>> {
    let jet = jet_at(spec, point, 1)?;
    let frame = ChartFrame::from_jet(&jet, Chart::select(&jet.xi))?;
    Ok(asymptotic_from_frame(&jet, &frame))
}

pub(crate) fn asymptotic_from_frame<T: Real>(jet: &JetFrame<T>, frame: &ChartFrame<T>) -> Asymptotic<T> {
    if frame.is_degenerate() {
        return Asymptotic::AllDirections;
    }
    let eps = T::from(frame.eps_k()).expect("finite");
    let dirs = if frame.k > eps {
        vec![]
    } else {
        let single = frame.k >= -eps;
        let roots = quadratic_roots(frame.e, frame.f, frame.g, single).expect("D >= 0 when K <= eps");
        let lifted = roots.map(|r| normalize(&lift_direction(&jet.xi, frame.chart, r)));
        if single {
            vec![lifted[0]]
        } else {
            lifted.to_vec()
        }
    };
    Asymptotic::Directions(dirs)
}

/// Principal curvatures and directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Principal<T> {
    /// k₁ ≤ k₂ with kn(P_i) = k_i and P₂ = ξ̂ × P₁.
    Directions { k1: T, k2: T, p1: Vec3<T>, p2: Vec3<T> },
    /// Every in-plane direction is principal.
    PartiallyUmbilic { k: T },
}

/// An orthonormal basis (U, V) of Δ with U × V = ξ̂.
pub fn plane_basis<T: Real>(xi: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let n = normalize(xi);
    let k = (0..3).min_by(|&i, &j| n[i].abs().partial_cmp(&n[j].abs()).expect("finite")).expect("3 axes");
    let mut axis = [T::zero(); 3];
    axis[k] = T::one();
    let u = normalize(&cross(&n, &axis));
    let v = cross(&n, &u);
    (u, v)
}

/// Symmetric matrix of kn in the basis (U, V): kn(cosθ U + sinθ V) = [c s] M [c s]ᵀ.
pub fn normal_curvature_form<T: Real>(jet: &JetFrame<T>, u: &Vec3<T>, v: &Vec3<T>) -> [[T; 2]; 2] {
    let n = norm(&jet.xi);
    let half = T::from(0.5).expect("0.5");
    let ju = mat_vec(&jet.jac, u);
    let jv = mat_vec(&jet.jac, v);
    let m11 = -dot(u, &ju) / n;
    let m22 = -dot(v, &jv) / n;
    let m12 = -(dot(u, &jv) + dot(v, &ju)) * half / n;
    [[m11, m12], [m12, m22]]
}

pub fn principal_data<T: Real>(spec: &FieldSpec, point: &Vec3<T>) -> Result<Principal<T>> {
    Ok(principal_from_jet(&jet_at(spec, point, 1)?))
}

pub(crate) fn principal_from_jet<T: Real>(jet: &JetFrame<T>) -> Principal<T> {
    let (u, v) = plane_basis(&jet.xi);
    let [[a, b], [_, c]] = normal_curvature_form(jet, &u, &v);
    let two = T::one() + T::one();
    let mean = (a + c) / two;
    let radius = ((a - c) / two).hypot(b);
    let eps = T::from(1e-9).expect("eps") * (T::one() + mean.abs());
    if radius <= eps {
        return Principal::PartiallyUmbilic { k: mean };
    }
    // The larger eigenvalue's eigenvector sits at θ₂ = atan2(2b, a − c)/2.
    let theta2 = (two * b).atan2(a - c) / two;
    let theta1 = theta2 - T::from(std::f64::consts::FRAC_PI_2).expect("pi");
    let dir = |t: T| vec3::add(&vec3::scale(&u, t.cos()), &vec3::scale(&v, t.sin()));
    let p1 = dir(theta1);
    let p2 = cross(&normalize(&jet.xi), &p1);
    Principal::Directions { k1: mean - radius, k2: mean + radius, p1, p2 }
}

/// Curvature at `point` of the normal section of Δ along `dir`.
///
/// The section plane N is spanned by ξ(point) and `dir`. The field
/// ζ = n × (ξ − ⟨ξ, n⟩n), with n the unit normal of N, is tangent to Δ and to
/// N, so its integral curve through `point` is the section. The curve is
/// traced a distance `h` each way and its curvature along ξ̂ estimated by a
/// three-point second difference.
pub fn normal_section_curvature(spec: &FieldSpec, point: &Vec3<f64>, dir: &Vec3<f64>, h: f64) -> Result<f64> {
    let xi0 = spec.xi(point)?;
    if norm(&xi0) < EPS_XI {
        return Err(Error::SingularXi { point: *point });
    }
    let data = direction_data(spec, point, dir)?;
    let n = normalize(&cross(&xi0, &data.dir));
    let zeta = |p: &Vec3<f64>, orient: &Vec3<f64>| -> Result<Vec3<f64>> {
        let xi = spec.xi(p)?;
        let perp = vec3::axpy(&xi, -dot(&xi, &n), &n);
        let z = cross(&n, &perp);
        let len = norm(&z);
        if len < EPS_XI {
            return Err(Error::IntegrationFailure("section field vanishes".into()));
        }
        let s = if dot(&z, orient) >= 0.0 { 1.0 } else { -1.0 };
        Ok(vec3::scale(&z, s / len))
    };
    let trace = |sign: f64| -> Result<Vec3<f64>> {
        const STEPS: usize = 32;
        let dt = h / STEPS as f64;
        let mut p = *point;
        let mut orient = vec3::scale(&data.dir, sign);
        for _ in 0..STEPS {
            let k1 = zeta(&p, &orient)?;
            let k2 = zeta(&vec3::axpy(&p, dt / 2.0, &k1), &k1)?;
            let k3 = zeta(&vec3::axpy(&p, dt / 2.0, &k2), &k2)?;
            let k4 = zeta(&vec3::axpy(&p, dt, &k3), &k3)?;
            let step: Vec3<f64> = std::array::from_fn(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0);
            p = vec3::axpy(&p, dt, &step);
            orient = k4;
        }
        Ok(p)
    };
    let fwd = trace(1.0)?;
    let back = trace(-1.0)?;
    let second: Vec3<f64> = std::array::from_fn(|i| (fwd[i] - 2.0 * point[i] + back[i]) / (h * h));
    Ok(dot(&normalize(&xi0), &second))
}
