//! Randomized invariant checks shared by the `invariants` and `acceptance`
//! targets.
//!
//! Fields are random quadratics with coefficients k/8, so every literal is
//! exact. Oracles evaluate the polynomials and their partials by hand rather
//! than through the crate's symbolic differentiation.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use planefield::geometry::{
    asymptotic_directions, chart_frame, chart_frame_in, direction_data, integrability_defect, jet_at,
    normal_section_curvature, plane_basis, principal_data, Asymptotic, Chart, Principal,
};
use planefield::integrate::{integrate_lie_cartan, LiftParams, TimeScaling};
use planefield::liecartan::{f_value, project_to_criminant, project_to_lie_cartan, LieCartanState};
use planefield::vec3::{self, cross, dot, norm, Vec3};
use planefield::{Domain, FieldSpec};

/// Quadratic in (x, y, z) over the monomials 1, x, y, z, x², xy, xz, y², yz, z².
#[derive(Clone, Debug)]
pub struct Poly(pub [f64; 10]);

const MONOMIALS: [&str; 10] = ["1", "x", "y", "z", "x^2", "x*y", "x*z", "y^2", "y*z", "z^2"];

impl Poly {
    pub fn text(&self) -> String {
        let terms: Vec<String> = self
            .0
            .iter()
            .zip(MONOMIALS)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, m)| format!("({}/8)*{m}", (c * 8.0) as i64))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    pub fn eval(&self, p: &Vec3<f64>) -> f64 {
        let [x, y, z] = *p;
        let c = &self.0;
        c[0] + c[1] * x
            + c[2] * y
            + c[3] * z
            + c[4] * x * x
            + c[5] * x * y
            + c[6] * x * z
            + c[7] * y * y
            + c[8] * y * z
            + c[9] * z * z
    }

    pub fn grad(&self, p: &Vec3<f64>) -> Vec3<f64> {
        let [x, y, z] = *p;
        let c = &self.0;
        [
            c[1] + 2.0 * c[4] * x + c[5] * y + c[6] * z,
            c[2] + c[5] * x + 2.0 * c[7] * y + c[8] * z,
            c[3] + c[6] * x + c[8] * y + 2.0 * c[9] * z,
        ]
    }
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::array::uniform10(-8i32..=8).prop_map(|k| Poly(k.map(|v| v as f64 / 8.0)))
}

fn point() -> impl Strategy<Value = Vec3<f64>> {
    prop::array::uniform3(-0.5f64..0.5)
}

fn domain() -> Domain {
    Domain::cube(2.0)
}

/// ξ = (a, b, 1).
fn unit_c_field(a: &Poly, b: &Poly) -> FieldSpec {
    FieldSpec::new(&a.text(), &b.text(), "1", domain()).unwrap()
}

/// ξ = (a, b, 2 + c/4): the third component stays near 2 on the sample box.
fn general_field(a: &Poly, b: &Poly, c: &Poly) -> FieldSpec {
    FieldSpec::new(&a.text(), &b.text(), &format!("2 + (1/4)*({})", c.text()), domain()).unwrap()
}

fn general() -> impl Strategy<Value = (FieldSpec, Vec3<f64>)> {
    (poly(), poly(), poly(), point()).prop_map(|(a, b, c, p)| (general_field(&a, &b, &c), p))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn principal(spec: &FieldSpec, p: &Vec3<f64>) -> Result<(f64, f64, Vec3<f64>, Vec3<f64>), TestCaseError> {
    match principal_data(spec, p).map_err(|e| fail(e.to_string()))? {
        Principal::Directions { k1, k2, p1, p2 } if (k2 - k1).abs() > 1e-6 => Ok((k1, k2, p1, p2)),
        _ => Err(TestCaseError::reject("umbilic")),
    }
}

const THETAS: usize = 32;

fn euler_formula((spec, p): (FieldSpec, Vec3<f64>)) -> Result<(), TestCaseError> {
    let (k1, k2, p1, p2) = principal(&spec, &p)?;
    for i in 0..THETAS {
        let th = std::f64::consts::PI * i as f64 / THETAS as f64;
        let (c, s) = (th.cos(), th.sin());
        let d = vec3::add(&vec3::scale(&p1, c), &vec3::scale(&p2, s));
        let kn = direction_data(&spec, &p, &d).map_err(|e| fail(e.to_string()))?.kn;
        let want = k1 * c * c + k2 * s * s;
        prop_assert!((kn - want).abs() <= 1e-8 * (1.0 + k1.abs() + k2.abs()), "θ {th}: {kn} vs {want}");
    }
    Ok(())
}

fn torsion_formula((spec, p): (FieldSpec, Vec3<f64>)) -> Result<(), TestCaseError> {
    let (k1, k2, p1, p2) = principal(&spec, &p)?;
    let t1 = direction_data(&spec, &p, &p1).map_err(|e| fail(e.to_string()))?.tg;
    for i in 0..THETAS {
        let th = std::f64::consts::PI * i as f64 / THETAS as f64;
        let (c, s) = (th.cos(), th.sin());
        let d = vec3::add(&vec3::scale(&p1, c), &vec3::scale(&p2, s));
        let tg = direction_data(&spec, &p, &d).map_err(|e| fail(e.to_string()))?.tg;
        let want = (k2 - k1) * c * s;
        prop_assert!((tg - t1 - want).abs() <= 1e-8 * (1.0 + k1.abs() + k2.abs()), "θ {th}: {} vs {want}", tg - t1);
    }
    Ok(())
}

fn principal_torsion_equality((spec, p): (FieldSpec, Vec3<f64>)) -> Result<(), TestCaseError> {
    let (_, _, p1, p2) = principal(&spec, &p)?;
    let t1 = direction_data(&spec, &p, &p1).map_err(|e| fail(e.to_string()))?.tg;
    let t2 = direction_data(&spec, &p, &p2).map_err(|e| fail(e.to_string()))?.tg;
    let xi = spec.xi(&p).map_err(|e| fail(e.to_string()))?;
    let (_, defect) = integrability_defect(&spec, &p).map_err(|e| fail(e.to_string()))?;
    let want = -defect / (2.0 * dot(&xi, &xi));
    prop_assert!((t1 - t2).abs() < 1e-8, "{t1} vs {t2}");
    prop_assert!((t1 - want).abs() < 1e-8, "{t1} vs {want}");
    Ok(())
}

fn lines(a: Asymptotic<f64>) -> Option<Vec<Vec3<f64>>> {
    match a {
        Asymptotic::Directions(d) => Some(d),
        Asymptotic::AllDirections => None,
    }
}

fn scaling_invariance((spec, p): (FieldSpec, Vec3<f64>)) -> Result<(), TestCaseError> {
    let scaled = spec.scaled("2 + sin(x)").map_err(|e| fail(e.to_string()))?;
    let f0 = chart_frame(&spec, &p).map_err(|e| fail(e.to_string()))?;
    let f1 = chart_frame(&scaled, &p).map_err(|e| fail(e.to_string()))?;
    let clear = f0.k.abs() > 1e-6 && f1.k.abs() > 1e-6;
    prop_assume!(clear);
    prop_assert_eq!(f0.k > 0.0, f1.k > 0.0);
    let d0 = lines(asymptotic_directions(&spec, &p).map_err(|e| fail(e.to_string()))?);
    let d1 = lines(asymptotic_directions(&scaled, &p).map_err(|e| fail(e.to_string()))?);
    let (Some(d0), Some(d1)) = (d0, d1) else { return Err(TestCaseError::reject("all directions")) };
    prop_assert_eq!(d0.len(), d1.len());
    for d in &d0 {
        let best = d1.iter().map(|e| vec3::line_sin(d, e)).fold(f64::INFINITY, f64::min);
        prop_assert!(best < 1e-9, "{best}");
    }
    Ok(())
}

/// K for ξ = (f, g, 1) from hand-written partials.
fn k_oracle(f: &Poly, g: &Poly, p: &Vec3<f64>) -> f64 {
    let (fv, gv) = (f.eval(p), g.eval(p));
    let ([fx, fy, fz], [gx, gy, gz]) = (f.grad(p), g.grad(p));
    let m = fy - fv * gz + gx - gv * fz;
    (fx - fv * fz) * (gy - gv * gz) - m * m / 4.0
}

fn k_oracle_property((f, g, p): (Poly, Poly, Vec3<f64>)) -> Result<(), TestCaseError> {
    let spec = unit_c_field(&f, &g);
    let k = chart_frame_in(&spec, &p, Chart::CANONICAL).map_err(|e| fail(e.to_string()))?.k;
    let want = k_oracle(&f, &g, &p);
    prop_assert!((k - want).abs() < 1e-10 * (1.0 + want.abs()), "{k} vs {want}");
    Ok(())
}

/// An integer direction with two integer normals spanning its complement.
fn frame_of(v: [i32; 3]) -> Option<[Vec3<f64>; 3]> {
    let v = v.map(|c| c as f64);
    if norm(&v) == 0.0 {
        return None;
    }
    let axis = if v[0].abs() <= v[1].abs() && v[0].abs() <= v[2].abs() { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let n1 = cross(&v, &axis);
    let n2 = cross(&v, &n1);
    Some([v, n1, n2])
}

fn straight_line((w, s, v, p0): ([Poly; 3], [Poly; 2], [i32; 3], [i32; 3])) -> Result<(), TestCaseError> {
    let Some([v, n1, n2]) = frame_of(v) else { return Err(TestCaseError::reject("zero direction")) };
    let p0 = p0.map(|c| c as f64 / 8.0);
    // ξ = |v|² w − ⟨v, w⟩ v + (⟨x − p0, n1⟩ s1 + ⟨x − p0, n2⟩ s2) v, so that
    // ⟨ξ, v⟩ vanishes on the line p0 + t v.
    let lin = |n: &Vec3<f64>| {
        format!("(({})*(x - ({})) + ({})*(y - ({})) + ({})*(z - ({})))", n[0], p0[0], n[1], p0[1], n[2], p0[2])
    };
    let vw = format!("(({})*({}) + ({})*({}) + ({})*({}))", v[0], w[0].text(), v[1], w[1].text(), v[2], w[2].text());
    let extra = format!("({}*({}) + {}*({}))", lin(&n1), s[0].text(), lin(&n2), s[1].text());
    let vv = dot(&v, &v);
    let comp = |i: usize| format!("({vv})*({}) - ({})*{vw} + ({})*{extra}", w[i].text(), v[i], v[i]);
    let spec = FieldSpec::new(&comp(0), &comp(1), &comp(2), domain()).map_err(|e| fail(e.to_string()))?;
    for k in 0..=20 {
        let t = (-0.5 + k as f64 / 20.0) / norm(&v);
        let q = vec3::axpy(&p0, t, &v);
        let jet = match jet_at(&spec, &q, 1) {
            Ok(j) if norm(&j.xi) > 1e-3 => j,
            _ => continue,
        };
        let jv = vec3::mat_vec(&jet.jac, &v);
        let r = dot(&jv, &v) / dot(&v, &v);
        prop_assert!(r.abs() < 1e-10 * (1.0 + norm(&jet.xi)), "t {t}: {r}");
    }
    Ok(())
}

fn sign_coherence((spec, p): (FieldSpec, Vec3<f64>)) -> Result<(), TestCaseError> {
    let k = chart_frame(&spec, &p).map_err(|e| fail(e.to_string()))?.k;
    let prod = match principal_data(&spec, &p).map_err(|e| fail(e.to_string()))? {
        Principal::Directions { k1, k2, .. } => k1 * k2,
        Principal::PartiallyUmbilic { k } => k * k,
    };
    prop_assume!(k.abs() > 1e-9 && prod.abs() > 1e-9);
    prop_assert_eq!(k > 0.0, prod > 0.0, "K {} vs k1k2 {}", k, prod);
    Ok(())
}

fn normal_section((spec, p, phi): (FieldSpec, Vec3<f64>, f64)) -> Result<(), TestCaseError> {
    let xi = spec.xi(&p).map_err(|e| fail(e.to_string()))?;
    let (u, v) = plane_basis(&xi);
    let d = vec3::add(&vec3::scale(&u, phi.cos()), &vec3::scale(&v, phi.sin()));
    let kn = direction_data(&spec, &p, &d).map_err(|e| fail(e.to_string()))?.kn;
    let ns = normal_section_curvature(&spec, &p, &d, 1e-3).map_err(|e| fail(e.to_string()))?;
    prop_assert!((kn - ns).abs() < 1e-4, "{kn} vs {ns}");
    Ok(())
}

/// A state on {F = 0} over a hyperbolic point, in the chart where the
/// direction's slope is at most 1 in magnitude.
fn hyperbolic_state(spec: &FieldSpec, p: &Vec3<f64>, branch: usize) -> Result<LieCartanState, TestCaseError> {
    let dirs = match asymptotic_directions(spec, p).map_err(|e| fail(e.to_string()))? {
        Asymptotic::Directions(d) if d.len() == 2 => d,
        _ => return Err(TestCaseError::reject("not hyperbolic")),
    };
    let xi = spec.xi(p).map_err(|e| fail(e.to_string()))?;
    let mut chart = Chart::select(&xi);
    let mut c = chart.to_chart(&dirs[branch]);
    if c[0].abs() < c[1].abs() {
        chart = chart.swap();
        c = chart.to_chart(&dirs[branch]);
    }
    Ok(LieCartanState::in_chart(*p, c[1] / c[0], chart))
}

fn eps_f(spec: &FieldSpec, s: &LieCartanState) -> Result<f64, TestCaseError> {
    let fr = chart_frame_in(spec, &s.point, s.chart).map_err(|e| fail(e.to_string()))?;
    Ok(1e-9 * (1.0 + fr.e.abs() + fr.f.abs() + fr.g.abs()))
}

fn projection_round_trip((spec, p, branch, dp): (FieldSpec, Vec3<f64>, usize, f64)) -> Result<(), TestCaseError> {
    let s0 = hyperbolic_state(&spec, &p, branch)?;
    let eps = eps_f(&spec, &s0)?;
    let f0 = f_value(&spec, &s0).map_err(|e| fail(e.to_string()))?.f;
    prop_assert!(f0.abs() < eps, "start F {f0}");
    // A state already on the hypersurface is a fixed point.
    let same = project_to_lie_cartan(&spec, &s0).map_err(|e| fail(e.to_string()))?;
    prop_assert!(vec3::dist(&same.point, &s0.point) < 1e-12 && (same.p - s0.p).abs() < 1e-12);
    let off = LieCartanState::in_chart(s0.point, s0.p + dp, s0.chart);
    let back = project_to_lie_cartan(&spec, &off).map_err(|e| fail(e.to_string()))?;
    let f1 = f_value(&spec, &back).map_err(|e| fail(e.to_string()))?.f;
    prop_assert!(f1.abs() < eps_f(&spec, &back)?, "projected F {f1}");
    let moved = vec3::dist(&back.point, &s0.point) + (back.p - s0.p).abs();
    prop_assert!(moved <= 2.0 * dp.abs() + 1e-12, "moved {moved} for dp {dp}");
    Ok(())
}

fn f_first_integral((spec, p, branch): (FieldSpec, Vec3<f64>, usize)) -> Result<(), TestCaseError> {
    let s0 = hyperbolic_state(&spec, &p, branch)?;
    let params = LiftParams { t_max: 0.2, tol: 1e-10, max_step: 0.02, scaling: TimeScaling::None };
    let c = integrate_lie_cartan(&spec, &s0, &params).map_err(|e| fail(e.to_string()))?;
    let worst = c.samples.iter().map(|s| s.f_residual.abs()).fold(0.0, f64::max);
    prop_assert!(worst < 1e-6, "max |F| {worst}");
    Ok(())
}

fn criminant_projects_to_parabolic((spec, p, slope): (FieldSpec, Vec3<f64>, f64)) -> Result<(), TestCaseError> {
    let xi = spec.xi(&p).map_err(|e| fail(e.to_string()))?;
    let guess = LieCartanState::in_chart(p, slope, Chart::select(&xi));
    let s = match project_to_criminant(&spec, &guess) {
        Ok(s) => s,
        Err(_) => return Err(TestCaseError::reject("no criminant point nearby")),
    };
    let eps = eps_f(&spec, &s)?;
    let fv = f_value(&spec, &s).map_err(|e| fail(e.to_string()))?;
    prop_assert!(fv.f.abs() < eps && fv.fp.abs() < eps, "F {} F_p {}", fv.f, fv.fp);
    let k = chart_frame_in(&spec, &s.point, s.chart).map_err(|e| fail(e.to_string()))?.k;
    prop_assert!(k.abs() < 10.0 * eps, "K {k} vs {eps}");
    Ok(())
}

/// Runs `property` over `cases` generated cases.
fn run<S: Strategy>(
    cases: u32,
    deterministic: bool,
    strategy: S,
    property: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, max_global_rejects: 20 * cases, ..Config::default() };
    let mut runner = if deterministic {
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    } else {
        TestRunner::new(config)
    };
    runner.run(&strategy, property).map_err(|e| e.to_string())
}

pub type Suite = fn(u32, bool) -> Result<(), String>;

/// Every randomized invariant, by name.
pub fn suites() -> Vec<(&'static str, Suite)> {
    vec![
        ("euler formula", |n, d| run(n, d, general(), euler_formula)),
        ("torsion formula", |n, d| run(n, d, general(), torsion_formula)),
        ("geodesic torsion of principal directions", |n, d| run(n, d, general(), principal_torsion_equality)),
        ("scaling invariance", |n, d| run(n, d, general(), scaling_invariance)),
        ("straight lines are asymptotic", |n, d| {
            let polys3 = [poly(), poly(), poly()];
            let polys2 = [poly(), poly()];
            let ints = || prop::array::uniform3(-3i32..=3);
            run(n, d, (polys3, polys2, ints(), ints()), straight_line)
        }),
        ("sign of K equals sign of k1 k2", |n, d| run(n, d, general(), sign_coherence)),
        ("K oracle for unit third component", |n, d| run(n, d, (poly(), poly(), point()), k_oracle_property)),
        ("normal-section oracle", |n, d| {
            run(n, d, (general(), 0.0..std::f64::consts::PI).prop_map(|((s, p), phi)| (s, p, phi)), normal_section)
        }),
        ("Lie-Cartan projection round trip", |n, d| {
            let strat = (general(), 0usize..2, -1e-3f64..1e-3).prop_map(|((s, p), b, dp)| (s, p, b, dp));
            run(n, d, strat, projection_round_trip)
        }),
        ("F is a first integral", |n, d| {
            run(n, d, (general(), 0usize..2).prop_map(|((s, p), b)| (s, p, b)), f_first_integral)
        }),
        ("criminant projects into the parabolic set", |n, d| {
            run(n, d, (general(), -2.0f64..2.0).prop_map(|((s, p), q)| (s, p, q)), criminant_projects_to_parabolic)
        }),
    ]
}
