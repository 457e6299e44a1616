//! Asymptotic lines and lifted curves on the worked fields.

use planefield::geometry::direction_data;
use planefield::integrate::{
    asymptotic_portrait, curve_diagnostics, integrate_asymptotic, integrate_asymptotic_along, integrate_lie_cartan,
    AsymptoticParams, EventKind, LiftParams, TimeScaling,
};
use planefield::liecartan::{f_value, LieCartanState};
use planefield::reproduce::example_field;
use planefield::vec3::{self, dist, dot, line_angle, norm, Vec3};

const SADDLE_START: Vec3<f64> = [0.5, -0.5, 0.0];

fn params(t_max: f64, max_step: f64) -> AsymptoticParams {
    AsymptoticParams { t_max, tol: 1e-12, max_step, ..AsymptoticParams::default() }
}

fn segment_distance(p: &Vec3<f64>, a: &Vec3<f64>, b: &Vec3<f64>) -> f64 {
    let ab = vec3::sub(b, a);
    let s = (dot(&vec3::sub(p, a), &ab) / dot(&ab, &ab)).clamp(0.0, 1.0);
    dist(p, &vec3::axpy(a, s, &ab))
}

#[test]
fn circle_is_traced_and_closes() {
    let spec = example_field("circle").unwrap();
    let tau = std::f64::consts::TAU;
    let c = integrate_asymptotic_along(&spec, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &params(tau + 0.1, 0.01)).unwrap();
    assert!(c.events.iter().all(|e| e.kind != EventKind::StepFailure), "{:?}", c.events);
    let mut closest = f64::INFINITY;
    for s in &c.samples {
        let [x, y, z] = s.point;
        assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-6 && z.abs() < 1e-6, "left the circle at {:?}", s.point);
        if s.t > 0.5 * tau {
            closest = closest.min(dist(&s.point, &[1.0, 0.0, 0.0]));
        }
    }
    let last = c.samples.last().unwrap();
    assert!(last.t >= tau, "stopped at t = {}", last.t);
    // Samples are at most 0.01 apart, so one passes within half a step.
    assert!(closest < 5e-3 + 1e-6, "closest return {closest}");
}

#[test]
fn integrated_lines_stay_asymptotic() {
    let spec = example_field("saddle").unwrap();
    for branch in [1, 2] {
        let c = integrate_asymptotic(&spec, &SADDLE_START, branch, &params(0.3, 0.01)).unwrap();
        assert!(c.samples.len() > 10);
        for s in &c.samples {
            let d = direction_data(&spec, &s.point, &s.tangent).unwrap();
            assert!(d.kn.abs() < 1e-9, "kn = {} at {:?}", d.kn, s.point);
        }
    }
}

#[test]
fn branches_leave_in_distinct_directions() {
    let spec = example_field("saddle").unwrap();
    let c1 = integrate_asymptotic(&spec, &SADDLE_START, 1, &params(0.1, 0.01)).unwrap();
    let c2 = integrate_asymptotic(&spec, &SADDLE_START, 2, &params(0.1, 0.01)).unwrap();
    assert_eq!((c1.branch, c2.branch), (Some(1), Some(2)));
    assert!(line_angle(&c1.samples[0].tangent, &c2.samples[0].tangent) > 0.1);
}

#[test]
fn reversed_integration_returns_to_the_start() {
    let spec = example_field("saddle").unwrap();
    let fwd = integrate_asymptotic(&spec, &SADDLE_START, 1, &params(0.4, 0.01)).unwrap();
    let end = fwd.samples.last().unwrap();
    let back = vec3::scale(&end.tangent, -1.0);
    let rev = integrate_asymptotic_along(&spec, &end.point, &back, &params(end.t, 0.01)).unwrap();
    let home = rev.samples.last().unwrap().point;
    assert!(dist(&home, &SADDLE_START) < 1e-8, "returned to {home:?}");
}

#[test]
fn integration_is_deterministic() {
    let spec = example_field("focus").unwrap();
    let p = params(0.5, 0.02);
    let a = integrate_asymptotic(&spec, &[0.3, -1.0, 0.2], 2, &p).unwrap();
    let b = integrate_asymptotic(&spec, &[0.3, -1.0, 0.2], 2, &p).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn lift_projects_onto_the_asymptotic_line() {
    let spec = example_field("saddle").unwrap();
    let fwd = integrate_asymptotic(&spec, &SADDLE_START, 1, &params(0.3, 1e-3)).unwrap();
    let t0 = fwd.samples[0].tangent;
    let bwd = integrate_asymptotic_along(&spec, &SADDLE_START, &vec3::scale(&t0, -1.0), &params(0.3, 1e-3)).unwrap();
    let state = LieCartanState::new(SADDLE_START, t0[1] / t0[0]);
    assert!(f_value(&spec, &state).unwrap().f.abs() < 1e-12);
    let lift = LiftParams { t_max: 0.2, tol: 1e-12, max_step: 1e-3, scaling: TimeScaling::Full };
    let c4 = integrate_lie_cartan(&spec, &state, &lift).unwrap();
    // The lift moves at most unit speed in (x, y, z, p), so it stays within
    // the 0.3 of line covered on each side.
    let mut worst = 0.0f64;
    for s in &c4.samples {
        let near = [&fwd, &bwd]
            .iter()
            .flat_map(|c| c.samples.windows(2))
            .map(|w| segment_distance(&s.state.point, &w[0].point, &w[1].point))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(near);
    }
    // Chord error of the 1e-3 polyline is below 1e-7.
    assert!(worst < 1e-6, "lift strays {worst} from the line");
}

#[test]
fn frenet_diagnostics_match_plane_field_quantities() {
    let spec = example_field("focus").unwrap();
    // Torsion needs a third derivative; the fit error is O(h²), about 4e-5 at this step.
    let c = integrate_asymptotic(&spec, &[0.3, -1.0, 0.2], 1, &params(0.35, 1e-3)).unwrap();
    let c = curve_diagnostics(&spec, &c).unwrap();
    let diags = c.diagnostics.as_ref().unwrap();
    let mut checked = 0;
    // The fit window is one-sided at the ends.
    for d in &diags[4..diags.len() - 4] {
        assert!(d.kn.abs() < 1e-5, "kn = {}", d.kn);
        assert!(d.tangency < 1e-6, "tangency = {}", d.tangency);
        // Past k = 5 the line is turning into the parabolic set and samples bunch up.
        if d.k > 0.1 && d.k < 5.0 {
            checked += 1;
            assert!((d.kg.abs() - d.k).abs() < 1e-4 * (1.0 + d.k), "kg = {}, k = {}", d.kg, d.k);
            assert!((d.tg.abs() - d.tau.abs()).abs() < 1e-3 * (1.0 + d.tau.abs()), "tg = {}, tau = {}", d.tg, d.tau);
        }
    }
    assert!(checked > 10, "only {checked} curved samples");
}

#[test]
fn portrait_runs_both_branches_from_every_seed() {
    let spec = example_field("saddle").unwrap();
    let seeds: Vec<Vec3<f64>> =
        (0..5).flat_map(|j| (0..5).map(move |i| [-0.6 + 0.3 * i as f64, -0.9 + 0.1 * j as f64, 0.0])).collect();
    let entries = asymptotic_portrait(&spec, &seeds, &params(0.2, 0.02));
    assert_eq!(entries.len(), 50);
    for (k, e) in entries.iter().enumerate() {
        assert_eq!((e.seed, e.branch), (k / 2, 1 + (k % 2) as u8));
        let c = e.curve.as_ref().unwrap();
        let t = c.samples[0].tangent;
        assert!((norm(&t) - 1.0).abs() < 1e-12);
        assert!(dot(&spec.xi(&c.samples[0].point).unwrap(), &t).abs() < 1e-9);
    }
}
