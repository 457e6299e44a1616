//! One function per subcommand.

use std::io::Write;

use serde::Serialize;
use serde_json::json;

use planefield::geometry::{
    asymptotic_directions, chart_frame, integrability_defect, principal_data, Asymptotic, Principal,
};
use planefield::integrate::{
    asymptotic_portrait, curve_diagnostics, integrate_asymptotic, integrate_lie_cartan, AsymptoticParams, Curve,
    LiftParams, TimeScaling,
};
use planefield::liecartan::LieCartanState;
use planefield::parabolic::{
    classify_parabolic_point, detect_transitions, extract_parabolic_surface, trace_special_curve, MeshOptions,
    TraceParams,
};
use planefield::reproduce::{reproduce as run_example, EXAMPLES};
use planefield::{ChartFrame64, Error, FieldSpec};

use crate::config::{ConfigError, Format, RunConfig};
use crate::export::{self, Artifact, Provenance};
use crate::Failure;

/// Nodes per axis of the integrability sampling grid.
const VALIDATE_GRID: usize = 9;
/// |⟨ξ, curl ξ⟩| below this counts as zero when sampling integrability.
const DEFECT_ZERO: f64 = 1e-9;
/// Nodes per axis of the default portrait seed grid.
const PORTRAIT_GRID: usize = 5;

/// Writes to stdout; a closed pipe is not an error.
fn print(value: &serde_json::Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("json serializes"));
}

fn point3(seed: &[f64], pointer: &str) -> Result<[f64; 3], ConfigError> {
    match seed {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(ConfigError::at(pointer, "expected x,y,z")),
    }
}

fn spec(cfg: &RunConfig) -> Result<FieldSpec, Failure> {
    Ok(cfg.spec()?.with_domain(cfg.bbox))
}

fn format_for(cfg: &RunConfig, artifact: Artifact) -> Result<Format, Failure> {
    let f = cfg.format.unwrap_or(artifact.default_format());
    artifact.check(f)?;
    Ok(f)
}

fn grid(cfg: &RunConfig, n: usize) -> impl Iterator<Item = [f64; 3]> + '_ {
    let b = cfg.bbox;
    let at = move |axis: usize, i: usize| b.min[axis] + (b.max[axis] - b.min[axis]) * i as f64 / (n - 1) as f64;
    (0..n).flat_map(move |k| (0..n).flat_map(move |j| (0..n).map(move |i| [at(0, i), at(1, j), at(2, k)])))
}

pub fn validate(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = spec(cfg)?;
    let mut max_defect = 0.0f64;
    let mut singular = 0;
    let mut sampled = 0;
    for p in grid(cfg, VALIDATE_GRID) {
        match integrability_defect(&spec, &p) {
            Ok((_, d)) => {
                sampled += 1;
                max_defect = max_defect.max(d.abs());
            }
            Err(Error::SingularXi { .. }) => singular += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let prov = Provenance::new("validate", cfg);
    print(&json!({
        "provenance": prov,
        "field": cfg.field,
        "integrability": {
            "grid": VALIDATE_GRID,
            "sampled": sampled,
            "singular": singular,
            "max_abs_defect": max_defect,
            "zero_threshold": DEFECT_ZERO,
            "integrable_on_samples": max_defect <= DEFECT_ZERO,
        },
    }));
    Ok(())
}

#[derive(Serialize)]
struct Analysis {
    point: [f64; 3],
    xi: Option<[f64; 3]>,
    chart_frame: Option<ChartFrame64>,
    curl: Option<[f64; 3]>,
    defect: Option<f64>,
    asymptotic: Option<Asymptotic<f64>>,
    principal: Option<Principal<f64>>,
    classification: planefield::parabolic::Classification,
}

pub fn analyze(cfg: &RunConfig) -> Result<(), Failure> {
    let spec = spec(cfg)?;
    let point = point3(cfg.seed()?, "/seeds/0")?;
    let (curl, defect) = integrability_defect(&spec, &point).ok().unzip();
    let analysis = Analysis {
        point,
        xi: spec.xi(&point).ok(),
        chart_frame: chart_frame(&spec, &point).ok(),
        curl,
        defect,
        asymptotic: asymptotic_directions(&spec, &point).ok(),
        principal: principal_data(&spec, &point).ok(),
        classification: classify_parabolic_point(&spec, &point)?,
    };
    print(&json!({ "provenance": Provenance::new("analyze", cfg), "result": analysis }));
    Ok(())
}

pub fn surface(cfg: &RunConfig) -> Result<(), Failure> {
    let format = format_for(cfg, Artifact::Mesh)?;
    let spec = spec(cfg)?;
    let mesh = extract_parabolic_surface(&spec, &cfg.bbox, cfg.resolution, &MeshOptions::default())?;
    let prov = Provenance::new("surface", cfg);
    let artifacts = match format {
        Format::Obj => vec![
            export::write(&cfg.out, "surface.obj", &export::mesh_obj(&mesh, &prov))?,
            export::write(&cfg.out, "surface.json", &export::mesh_sidecar(&mesh, "surface.obj", &prov))?,
        ],
        _ => vec![export::write(&cfg.out, "surface.json", &export::json(&mesh, &prov))?],
    };
    print(&json!({
        "artifacts": artifacts,
        "vertices": mesh.vertices.len(),
        "triangles": mesh.triangles.len(),
        "components": mesh.components.iter().map(|c| json!({"euler": c.euler, "closed": c.is_closed()})).collect::<Vec<_>>(),
    }));
    Ok(())
}

pub fn special_curve(cfg: &RunConfig) -> Result<(), Failure> {
    let format = format_for(cfg, Artifact::SpecialCurve)?;
    let spec = spec(cfg)?;
    let seed = point3(cfg.seed()?, "/seeds/0")?;
    let params = TraceParams { step: cfg.step, max_samples: cfg.max_samples };
    let curve = detect_transitions(&spec, &trace_special_curve(&spec, &seed, &params)?);
    let prov = Provenance::new("special-curve", cfg);
    let path = match format {
        Format::Csv => export::write(&cfg.out, "special_curve.csv", &export::special_curve_csv(&curve, &prov))?,
        _ => export::write(&cfg.out, "special_curve.json", &export::json(&curve, &prov))?,
    };
    print(&json!({
        "artifacts": [path],
        "samples": curve.samples.len(),
        "transitions": curve.transitions.iter().map(|t| json!({"kind": t.kind, "point": t.point, "class": t.class})).collect::<Vec<_>>(),
        "ends": curve.ends,
    }));
    Ok(())
}

fn asymptotic_params(cfg: &RunConfig) -> AsymptoticParams {
    AsymptoticParams { t_max: cfg.t_max, tol: cfg.tol, max_step: cfg.max_step, ..AsymptoticParams::default() }
}

/// Adds diagnostics where the curve is long enough for the fit.
fn with_diagnostics(spec: &FieldSpec, curve: Curve) -> Curve {
    curve_diagnostics(spec, &curve).unwrap_or(curve)
}

pub fn trace(cfg: &RunConfig) -> Result<(), Failure> {
    let format = format_for(cfg, Artifact::Curve)?;
    let spec = spec(cfg)?;
    let seed = cfg.seed()?;
    let prov = Provenance::new("trace", cfg);
    let (curve, lifted) = match seed {
        [x, y, z] => (integrate_asymptotic(&spec, &[*x, *y, *z], cfg.branch, &asymptotic_params(cfg))?, None),
        [x, y, z, p] => {
            let params =
                LiftParams { t_max: cfg.t_max, tol: cfg.tol, max_step: cfg.max_step, scaling: TimeScaling::Full };
            let c4 = integrate_lie_cartan(&spec, &LieCartanState::new([*x, *y, *z], *p), &params)?;
            let mut projection = c4.projection.clone();
            projection.events = c4.events.clone();
            (projection, Some(c4))
        }
        _ => return Err(ConfigError::at("/seeds/0", "expected x,y,z or x,y,z,p").into()),
    };
    let curve = with_diagnostics(&spec, curve);
    let path = match format {
        Format::Csv => export::write(&cfg.out, "trace.csv", &export::curve_csv(&curve, &prov))?,
        _ => {
            let body = json!({ "curve": curve, "lift": lifted.map(|c| c.samples) });
            export::write(&cfg.out, "trace.json", &export::json(&body, &prov))?
        }
    };
    print(&json!({ "artifacts": [path], "samples": curve.samples.len(), "events": curve.events }));
    Ok(())
}

pub fn portrait(cfg: &RunConfig) -> Result<(), Failure> {
    let format = format_for(cfg, Artifact::Portrait)?;
    let spec = spec(cfg)?;
    let seeds: Vec<[f64; 3]> = if cfg.seeds.is_empty() {
        // Interior nodes of a grid on the middle z slice.
        let b = cfg.bbox;
        let z = 0.5 * (b.min[2] + b.max[2]);
        let n = PORTRAIT_GRID;
        let at = |axis: usize, i: usize| b.min[axis] + (b.max[axis] - b.min[axis]) * (i + 1) as f64 / (n + 1) as f64;
        (0..n).flat_map(|j| (0..n).map(move |i| [at(0, i), at(1, j), z])).collect()
    } else {
        cfg.seeds.iter().enumerate().map(|(i, s)| point3(s, &format!("/seeds/{i}"))).collect::<Result<_, _>>()?
    };
    let mut entries = asymptotic_portrait(&spec, &seeds, &asymptotic_params(cfg));
    for e in &mut entries {
        if let Ok(c) = &mut e.curve {
            *c = with_diagnostics(
                &spec,
                std::mem::replace(c, Curve { samples: vec![], branch: None, events: vec![], diagnostics: None }),
            );
        }
    }
    let prov = Provenance::new("portrait", cfg);
    let path = match format {
        Format::Csv => export::write(&cfg.out, "portrait.csv", &export::portrait_csv(&entries, &prov))?,
        _ => export::write(
            &cfg.out,
            "portrait.json",
            &export::json(&json!({ "seeds": seeds, "entries": entries }), &prov),
        )?,
    };
    let failed = entries.iter().filter(|e| e.curve.is_err()).count();
    print(&json!({ "artifacts": [path], "curves": entries.len() - failed, "failed": failed }));
    Ok(())
}

pub fn reproduce(name: &str) -> Result<(), Failure> {
    let names: Vec<&str> = if name == "all" { EXAMPLES.to_vec() } else { vec![name] };
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for n in names {
        let report = run_example(n).map_err(|e| match e {
            Error::FieldSpec(m) => Failure::Config(ConfigError::at("/example", m)),
            e => Failure::Domain(e),
        })?;
        for c in &report.checks {
            let _ = writeln!(out, "{} {n}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            if !c.pass {
                failed.push(format!("{n}: {}", c.name));
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}
