//! Artifact serialization.
//!
//! Output is byte-deterministic: floats use the shortest round-trip decimal
//! form, and every collection is written in its stored order. Each artifact
//! starts with a provenance block (a `provenance` key in JSON, `#` lines in
//! OBJ and CSV).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use planefield::geometry::{EPS_TAN, EPS_XI};
use planefield::integrate::{Curve, PortraitEntry};
use planefield::parabolic::{ParabolicMesh, SpecialCurve, EPS_GRAD};
use planefield::Error;

use crate::config::{Format, RunConfig};

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub eps_xi: f64,
    pub eps_tan: f64,
    pub eps_grad: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub tolerances: Tolerances,
    /// Configuration keys that took their default value.
    pub defaults: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: "planefield",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: cfg.hash(),
            tolerances: Tolerances { tol: cfg.tol, eps_xi: EPS_XI, eps_tan: EPS_TAN, eps_grad: EPS_GRAD },
            defaults: cfg.defaulted.clone(),
        }
    }

    /// `#`-prefixed lines for text formats.
    fn comment_lines(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}", self.tool, self.version);
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# config_hash: {}", self.config_hash);
        let t = &self.tolerances;
        let _ = writeln!(
            s,
            "# tolerances: tol={} eps_xi={} eps_tan={} eps_grad={}",
            t.tol, t.eps_xi, t.eps_tan, t.eps_grad
        );
        let _ = writeln!(s, "# defaults: {}", self.defaults.join(" "));
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    Mesh,
    SpecialCurve,
    Curve,
    Portrait,
}

impl Artifact {
    fn name(self) -> &'static str {
        match self {
            Artifact::Mesh => "mesh",
            Artifact::SpecialCurve => "special curve",
            Artifact::Curve => "curve",
            Artifact::Portrait => "portrait",
        }
    }

    pub fn default_format(self) -> Format {
        match self {
            Artifact::Mesh => Format::Obj,
            _ => Format::Json,
        }
    }

    pub fn check(self, format: Format) -> Result<(), Error> {
        let ok = match self {
            Artifact::Mesh => format != Format::Csv,
            _ => format != Format::Obj,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::IncompatibleFormat { artifact: self.name(), format: format.name() })
        }
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

pub fn json<T: Serialize>(value: &T, prov: &Provenance) -> String {
    let mut s =
        serde_json::to_string_pretty(&Wrapped { provenance: prov, result: value }).expect("artifact serializes");
    s.push('\n');
    s
}

pub fn mesh_obj(mesh: &ParabolicMesh, prov: &Provenance) -> String {
    let mut s = prov.comment_lines();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

/// Per-vertex data and topology, written next to an OBJ file.
#[derive(Serialize)]
struct MeshSidecar<'a> {
    obj: &'a str,
    vertex_count: usize,
    triangle_count: usize,
    data: &'a [planefield::parabolic::VertexData],
    components: &'a [planefield::parabolic::MeshComponent],
    low_gradient: &'a [usize],
    nonmanifold_edges: usize,
}

pub fn mesh_sidecar(mesh: &ParabolicMesh, obj_name: &str, prov: &Provenance) -> String {
    json(
        &MeshSidecar {
            obj: obj_name,
            vertex_count: mesh.vertices.len(),
            triangle_count: mesh.triangles.len(),
            data: &mesh.data,
            components: &mesh.components,
            low_gradient: &mesh.low_gradient,
            nonmanifold_edges: mesh.nonmanifold_edges,
        },
        prov,
    )
}

pub const SPECIAL_CURVE_HEADER: &str = "x,y,z,p,sigma1,sigma2,disc,phi,K,class";

pub fn special_curve_csv(curve: &SpecialCurve, prov: &Provenance) -> String {
    let mut s = prov.comment_lines();
    s.push_str(SPECIAL_CURVE_HEADER);
    s.push('\n');
    for c in &curve.samples {
        let [x, y, z] = c.point;
        let _ = writeln!(
            s,
            "{x},{y},{z},{},{},{},{},{},{},{}",
            c.p_lift, c.sigma1, c.sigma2, c.disc, c.phi_residual, c.k_residual, c.class
        );
    }
    s
}

pub const CURVE_HEADER: &str = "t,x,y,z,tx,ty,tz,k,tau,kg,kn,tg";

fn curve_rows(s: &mut String, prefix: &str, curve: &Curve) {
    for (i, c) in curve.samples.iter().enumerate() {
        let [x, y, z] = c.point;
        let [tx, ty, tz] = c.tangent;
        let _ = write!(s, "{prefix}{},{x},{y},{z},{tx},{ty},{tz}", c.t);
        match curve.diagnostics.as_ref().and_then(|d| d.get(i)) {
            Some(d) => {
                let _ = writeln!(s, ",{},{},{},{},{}", d.k, d.tau, d.kg, d.kn, d.tg);
            }
            None => s.push_str(",,,,,\n"),
        }
    }
}

pub fn curve_csv(curve: &Curve, prov: &Provenance) -> String {
    let mut s = prov.comment_lines();
    s.push_str(CURVE_HEADER);
    s.push('\n');
    curve_rows(&mut s, "", curve);
    s
}

pub fn portrait_csv(entries: &[PortraitEntry], prov: &Provenance) -> String {
    let mut s = prov.comment_lines();
    let _ = writeln!(s, "seed,branch,{CURVE_HEADER}");
    for e in entries {
        if let Ok(c) = &e.curve {
            curve_rows(&mut s, &format!("{},{},", e.seed, e.branch), c);
        }
    }
    s
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_compatibility() {
        assert!(Artifact::Mesh.check(Format::Obj).is_ok());
        assert!(Artifact::Mesh.check(Format::Json).is_ok());
        assert_eq!(
            Artifact::Mesh.check(Format::Csv),
            Err(Error::IncompatibleFormat { artifact: "mesh", format: "csv" })
        );
        assert!(Artifact::SpecialCurve.check(Format::Csv).is_ok());
        assert!(Artifact::Curve.check(Format::Obj).is_err());
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        assert_eq!(format!("{}", 0.1f64), "0.1");
        assert_eq!(format!("{}", 0.0f64), "0");
        assert_eq!(serde_json::to_string(&1e-10f64).unwrap(), "1e-10");
    }
}
