//! Extraction of the parabolic surface {K = 0} by marching tetrahedra.
//!
//! The grid samples the chart-free product k₁k₂ = K ξ_w² / |ξ|⁴, which has
//! the sign and zero set of K in every chart. Each cube splits into six
//! tetrahedra along its main diagonal, so neighbouring cubes agree on shared
//! faces and the result is a manifold wherever the grid values are nonzero.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{classify_with, constraint, parabolic_chart, project_in_chart, Class, EPS_GRAD};
use crate::error::{Error, Result};
use crate::field::{Domain, FieldSpec};
use crate::geometry::{jet_at, k_gradient, Chart, ChartFrame};
use crate::vec3::{self, norm, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeshOptions {
    /// Attach a classification to every vertex.
    pub classify: bool,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { classify: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexData {
    /// K after projection, in the chart selected at the vertex.
    pub k_residual: f64,
    pub eps_k: f64,
    pub grad_k_norm: f64,
    /// ⟨∇K, 𝒜⟩, or NaN where the asymptotic direction is undefined.
    pub phi: f64,
    pub class: Option<Class>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshComponent {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    /// V − E + F.
    pub euler: i64,
}

impl MeshComponent {
    pub fn is_closed(&self) -> bool {
        self.boundary_edges == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParabolicMesh {
    pub vertices: Vec<Vec3<f64>>,
    /// Counter-clockwise when viewed from the K > 0 side.
    pub triangles: Vec<[usize; 3]>,
    pub data: Vec<VertexData>,
    pub components: Vec<MeshComponent>,
    /// Vertices where |∇K| < ε_grad, i.e. where the surface may be singular.
    pub low_gradient: Vec<usize>,
    /// Edges bordering more than two triangles.
    pub nonmanifold_edges: usize,
}

/// Grid node index (i, j, k) flattened with x fastest.
struct Grid {
    n: usize,
    min: Vec3<f64>,
    h: Vec3<f64>,
}

impl Grid {
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.n + 1;
        i + m * (j + m * k)
    }

    fn position(&self, idx: usize) -> Vec3<f64> {
        let m = self.n + 1;
        let (i, j, k) = (idx % m, (idx / m) % m, idx / (m * m));
        [self.min[0] + i as f64 * self.h[0], self.min[1] + j as f64 * self.h[1], self.min[2] + k as f64 * self.h[2]]
    }
}

/// Sign-carrying surrogate of k₁k₂; NaN where ξ is singular.
fn gauss_product(spec: &FieldSpec, p: &Vec3<f64>) -> f64 {
    let Ok(jet) = jet_at(spec, p, 1) else {
        return f64::NAN;
    };
    let chart = Chart::select(&jet.xi);
    let Ok(frame) = ChartFrame::from_jet(&jet, chart) else {
        return f64::NAN;
    };
    let n2 = vec3::dot(&jet.xi, &jet.xi);
    let w = jet.xi[chart.axis];
    frame.k * w * w / (n2 * n2)
}

/// Six tetrahedra per cube, each a monotone path from corner 0 to corner 7.
/// Corners are bit-coded (dx, dy, dz) = (c & 1, c >> 1 & 1, c >> 2 & 1).
const TETS: [[usize; 4]; 6] = [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

/// An edge crossing keyed by its grid nodes; an exact zero collapses the key
/// onto the node so incident crossings share one vertex.
type EdgeKey = (usize, usize);

struct Crossing {
    key: EdgeKey,
    pos: Vec3<f64>,
}

fn crossing(grid: &Grid, values: &[f64], pos_node: usize, neg_node: usize) -> Crossing {
    let (vp, vn) = (values[pos_node], values[neg_node]);
    if vp == 0.0 {
        return Crossing { key: (pos_node, pos_node), pos: grid.position(pos_node) };
    }
    let t = vn / (vn - vp);
    let (a, b) = (grid.position(neg_node), grid.position(pos_node));
    let key = (pos_node.min(neg_node), pos_node.max(neg_node));
    Crossing { key, pos: vec3::axpy(&a, t, &vec3::sub(&b, &a)) }
}

/// Triangles of one tetrahedron, oriented toward the positive side.
fn tet_triangles(grid: &Grid, values: &[f64], nodes: [usize; 4], out: &mut Vec<[Crossing; 3]>) {
    let v: [f64; 4] = nodes.map(|n| values[n]);
    if v.iter().any(|x| x.is_nan()) {
        return;
    }
    // Zero counts as positive.
    let pos: Vec<usize> = (0..4).filter(|&i| v[i] >= 0.0).collect();
    let neg: Vec<usize> = (0..4).filter(|&i| v[i] < 0.0).collect();
    let toward = {
        let c = |set: &[usize]| {
            let mut s = [0.0; 3];
            for &i in set {
                s = vec3::add(&s, &grid.position(nodes[i]));
            }
            vec3::scale(&s, 1.0 / set.len() as f64)
        };
        if pos.is_empty() || neg.is_empty() {
            return;
        }
        vec3::sub(&c(&pos), &c(&neg))
    };
    let x = |p: usize, n: usize| crossing(grid, values, nodes[p], nodes[n]);
    let mut push = |tri: [Crossing; 3]| {
        let n = vec3::cross(&vec3::sub(&tri[1].pos, &tri[0].pos), &vec3::sub(&tri[2].pos, &tri[0].pos));
        if vec3::dot(&n, &toward) < 0.0 {
            let [a, b, c] = tri;
            out.push([a, c, b]);
        } else {
            out.push(tri);
        }
    };
    match (pos.len(), neg.len()) {
        (1, 3) => push([x(pos[0], neg[0]), x(pos[0], neg[1]), x(pos[0], neg[2])]),
        (3, 1) => push([x(pos[0], neg[0]), x(pos[1], neg[0]), x(pos[2], neg[0])]),
        (2, 2) => {
            // Quad a-b-c-d around the tetrahedron.
            let a = (pos[0], neg[0]);
            let b = (pos[0], neg[1]);
            let c = (pos[1], neg[1]);
            let d = (pos[1], neg[0]);
            push([x(a.0, a.1), x(b.0, b.1), x(c.0, c.1)]);
            push([x(a.0, a.1), x(c.0, c.1), x(d.0, d.1)]);
        }
        _ => {}
    }
}

/// Extracts {K = 0} inside `domain` on an n×n×n grid of cells.
pub fn extract_parabolic_surface(
    spec: &FieldSpec,
    domain: &Domain,
    resolution: usize,
    options: &MeshOptions,
) -> Result<ParabolicMesh> {
    if resolution < 8 {
        return Err(Error::FieldSpec(format!("resolution {resolution} < 8")));
    }
    let n = resolution;
    let ext = domain.extent();
    let grid = Grid { n, min: domain.min, h: std::array::from_fn(|i| ext[i] / n as f64) };
    let m = n + 1;
    let values: Vec<f64> = (0..m * m * m).into_par_iter().map(|idx| gauss_product(spec, &grid.position(idx))).collect();

    let slabs: Vec<Vec<[Crossing; 3]>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let corner = |c: usize| grid.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                    for tet in TETS {
                        tet_triangles(&grid, &values, tet.map(corner), &mut out);
                    }
                }
            }
            out
        })
        .collect();

    let mut ids: HashMap<EdgeKey, usize> = HashMap::new();
    let mut raw: Vec<Vec3<f64>> = Vec::new();
    let mut triangles = Vec::new();
    for tri in slabs.iter().flatten() {
        let idx = tri.each_ref().map(|c| {
            *ids.entry(c.key).or_insert_with(|| {
                raw.push(c.pos);
                raw.len() - 1
            })
        });
        if idx[0] != idx[1] && idx[1] != idx[2] && idx[0] != idx[2] {
            triangles.push(idx);
        }
    }
    if triangles.is_empty() {
        return Err(Error::EmptySurface);
    }

    let projected: Vec<(Vec3<f64>, VertexData)> = raw.par_iter().map(|p| vertex_data(spec, p, options)).collect();
    let (vertices, data): (Vec<_>, Vec<_>) = projected.into_iter().unzip();
    let low_gradient = data
        .iter()
        .enumerate()
        .filter(|(_, d)| d.grad_k_norm.is_nan() || d.grad_k_norm < EPS_GRAD)
        .map(|(i, _)| i)
        .collect();
    let (components, nonmanifold_edges) = components(vertices.len(), &triangles);
    Ok(ParabolicMesh { vertices, triangles, data, components, low_gradient, nonmanifold_edges })
}

fn vertex_data(spec: &FieldSpec, p: &Vec3<f64>, options: &MeshOptions) -> (Vec3<f64>, VertexData) {
    let nan = VertexData { k_residual: f64::NAN, eps_k: 0.0, grad_k_norm: f64::NAN, phi: f64::NAN, class: None };
    let Ok(jet) = jet_at(spec, p, 1) else {
        return (*p, nan);
    };
    let chart = Chart::select(&jet.xi);
    let x = project_in_chart(spec, p, chart).unwrap_or(*p);
    let Ok(frame) = crate::geometry::chart_frame_in::<f64>(spec, &x, chart) else {
        return (x, nan);
    };
    let grad = k_gradient(spec, &x, chart).map(|(_, g)| norm(&g)).unwrap_or(f64::NAN);
    let phi = parabolic_chart(spec, &x).and_then(|ch| constraint(spec, &x, ch)).map(|c| c.phi).unwrap_or(f64::NAN);
    let class = if options.classify { classify_with(spec, &x, true).ok().map(|c| c.class) } else { None };
    (x, VertexData { k_residual: frame.k, eps_k: frame.eps_k(), grad_k_norm: grad, phi, class })
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components (through shared vertices) and their Euler
/// characteristics; also counts non-manifold edges.
fn components(nv: usize, triangles: &[[usize; 3]]) -> (Vec<MeshComponent>, usize) {
    let mut parent: Vec<usize> = (0..nv).collect();
    for t in triangles {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut stats: HashMap<usize, MeshComponent> = HashMap::new();
    let mut used = vec![false; nv];
    for t in triangles {
        let r = find(&mut parent, t[0]);
        stats
            .entry(r)
            .or_insert_with(|| {
                roots.push(r);
                MeshComponent { vertices: 0, edges: 0, triangles: 0, boundary_edges: 0, euler: 0 }
            })
            .triangles += 1;
        for &v in t {
            used[v] = true;
        }
    }
    for v in 0..nv {
        if used[v] {
            let r = find(&mut parent, v);
            stats.get_mut(&r).expect("vertex of a triangle").vertices += 1;
        }
    }
    let mut nonmanifold = 0;
    for (&(a, _), &count) in &edges {
        let r = find(&mut parent, a);
        let c = stats.get_mut(&r).expect("edge of a triangle");
        c.edges += 1;
        if count == 1 {
            c.boundary_edges += 1;
        }
        if count > 2 {
            nonmanifold += 1;
        }
    }
    roots.sort_unstable();
    let comps = roots
        .into_iter()
        .map(|r| {
            let mut c = stats.remove(&r).expect("root");
            c.euler = c.vertices as i64 - c.edges as i64 + c.triangles as i64;
            c
        })
        .collect();
    (comps, nonmanifold)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_plane() {
        let spec = FieldSpec::new("x^2 - y", "x + y", "1", Domain::cube(1.0)).unwrap();
        let mesh = extract_parabolic_surface(&spec, &Domain::cube(1.0), 8, &MeshOptions::default()).unwrap();
        assert!(mesh.vertices.iter().all(|v| v[0].abs() < 1e-9));
        assert_eq!(mesh.nonmanifold_edges, 0);
        assert_eq!(mesh.components.len(), 1);
        // A square: a disc.
        assert_eq!(mesh.components[0].euler, 1);
        assert!(mesh.data.iter().all(|d| d.class == Some(Class::ParabolicCuspidal)));
    }

    #[test]
    fn elliptic_box_is_empty() {
        let spec = FieldSpec::new("x", "y", "1", Domain::cube(1.0)).unwrap();
        let err = extract_parabolic_surface(&spec, &Domain::cube(1.0), 8, &MeshOptions::default());
        assert!(matches!(err, Err(Error::EmptySurface)));
    }
}
