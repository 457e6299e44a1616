//! Frenet and plane-field quantities along sampled curves.
//!
//! Derivatives come from least-squares quartics through up to nine samples
//! around each point, in the curve parameter `t`.

use serde::Serialize;

use super::Curve;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::geometry::direction_data;
use crate::vec3::{self, cross, dot, norm, normalize, triple, Vec3};

const WINDOW: usize = 9;
const DEGREE: usize = 4;
const MIN_SAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    /// Curvature of the space curve.
    pub k: f64,
    /// Torsion; NaN where the curvature is below 1e-9.
    pub tau: f64,
    /// Geodesic curvature [ξ̂, γ', γ''] / |γ'|³.
    pub kg: f64,
    /// Normal curvature of Δ along the fitted tangent.
    pub kn: f64,
    /// Geodesic torsion of Δ along the fitted tangent.
    pub tg: f64,
    /// |⟨ξ̂, γ'⟩| / |γ'| of the fitted tangent.
    pub tangency: f64,
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// First three derivatives at `t0` of the polynomial fit through `pts`.
fn fit_derivatives(ts: &[f64], pts: &[Vec3<f64>], t0: f64) -> Option<[Vec3<f64>; 3]> {
    let deg = DEGREE.min(ts.len() - 1);
    let scale = ts.iter().map(|t| (t - t0).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let us: Vec<f64> = ts.iter().map(|t| (t - t0) / scale).collect();
    let n = deg + 1;
    let mut ata = vec![vec![0.0; n]; n];
    for u in &us {
        for i in 0..n {
            for j in 0..n {
                ata[i][j] += u.powi((i + j) as i32);
            }
        }
    }
    let mut coeffs = [[0.0; 3]; 4];
    for axis in 0..3 {
        let atb: Vec<f64> = (0..n).map(|i| us.iter().zip(pts).map(|(u, p)| u.powi(i as i32) * p[axis]).sum()).collect();
        let c = solve(ata.clone(), atb)?;
        for k in 0..4 {
            coeffs[k][axis] = c.get(k).copied().unwrap_or(0.0);
        }
    }
    Some([
        vec3::scale(&coeffs[1], 1.0 / scale),
        vec3::scale(&coeffs[2], 2.0 / (scale * scale)),
        vec3::scale(&coeffs[3], 6.0 / (scale * scale * scale)),
    ])
}

/// Fills per-sample diagnostics.
pub fn curve_diagnostics(spec: &FieldSpec, curve: &Curve) -> Result<Curve> {
    let n = curve.samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooShort { len: n, min: MIN_SAMPLES });
    }
    let ts: Vec<f64> = curve.samples.iter().map(|s| s.t).collect();
    let pts: Vec<Vec3<f64>> = curve.samples.iter().map(|s| s.point).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let w = WINDOW.min(n);
        let lo = i.saturating_sub(w / 2).min(n - w);
        let [d1, d2, d3] = fit_derivatives(&ts[lo..lo + w], &pts[lo..lo + w], ts[i])
            .ok_or_else(|| Error::IntegrationFailure(format!("degenerate fit at sample {i}")))?;
        let speed = norm(&d1);
        let b = cross(&d1, &d2);
        let k = norm(&b) / speed.powi(3);
        let tau = if k > 1e-9 { triple(&d1, &d2, &d3) / dot(&b, &b) } else { f64::NAN };
        let xi = normalize(&spec.xi(&pts[i])?);
        let kg = triple(&xi, &d1, &d2) / speed.powi(3);
        let tangency = dot(&xi, &d1).abs() / speed;
        let in_plane = vec3::axpy(&d1, -dot(&xi, &d1), &xi);
        let dd = direction_data(spec, &pts[i], &in_plane)?;
        out.push(Diagnostic { k, tau, kg, kn: dd.kn, tg: dd.tg, tangency });
    }
    Ok(Curve { diagnostics: Some(out), ..curve.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Domain;
    use crate::integrate::{integrate_asymptotic, AsymptoticParams};

    #[test]
    fn straight_lines_of_a_constant_field() {
        let spec = FieldSpec::new("0", "0", "1", Domain::cube(2.0)).unwrap();
        let c = integrate_asymptotic(&spec, &[0.0; 3], 1, &AsymptoticParams { max_step: 0.01, ..Default::default() });
        // e = f = g = 0: every direction is asymptotic, so no branch exists.
        assert!(c.is_err());
        let spec = FieldSpec::new("0", "x", "1", Domain::cube(2.0)).unwrap();
        let c = integrate_asymptotic(
            &spec,
            &[0.0, 0.3, 0.0],
            1,
            &AsymptoticParams { max_step: 0.01, ..Default::default() },
        )
        .unwrap();
        let d = curve_diagnostics(&spec, &c).unwrap();
        for g in d.diagnostics.unwrap() {
            assert!(g.k < 1e-6 && g.kg.abs() < 1e-6 && g.kn.abs() < 1e-9, "{g:?}");
        }
    }
}
