//! Fixed-size vector helpers.

use crate::scalar::{Real, Scalar};

pub type Vec3<T> = [T; 3];

pub fn dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

pub fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

/// Scalar triple product [a, b, c] = ⟨a, b × c⟩.
pub fn triple<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>, c: &Vec3<T>) -> T {
    dot(a, &cross(b, c))
}

pub fn mat_vec<T: Scalar>(m: &[[T; 3]; 3], v: &Vec3<T>) -> Vec3<T> {
    std::array::from_fn(|i| dot(&m[i], v))
}

pub fn add<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale<T: Real>(a: &Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// `a + s·b`.
pub fn axpy<T: Real>(a: &Vec3<T>, s: T, b: &Vec3<T>) -> Vec3<T> {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

pub fn norm<T: Real>(a: &Vec3<T>) -> T {
    dot(a, a).sqrt()
}

pub fn normalize<T: Real>(a: &Vec3<T>) -> Vec3<T> {
    let n = norm(a);
    scale(a, T::one() / n)
}

pub fn dist<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    norm(&sub(a, b))
}

/// |sin| of the angle between two lines.
pub fn line_sin<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    norm(&cross(a, b)) / (norm(a) * norm(b))
}

/// Angle between two lines in [0, π/2].
pub fn line_angle<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    let c = dot(a, b).abs() / (norm(a) * norm(b));
    let s = line_sin(a, b);
    s.atan2(c)
}

pub fn to_f64<T: Scalar>(a: &Vec3<T>) -> Vec3<f64> {
    std::array::from_fn(|i| a[i].approx_f64())
}

pub fn from_f64<T: Real>(a: &Vec3<f64>) -> Vec3<T> {
    std::array::from_fn(|i| T::from(a[i]).expect("finite"))
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
pub fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = b[i];
    }
    let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (a[i][3] - s) / a[i][i];
    }
    Some(x)
}
