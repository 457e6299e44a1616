//! Dormand–Prince 5(4) with adaptive step control.

/// Tableau nodes.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

/// Fourth-order embedded weights.
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One trial step: the fifth-order solution and the scaled error norm
/// (≤ 1 means the local error is within `tol`). `None` when the right-hand
/// side fails at some stage.
pub fn dopri_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64, tol: f64) -> Option<([f64; N], f64)>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, a) in A[s].iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * a * k[j][i];
            }
        }
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = 0.0f64;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = tol * (1.0 + y[i].abs().max(y5[i].abs()));
        err = err.max((h * (d5 - d4)).abs() / scale);
    }
    y5.iter().all(|v| v.is_finite()).then_some((y5, err))
}

/// Next step size from a scaled error norm.
pub fn next_step(h: f64, err: f64) -> f64 {
    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
    h * factor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut f = |_t: f64, y: &[f64; 1]| Some([-y[0]]);
        let (mut t, mut y, mut h) = (0.0f64, [1.0], 0.1f64);
        while t < 1.0 {
            h = h.min(1.0 - t);
            let (y1, err) = dopri_step(&mut f, t, &y, h, 1e-10).unwrap();
            if err <= 1.0 {
                t += h;
                y = y1;
            }
            h = next_step(h, err);
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
    }
}
