//! Small finite-difference and quadrature helpers shared across modules.

/// First derivative on a uniform grid: central differences inside,
/// first-order one-sided differences at both ends.
pub fn gradient(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (f[1] - f[0]) / h
                } else if i == n - 1 {
                    (f[n - 1] - f[n - 2]) / h
                } else {
                    (f[i + 1] - f[i - 1]) / (2.0 * h)
                }
            })
            .collect(),
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>()),
    }
}

/// Trapezoid weight of node `i` out of `n` (without the spacing factor).
#[inline]
pub fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Double trapezoid over rows sampled every `dt`, columns every `dx`.
pub fn trapezoid_2d(rows: &[Vec<f64>], dt: f64, dx: f64) -> f64 {
    let per_row: Vec<f64> = rows.iter().map(|r| trapezoid(r, dx)).collect();
    trapezoid(&per_row, dt)
}

pub fn sup_abs(f: &[f64]) -> f64 {
    f.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
