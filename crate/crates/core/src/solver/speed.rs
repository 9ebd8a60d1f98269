use crate::error::{Error, Result};

/// Damped upstream transport `v_t - c4 v_x = -k v` on `[0, x1]`, driven by
/// `signal[n] = v(x1, n dt)` as boundary data, zero initial state.
///
/// First-order upwind in space with the damping applied as the exact factor
/// `exp(-k dt)`; at Courant number `c4 dt / dx = 1` the update is an exact
/// shift along characteristics. Returns the field at every sample, nodes
/// `x_j = j dx` for `j = 0..=x1/dx`.
pub fn simulate_linear_speed_subsystem(
    gain: f64,
    c4: f64,
    dx: f64,
    dt: f64,
    x1: f64,
    signal: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let courant = c4 * dt / dx;
    if courant > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            step: 0,
            cfl: courant,
            limit: 1.0,
        });
    }
    let courant = courant.min(1.0);
    let cells = (x1 / dx).round();
    if !(x1 > 0.0) || (cells * dx - x1).abs() > 1e-9 * x1 {
        return Err(Error::InvalidParameter {
            name: "x1",
            reason: format!("{x1} m must be a positive multiple of dx = {dx} m"),
        });
    }
    let last = cells as usize;
    let decay = (-gain * dt).exp();
    let mut field = vec![0.0; last + 1];
    let mut history = Vec::with_capacity(signal.len());
    if let Some(&s0) = signal.first() {
        field[last] = s0;
    }
    history.push(field.clone());
    for &s in signal.iter().skip(1) {
        let mut next = vec![0.0; last + 1];
        for j in 0..last {
            next[j] = decay * ((1.0 - courant) * field[j] + courant * field[j + 1]);
        }
        next[last] = s;
        field = next;
        history.push(field.clone());
    }
    Ok(history)
}
