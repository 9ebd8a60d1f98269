//! Performance indices: fuel, ride comfort and total travel time.
//!
//! All indices are double trapezoid integrals over `[0, T] x [0, D]` of the
//! recorded samples, weighted by density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gradient, trapezoid_2d};
use crate::solver::Trajectory;

/// Coefficients of the instantaneous fuel rate
/// `max(0, b0 + b1 v + b3 v^3 + b4 v a)` per vehicle.
///
/// The defaults are the light-duty values of the common polynomial
/// consumption model (mL/s, with `v` in m/s and `a` in m/s^2). Any set can be
/// supplied through the scenario file; the sign of the improvement is robust
/// to the choice, its size is not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuelCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub b3: f64,
    pub b4: f64,
}

impl Default for FuelCoeffs {
    fn default() -> Self {
        FuelCoeffs {
            b0: 0.1569,
            b1: 2.450e-2,
            b3: 5.975e-5,
            b4: 9.681e-2,
        }
    }
}

impl FuelCoeffs {
    pub fn zero() -> Self {
        FuelCoeffs {
            b0: 0.0,
            b1: 0.0,
            b3: 0.0,
            b4: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("b0", self.b0),
            ("b1", self.b1),
            ("b3", self.b3),
            ("b4", self.b4),
        ] {
            if !value.is_finite() {
                return Err(Error::Config(format!(
                    "fuel coefficient {name} is not finite"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn rate(&self, v: f64, a: f64) -> f64 {
        (self.b0 + self.b1 * v + self.b3 * v * v * v + self.b4 * v * a).max(0.0)
    }
}

/// Material acceleration `a = v_t + v v_x` and its time derivative.
pub struct AccelerationField {
    pub a: Vec<Vec<f64>>,
    pub a_t: Vec<Vec<f64>>,
}

/// Derivative along the first index of a row-major field.
fn time_gradient(rows: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
    let nx = rows[0].len();
    let mut out = vec![vec![0.0; nx]; rows.len()];
    let mut column = vec![0.0; rows.len()];
    for j in 0..nx {
        for (c, r) in column.iter_mut().zip(rows) {
            *c = r[j];
        }
        for (o, g) in out.iter_mut().zip(gradient(&column, dt)) {
            o[j] = g;
        }
    }
    out
}

/// Acceleration field of speed samples `v[n][j]` at spacing `dt`, `dx`.
pub fn acceleration_from_speed(v: &[Vec<f64>], dt: f64, dx: f64) -> Result<AccelerationField> {
    if v.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: v.len(),
        });
    }
    let v_t = time_gradient(v, dt);
    let a: Vec<Vec<f64>> = v
        .iter()
        .zip(&v_t)
        .map(|(row, vt)| {
            let vx = gradient(row, dx);
            row.iter()
                .zip(vt)
                .zip(vx)
                .map(|((v, vt), vx)| vt + v * vx)
                .collect()
        })
        .collect();
    let a_t = time_gradient(&a, dt);
    Ok(AccelerationField { a, a_t })
}

pub fn acceleration_field(traj: &Trajectory) -> Result<AccelerationField> {
    let v: Vec<Vec<f64>> = traj.states.iter().map(|s| s.v.clone()).collect();
    acceleration_from_speed(&v, traj.sample_interval(), traj.grid.dx)
}

pub fn fuel_from_fields(
    rho: &[Vec<f64>],
    v: &[Vec<f64>],
    acc: &AccelerationField,
    coeffs: &FuelCoeffs,
    dt: f64,
    dx: f64,
) -> f64 {
    let integrand: Vec<Vec<f64>> = rho
        .iter()
        .zip(v)
        .zip(&acc.a)
        .map(|((r, v), a)| {
            r.iter()
                .zip(v)
                .zip(a)
                .map(|((r, v), a)| coeffs.rate(*v, *a) * r)
                .collect()
        })
        .collect();
    trapezoid_2d(&integrand, dt, dx)
}

pub fn comfort_from_fields(rho: &[Vec<f64>], acc: &AccelerationField, dt: f64, dx: f64) -> f64 {
    let integrand: Vec<Vec<f64>> = rho
        .iter()
        .zip(acc.a.iter().zip(&acc.a_t))
        .map(|(r, (a, at))| {
            r.iter()
                .zip(a.iter().zip(at))
                .map(|(r, (a, at))| (a * a + at * at) * r)
                .collect()
        })
        .collect();
    trapezoid_2d(&integrand, dt, dx)
}

pub fn ttt_from_fields(rho: &[Vec<f64>], dt: f64, dx: f64) -> f64 {
    trapezoid_2d(rho, dt, dx)
}

fn rows(traj: &Trajectory) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    traj.states
        .iter()
        .map(|s| (s.rho.clone(), s.v.clone()))
        .unzip()
}

pub fn fuel_index(traj: &Trajectory, coeffs: &FuelCoeffs) -> Result<f64> {
    coeffs.validate()?;
    let acc = acceleration_field(traj)?;
    let (rho, v) = rows(traj);
    Ok(fuel_from_fields(
        &rho,
        &v,
        &acc,
        coeffs,
        traj.sample_interval(),
        traj.grid.dx,
    ))
}

pub fn comfort_index(traj: &Trajectory) -> Result<f64> {
    let acc = acceleration_field(traj)?;
    let (rho, _) = rows(traj);
    Ok(comfort_from_fields(
        &rho,
        &acc,
        traj.sample_interval(),
        traj.grid.dx,
    ))
}

/// Total travel time `int int rho dx dt` [veh s].
pub fn ttt_index(traj: &Trajectory) -> f64 {
    let (rho, _) = rows(traj);
    ttt_from_fields(&rho, traj.sample_interval(), traj.grid.dx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indices {
    pub fuel1: f64,
    pub comfort: f64,
    pub ttt: f64,
}

impl Indices {
    pub fn of(traj: &Trajectory, coeffs: &FuelCoeffs) -> Result<Self> {
        coeffs.validate()?;
        let acc = acceleration_field(traj)?;
        let (rho, v) = rows(traj);
        let (dt, dx) = (traj.sample_interval(), traj.grid.dx);
        Ok(Indices {
            fuel1: fuel_from_fields(&rho, &v, &acc, coeffs, dt, dx),
            comfort: comfort_from_fields(&rho, &acc, dt, dx),
            ttt: ttt_from_fields(&rho, dt, dx),
        })
    }
}

/// `(open - closed) / open * 100`; zero when both vanish.
pub fn improvement(open: f64, closed: f64) -> f64 {
    if open == 0.0 && closed == 0.0 {
        0.0
    } else {
        (open - closed) / open * 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub open: Indices,
    pub closed: Indices,
    pub improvement_pct: Indices,
    /// Reserved for a second fuel model; never computed here.
    pub fuel2: Option<f64>,
    pub fuel_units: String,
    pub coeffs: FuelCoeffs,
}

impl MetricsReport {
    pub fn from_indices(open: Indices, closed: Indices, coeffs: FuelCoeffs) -> Self {
        MetricsReport {
            improvement_pct: Indices {
                fuel1: improvement(open.fuel1, closed.fuel1),
                comfort: improvement(open.comfort, closed.comfort),
                ttt: improvement(open.ttt, closed.ttt),
            },
            open,
            closed,
            fuel2: None,
            fuel_units: "model units".to_string(),
            coeffs,
        }
    }
}

pub fn compare(
    open: &Trajectory,
    closed: &Trajectory,
    coeffs: &FuelCoeffs,
) -> Result<MetricsReport> {
    if open.grid != closed.grid {
        return Err(Error::GridMismatch(format!(
            "open-loop grid {:?} differs from closed-loop grid {:?}",
            open.grid, closed.grid
        )));
    }
    if open.len() != closed.len() || open.sample_interval() != closed.sample_interval() {
        return Err(Error::GridMismatch(format!(
            "sample counts differ ({} vs {})",
            open.len(),
            closed.len()
        )));
    }
    Ok(MetricsReport::from_indices(
        Indices::of(open, coeffs)?,
        Indices::of(closed, coeffs)?,
        *coeffs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(nt: usize, nx: usize, f: impl Fn(f64, f64) -> f64, dt: f64, dx: f64) -> Vec<Vec<f64>> {
        (0..nt)
            .map(|n| (0..nx).map(|j| f(n as f64 * dt, j as f64 * dx)).collect())
            .collect()
    }

    #[test]
    fn too_few_samples() {
        let v = vec![vec![1.0; 4]; 2];
        assert!(matches!(
            acceleration_from_speed(&v, 0.1, 1.0),
            Err(Error::TooFewSamples { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn uniform_ramp_in_time() {
        let eps = 0.01;
        let v = field(20, 11, |t, _| 3.1 + eps * t, 0.5, 10.0);
        let acc = acceleration_from_speed(&v, 0.5, 10.0).unwrap();
        for row in &acc.a {
            assert!(row.iter().all(|a| (a - eps).abs() < 1e-12));
        }
        for row in &acc.a_t {
            assert!(row.iter().all(|a| a.abs() < 1e-12));
        }
    }

    #[test]
    fn static_linear_profile() {
        let (eps, vb, dx) = (0.002, 3.1, 10.0);
        let v = field(5, 101, |_, x| vb + eps * x, 0.1, dx);
        let acc = acceleration_from_speed(&v, 0.1, dx).unwrap();
        for (j, a) in acc.a[2].iter().enumerate() {
            let x = j as f64 * dx;
            assert!((a - (vb + eps * x) * eps).abs() < 1e-12);
        }
    }

    #[test]
    fn fuel_rate_is_clipped_at_zero() {
        let c = FuelCoeffs {
            b0: 0.0,
            b1: 0.0,
            b3: 0.0,
            b4: 1.0,
        };
        assert_eq!(c.rate(2.0, -3.0), 0.0);
        assert_eq!(c.rate(2.0, 3.0), 6.0);
        assert_eq!(FuelCoeffs::zero().rate(10.0, 1.0), 0.0);
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        let c = FuelCoeffs {
            b0: f64::NAN,
            ..FuelCoeffs::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn improvement_formula() {
        assert_eq!(improvement(100.0, 96.0), 4.0);
        assert_eq!(improvement(0.0, 0.0), 0.0);
        assert_eq!(improvement(100.0, 100.0), 0.0);
    }
}
