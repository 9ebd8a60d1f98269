//! Mixed ACC/manual traffic model in the congested regime.
//!
//! Speed relaxes towards a mixed fundamental diagram
//!
//! ```text
//! V_mix(rho, h_acc) = (1 / h_mix(h_acc)) * (1/rho - L)
//! ```
//!
//! where the mixed time-gap `h_mix` blends the ACC setting `h_acc` with the
//! manual time-gap `h_m`, weighted by penetration rate and the two time
//! constants. Everything here is in SI units (m, s, veh/m, veh/s).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unvalidated parameter set. `Default` is the nominal scenario:
/// 1200 veh/h inflow on a 1 km stretch, 15 % ACC penetration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    /// Inflow [veh/s].
    pub q_in: f64,
    /// Stretch length D [m].
    pub length: f64,
    /// Effective vehicle length L [m].
    pub vehicle_length: f64,
    /// ACC penetration rate alpha in [0, 1].
    pub penetration: f64,
    pub tau_acc: f64,
    pub tau_m: f64,
    /// Manual time-gap [s].
    pub h_m: f64,
    /// Steady-state ACC time-gap [s].
    pub h_acc_bar: f64,
    /// Free-flow speed [m/s].
    pub v_f: f64,
    /// Lowest density for which the congested model holds [veh/m].
    pub rho_min: f64,
    /// Largest admissible ACC time-gap [s].
    pub h_max: f64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            q_in: 1200.0 / 3600.0,
            length: 1000.0,
            vehicle_length: 5.0,
            penetration: 0.15,
            tau_acc: 2.0,
            tau_m: 60.0,
            h_m: 1.0,
            h_acc_bar: 1.5,
            v_f: 27.78,
            rho_min: 0.037,
            h_max: 2.2,
        }
    }
}

/// Validated model parameters. Construction checks every physical and
/// feasibility bound, so downstream code never re-validates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    set: ParamSet,
    h_min: f64,
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl ModelParams {
    pub fn new(set: ParamSet) -> Result<Self> {
        positive("q_in", set.q_in)?;
        positive("length", set.length)?;
        positive("vehicle_length", set.vehicle_length)?;
        positive("tau_acc", set.tau_acc)?;
        positive("tau_m", set.tau_m)?;
        positive("h_m", set.h_m)?;
        positive("h_acc_bar", set.h_acc_bar)?;
        positive("v_f", set.v_f)?;
        positive("rho_min", set.rho_min)?;
        positive("h_max", set.h_max)?;
        if !(0.0..=1.0).contains(&set.penetration) {
            return Err(invalid(
                "penetration",
                format!("must lie in [0, 1], got {}", set.penetration),
            ));
        }
        if set.rho_min >= 1.0 / set.vehicle_length {
            return Err(invalid(
                "rho_min",
                format!(
                    "must be below the jam density 1/L = {}",
                    1.0 / set.vehicle_length
                ),
            ));
        }
        let h_min = (1.0 / set.rho_min - set.vehicle_length) / set.v_f;
        if h_min > set.h_max {
            return Err(invalid(
                "h_max",
                format!("must be >= h_min = {h_min} implied by rho_min and v_f"),
            ));
        }
        for (name, h) in [("h_acc_bar", set.h_acc_bar), ("h_m", set.h_m)] {
            if h < h_min || h > set.h_max {
                return Err(invalid(
                    name,
                    format!("{h} s is outside [h_min, h_max] = [{h_min}, {}]", set.h_max),
                ));
            }
        }
        let q_max = set.v_f * h_min / (set.h_max * (set.vehicle_length + set.v_f * h_min));
        if set.q_in >= q_max {
            return Err(invalid(
                "q_in",
                format!(
                    "{} veh/s violates the congested feasibility bound q_in < {q_max} veh/s",
                    set.q_in
                ),
            ));
        }
        Ok(ModelParams { set, h_min })
    }

    /// The nominal scenario parameters.
    pub fn nominal() -> Self {
        Self::new(ParamSet::default()).expect("nominal parameters are valid")
    }

    pub fn set(&self) -> &ParamSet {
        &self.set
    }
    pub fn q_in(&self) -> f64 {
        self.set.q_in
    }
    pub fn length(&self) -> f64 {
        self.set.length
    }
    pub fn vehicle_length(&self) -> f64 {
        self.set.vehicle_length
    }
    pub fn penetration(&self) -> f64 {
        self.set.penetration
    }
    pub fn tau_acc(&self) -> f64 {
        self.set.tau_acc
    }
    pub fn tau_m(&self) -> f64 {
        self.set.tau_m
    }
    pub fn h_m(&self) -> f64 {
        self.set.h_m
    }
    pub fn h_acc_bar(&self) -> f64 {
        self.set.h_acc_bar
    }
    pub fn v_f(&self) -> f64 {
        self.set.v_f
    }
    pub fn rho_min(&self) -> f64 {
        self.set.rho_min
    }
    pub fn h_max(&self) -> f64 {
        self.set.h_max
    }
    /// Minimum time-gap, tied to `rho_min` through `rho_min = 1/(L + v_f h_min)`.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }
    /// Jam density 1/L.
    pub fn rho_jam(&self) -> f64 {
        1.0 / self.set.vehicle_length
    }
    /// Upper bound on `q_in` that keeps every admissible equilibrium congested.
    pub fn max_feasible_inflow(&self) -> f64 {
        let s = &self.set;
        s.v_f * self.h_min / (s.h_max * (s.vehicle_length + s.v_f * self.h_min))
    }

    /// Copy with a different steady-state ACC time-gap, revalidated.
    pub fn with_h_acc_bar(&self, h_acc_bar: f64) -> Result<Self> {
        Self::new(ParamSet {
            h_acc_bar,
            ..self.set
        })
    }
}

/// Uniform steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub rho_bar: f64,
    pub v_bar: f64,
    pub h_mix_bar: f64,
    pub h_acc_bar: f64,
}

/// Mixed time-gap for a given ACC time-gap.
pub fn mixed_time_gap(h_acc: f64, p: &ModelParams) -> Result<f64> {
    if !(h_acc > 0.0) || !h_acc.is_finite() {
        return Err(Error::Domain {
            what: "h_acc",
            value: h_acc,
        });
    }
    Ok(h_mix_unchecked(h_acc, p))
}

#[inline]
pub(crate) fn h_mix_unchecked(h_acc: f64, p: &ModelParams) -> f64 {
    let alpha = p.penetration();
    let ratio = (1.0 - alpha) * p.tau_acc() / p.tau_m();
    (alpha + ratio) / (alpha + ratio * h_acc / p.h_m()) * h_acc
}

/// `tau_mix = 1 / (alpha/tau_acc + (1-alpha)/tau_m)`.
pub fn mixed_time_constant(p: &ModelParams) -> f64 {
    let alpha = p.penetration();
    1.0 / (alpha / p.tau_acc() + (1.0 - alpha) / p.tau_m())
}

fn check_congested(rho: f64, p: &ModelParams) -> Result<()> {
    if rho > p.rho_min() && rho < p.rho_jam() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "rho",
            value: rho,
        })
    }
}

/// Mixed equilibrium speed `V_mix(rho, h_acc)`.
pub fn v_mix(rho: f64, h_acc: f64, p: &ModelParams) -> Result<f64> {
    check_congested(rho, p)?;
    let h_mix = mixed_time_gap(h_acc, p)?;
    Ok((1.0 / rho - p.vehicle_length()) / h_mix)
}

/// Speed from the single-class constant time-gap law `(1/rho - L)/h`.
pub fn constant_time_gap_speed(rho: f64, h: f64, p: &ModelParams) -> Result<f64> {
    check_congested(rho, p)?;
    Ok((1.0 / rho - p.vehicle_length()) / h)
}

/// `dV_mix/drho = -1 / (h_mix rho^2)`.
pub fn v_mix_density_slope(rho: f64, h_acc: f64, p: &ModelParams) -> Result<f64> {
    check_congested(rho, p)?;
    let h_mix = mixed_time_gap(h_acc, p)?;
    Ok(-1.0 / (h_mix * rho * rho))
}

/// Flow envelope `(Q_hmax(rho), Q_hmin(rho))` bounding every admissible
/// fundamental diagram.
pub fn fundamental_diagram_bounds(rho: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if !(rho >= 0.0) || rho > p.rho_jam() {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
        });
    }
    let l = p.vehicle_length();
    let branch = |h: f64| {
        let critical = 1.0 / (l + p.v_f() * h);
        if rho <= critical {
            p.v_f() * rho
        } else {
            (1.0 - l * rho) / h
        }
    };
    Ok((branch(p.h_max()), branch(p.h_min())))
}

/// Characteristic speeds `(lambda1, lambda2) = (v, v - 1/(h_mix rho))`.
pub fn char_speeds(rho: f64, v: f64, h_acc: f64, p: &ModelParams) -> (f64, f64) {
    let h_mix = h_mix_unchecked(h_acc, p);
    (v, v - 1.0 / (h_mix * rho))
}

/// Pointwise membership in the admissible congested region: density and
/// speed bounds, time-gap bounds, and `lambda2 < 0`.
pub fn in_region_omega(rho: f64, v: f64, h_acc: f64, p: &ModelParams) -> bool {
    let bounds = rho > p.rho_min()
        && rho < p.rho_jam()
        && v > 0.0
        && v < p.v_f()
        && h_acc >= p.h_min()
        && h_acc <= p.h_max();
    bounds && char_speeds(rho, v, h_acc, p).1 < 0.0
}

/// Uniform equilibrium for the configured inflow and `h_acc_bar`.
pub fn equilibrium(p: &ModelParams) -> Result<Equilibrium> {
    let q = p.q_in();
    if q >= p.max_feasible_inflow() {
        return Err(Error::Infeasible(format!(
            "q_in = {q} veh/s exceeds bound {}",
            p.max_feasible_inflow()
        )));
    }
    let h_mix_bar = h_mix_unchecked(p.h_acc_bar(), p);
    let headway = 1.0 / q - h_mix_bar;
    if headway <= 0.0 {
        return Err(Error::Infeasible(format!(
            "1/q_in = {} s does not exceed h_mix = {h_mix_bar} s",
            1.0 / q
        )));
    }
    let v_bar = p.vehicle_length() / headway;
    Ok(Equilibrium {
        rho_bar: q / v_bar,
        v_bar,
        h_mix_bar,
        h_acc_bar: p.h_acc_bar(),
    })
}

/// Right-hand side of the steady-profile ODE `v'(x)`; vanishes at `v_bar`.
pub fn equilibrium_profile_ode_rhs(v: f64, p: &ModelParams, eq: &Equilibrium) -> Result<f64> {
    if v == 0.0 {
        return Err(Error::Singular);
    }
    let offset = p.vehicle_length() / (eq.h_mix_bar - 1.0 / p.q_in());
    Ok(-(v + offset) / (mixed_time_constant(p) * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    fn with(f: impl FnOnce(&mut ParamSet)) -> ModelParams {
        let mut s = ParamSet::default();
        f(&mut s);
        ModelParams::new(s).unwrap()
    }

    #[test]
    fn nominal_derived_bounds() {
        let p = ModelParams::nominal();
        assert!(close(p.h_min(), (1.0 / 0.037 - 5.0) / 27.78, 1e-15));
        assert!(close(p.rho_min(), 1.0 / (5.0 + 27.78 * p.h_min()), 1e-12));
        assert!(p.max_feasible_inflow() > p.q_in());
    }

    #[test]
    fn mixed_time_gap_limits_and_value() {
        let p0 = with(|s| s.penetration = 0.0);
        assert_eq!(mixed_time_gap(1.7, &p0).unwrap(), 1.0);
        let p1 = with(|s| s.penetration = 1.0);
        assert_eq!(mixed_time_gap(1.5, &p1).unwrap(), 1.5);
        let p = ModelParams::nominal();
        let h = mixed_time_gap(1.5, &p).unwrap();
        assert!((h - 1.38961).abs() < 5e-6, "{h}");
        // harmonic cross-check from the tau-weighted form
        let tm = mixed_time_constant(&p);
        let inv = tm * (0.15 / (2.0 * 1.5) + 0.85 / (60.0 * 1.0));
        assert!(close(h, 1.0 / inv, 1e-13));
    }

    #[test]
    fn mixed_time_gap_rejects_non_positive() {
        let p = ModelParams::nominal();
        assert!(matches!(mixed_time_gap(0.0, &p), Err(Error::Domain { .. })));
        assert!(matches!(
            mixed_time_gap(-1.0, &p),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn mixed_time_constant_values() {
        assert_eq!(mixed_time_constant(&with(|s| s.penetration = 0.0)), 60.0);
        assert_eq!(mixed_time_constant(&with(|s| s.penetration = 1.0)), 2.0);
        let t = mixed_time_constant(&ModelParams::nominal());
        assert!((t - 11.2150).abs() < 5e-5, "{t}");
    }

    #[test]
    fn v_mix_values() {
        let p = ModelParams::nominal();
        let v = v_mix(0.107356, 1.5, &p).unwrap();
        assert!((v - 3.1048).abs() < 5e-4, "{v}");
        let near_jam = v_mix(p.rho_jam() * (1.0 - 1e-12), 1.5, &p).unwrap();
        assert!(near_jam < 1e-9);
        assert!(v_mix(p.rho_jam(), 1.5, &p).is_err());
        assert!(v_mix(0.03, 1.5, &p).is_err());
    }

    #[test]
    fn v_mix_reduces_to_single_class_laws() {
        let p1 = with(|s| s.penetration = 1.0);
        let p0 = with(|s| s.penetration = 0.0);
        for &rho in &[0.05, 0.1, 0.15, 0.19] {
            for &h in &[0.8, 1.2, 2.0] {
                let a = v_mix(rho, h, &p1).unwrap();
                let b = constant_time_gap_speed(rho, h, &p1).unwrap();
                assert!(close(a, b, 1e-14));
                let a = v_mix(rho, h, &p0).unwrap();
                let b = constant_time_gap_speed(rho, 1.0, &p0).unwrap();
                assert!(close(a, b, 1e-14));
            }
        }
    }

    #[test]
    fn envelope_endpoints_and_kink() {
        let p = ModelParams::nominal();
        assert_eq!(fundamental_diagram_bounds(0.0, &p).unwrap(), (0.0, 0.0));
        let (lo, hi) = fundamental_diagram_bounds(p.rho_jam(), &p).unwrap();
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);
        let (lo, hi) = fundamental_diagram_bounds(p.rho_min(), &p).unwrap();
        let q_hmax = (1.0 - 5.0 * p.rho_min()) / p.h_max();
        assert!(close(lo, q_hmax, 1e-12));
        // both branches of Q_hmin agree at the kink
        assert!(close(hi, p.v_f() * p.rho_min(), 1e-12));
        assert!(close(hi, (1.0 - 5.0 * p.rho_min()) / p.h_min(), 1e-12));
        assert!(fundamental_diagram_bounds(0.3, &p).is_err());
    }

    #[test]
    fn char_speeds_at_equilibrium() {
        let p = ModelParams::nominal();
        let eq = equilibrium(&p).unwrap();
        let (l1, l2) = char_speeds(eq.rho_bar, eq.v_bar, eq.h_acc_bar, &p);
        assert!((l1 - 3.1048).abs() < 5e-4);
        // lambda2 = -L / h_mix at equilibrium
        assert!(close(l2, -5.0 / eq.h_mix_bar, 1e-12));
        assert!((l2 + 3.598).abs() < 1e-3, "{l2}");
        let v_edge = 1.0 / (eq.h_mix_bar * eq.rho_bar);
        let (_, l2) = char_speeds(eq.rho_bar, v_edge, eq.h_acc_bar, &p);
        assert!(l2.abs() < 1e-15);
        let (a, b) = char_speeds(0.12, 2.0, 1.1, &p);
        let hm = mixed_time_gap(1.1, &p).unwrap();
        assert!(close(a - b, 1.0 / (hm * 0.12), 1e-14));
    }

    #[test]
    fn omega_membership() {
        let p = ModelParams::nominal();
        let eq = equilibrium(&p).unwrap();
        assert!(in_region_omega(eq.rho_bar, eq.v_bar, eq.h_acc_bar, &p));
        assert!(!in_region_omega(p.rho_jam(), eq.v_bar, eq.h_acc_bar, &p));
        assert!(!in_region_omega(eq.rho_bar, p.v_f(), eq.h_acc_bar, &p));
        assert!(!in_region_omega(eq.rho_bar, eq.v_bar, 3.0, &p));
    }

    #[test]
    fn equilibrium_nominal() {
        let p = ModelParams::nominal();
        let eq = equilibrium(&p).unwrap();
        assert!((eq.v_bar - 3.1048).abs() < 5e-4);
        assert!((eq.rho_bar - 0.107356).abs() < 1e-5);
        assert!(close(eq.rho_bar * eq.v_bar, p.q_in(), 1e-12));
        assert!(close(
            1.0 / eq.rho_bar - 5.0,
            eq.h_mix_bar * eq.v_bar,
            1e-12
        ));
        assert!(eq.rho_bar > p.rho_min() && eq.rho_bar < p.rho_jam());
    }

    #[test]
    fn equilibrium_manual_only() {
        let p = with(|s| s.penetration = 0.0);
        let eq = equilibrium(&p).unwrap();
        assert_eq!(eq.h_mix_bar, 1.0);
        assert!(close(eq.v_bar, 2.5, 1e-12));
    }

    #[test]
    fn infeasible_inflow_rejected() {
        let err = ModelParams::new(ParamSet {
            q_in: 0.4,
            ..ParamSet::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "q_in", .. }));
    }

    #[test]
    fn time_gaps_must_lie_in_bounds() {
        for (set, name) in [
            (
                ParamSet {
                    h_acc_bar: 2.5,
                    ..ParamSet::default()
                },
                "h_acc_bar",
            ),
            (
                ParamSet {
                    h_m: 0.5,
                    ..ParamSet::default()
                },
                "h_m",
            ),
            (
                ParamSet {
                    penetration: 1.2,
                    ..ParamSet::default()
                },
                "penetration",
            ),
        ] {
            match ModelParams::new(set) {
                Err(Error::InvalidParameter { name: n, .. }) => assert_eq!(n, name),
                other => panic!("expected {name} error, got {other:?}"),
            }
        }
    }

    #[test]
    fn profile_ode_rhs() {
        let p = ModelParams::nominal();
        let eq = equilibrium(&p).unwrap();
        assert!(
            equilibrium_profile_ode_rhs(eq.v_bar, &p, &eq)
                .unwrap()
                .abs()
                < 1e-15
        );
        let tm = mixed_time_constant(&p);
        let r = equilibrium_profile_ode_rhs(2.0 * eq.v_bar, &p, &eq).unwrap();
        assert!(close(r, -1.0 / (2.0 * tm), 1e-12));
        let r = equilibrium_profile_ode_rhs(3.0, &p, &eq).unwrap();
        assert!((r - 3.115e-3).abs() < 2e-6, "{r}");
        assert!(matches!(
            equilibrium_profile_ode_rhs(0.0, &p, &eq),
            Err(Error::Singular)
        ));
    }
}
