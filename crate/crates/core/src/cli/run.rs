//! Experiment orchestration behind the command-line subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::export::{
    emit_plot_data, emit_series, export_trajectory, write_json, Manifest, PlotKind,
};
use super::scenario::{ControlMode, Scenario};
use crate::analysis::{
    certify_decay, decay_envelope, empirical_convective_check, find_unstable_root, gaussian_pulse,
    lyapunov_gains, ConvectiveCheck, EnvelopeReport, LyapunovReport, PNorm, SpectralResult,
    TOL_DISCR,
};
use crate::controller::time_gap_deviation;
use crate::error::Result;
use crate::linearization::{linear_coeffs, LinearCoeffs};
use crate::metrics::{Indices, MetricsReport};
use crate::model::{equilibrium, v_mix, Equilibrium};
use crate::solver::{simulate, simulate_linear, LinearMode, Mode, Trajectory};
use crate::state::TrafficState;

/// Runs every mode of the scenario, concurrently when there are two.
pub fn simulate_scenario(s: &Scenario) -> Result<Vec<Trajectory>> {
    let initial = s.initial_state()?;
    let run = |mode: Mode| simulate(&s.params, &s.grid, &initial, mode, &s.solver, 1);
    let modes = s.modes();
    if modes.len() == 1 {
        return Ok(vec![run(modes[0])?]);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = modes.iter().map(|&m| scope.spawn(move || run(m))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunArtifacts {
    pub trajectories: Vec<PathBuf>,
    pub metrics_report: Option<PathBuf>,
    pub analysis_report: Option<PathBuf>,
    pub plots: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn finish(
    command: &str,
    s: &Scenario,
    out: &Path,
    start: Instant,
    mut artifacts: RunArtifacts,
) -> Result<RunArtifacts> {
    let mut listed = artifacts.trajectories.clone();
    listed.extend(artifacts.metrics_report.clone());
    listed.extend(artifacts.analysis_report.clone());
    listed.extend(artifacts.plots.clone());
    let manifest = Manifest::new(
        command,
        &s.hash,
        s.grid,
        start.elapsed().as_secs_f64(),
        listed,
    );
    artifacts.manifest = out.join("manifest.json");
    write_json(&artifacts.manifest, &manifest)?;
    Ok(artifacts)
}

fn write_trajectories(
    s: &Scenario,
    trajs: &[Trajectory],
    out: &Path,
    plots: &[PlotKind],
    artifacts: &mut RunArtifacts,
) -> Result<()> {
    for traj in trajs {
        let label = traj.mode.label();
        let path = out.join(format!("trajectory_{label}.csv"));
        export_trajectory(traj, &s.params, &path, s.output.stride)?;
        artifacts.trajectories.push(path);
        for &kind in plots {
            let path = out.join(format!("plot_{label}_{}.csv", kind.name()));
            emit_plot_data(traj, &s.params, kind, &path, s.output.stride)?;
            artifacts.plots.push(path);
        }
    }
    Ok(())
}

/// Simulates, then writes trajectories, requested plot data, the metrics
/// report (when both modes ran) and the manifest. Nothing is written if a
/// simulation fails.
pub fn run(s: &Scenario, out: &Path) -> Result<RunArtifacts> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let trajs = simulate_scenario(s)?;
    let mut artifacts = RunArtifacts::default();
    write_trajectories(s, &trajs, out, &s.output.plots, &mut artifacts)?;
    if let [open, closed] = trajs.as_slice() {
        let report = crate::metrics::compare(open, closed, &s.fuel)?;
        let path = out.join("metrics.json");
        write_json(&path, &report)?;
        artifacts.metrics_report = Some(path);
    }
    finish("simulate", s, out, start, artifacts)
}

/// Indices for every simulated mode, and the comparison when both ran.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsOutput {
    pub modes: Vec<(String, Indices)>,
    pub comparison: Option<MetricsReport>,
}

pub fn metrics_of(s: &Scenario, trajs: &[Trajectory]) -> Result<MetricsOutput> {
    let modes = trajs
        .iter()
        .map(|t| Ok((t.mode.label().to_string(), Indices::of(t, &s.fuel)?)))
        .collect::<Result<_>>()?;
    let comparison = match trajs {
        [open, closed] => Some(crate::metrics::compare(open, closed, &s.fuel)?),
        _ => None,
    };
    Ok(MetricsOutput { modes, comparison })
}

pub fn metrics(s: &Scenario, out: &Path) -> Result<(MetricsOutput, RunArtifacts)> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let trajs = simulate_scenario(s)?;
    let report = metrics_of(s, &trajs)?;
    let path = out.join("metrics.json");
    write_json(&path, &report)?;
    let artifacts = RunArtifacts {
        metrics_report: Some(path),
        ..Default::default()
    };
    Ok((report, finish("metrics", s, out, start, artifacts)?))
}

/// Open and closed loop with percentage improvements of every index.
pub fn compare(s: &Scenario, out: &Path) -> Result<(MetricsReport, RunArtifacts)> {
    let s = s.clone().with_overrides(Some(ControlMode::Compare), None)?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let trajs = simulate_scenario(&s)?;
    let mut artifacts = RunArtifacts::default();
    write_trajectories(&s, &trajs, out, &s.output.plots, &mut artifacts)?;
    let report = crate::metrics::compare(&trajs[0], &trajs[1], &s.fuel)?;
    let path = out.join("metrics.json");
    write_json(&path, &report)?;
    artifacts.metrics_report = Some(path);
    Ok((report, finish("compare", &s, out, start, artifacts)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Certificate {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Certificate {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub equilibrium: Equilibrium,
    pub coeffs: LinearCoeffs,
    pub gain: f64,
    pub spectral: SpectralResult,
    pub lyapunov_closed: LyapunovReport,
    pub lyapunov_open: LyapunovReport,
    pub envelope: EnvelopeReport,
    pub required_envelope_rate: f64,
    pub convective: Vec<ConvectiveCheck>,
    pub certificates: Vec<Certificate>,
}

impl AnalysisReport {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed)
    }
}

fn lyapunov_detail(r: &LyapunovReport) -> String {
    format!(
        "{} stepwise and {} cumulative rate violations, {} increases (tol {}); worst ln(V+/V) + pkh = {:.4}",
        r.decay_violations, r.cumulative_violations, r.increase_violations, r.tol, r.worst_log_excess
    )
}

fn snap_to_grid(x: f64, dx: f64) -> f64 {
    (x / dx).round() * dx
}

/// Spectral, Lyapunov, envelope and convective certificates for the
/// scenario's parameters, gain and initial deviation.
pub fn analyze_scenario(s: &Scenario) -> Result<AnalysisReport> {
    let eq = equilibrium(&s.params)?;
    let lc = linear_coeffs(&s.params, &eq);
    let k = s.gain.value();
    let d = s.params.length();
    let mut certs = Vec::new();

    let spectral = find_unstable_root(&lc, d)?;
    certs.push(Certificate::new(
        "open-loop-instability",
        spectral.sigma_star > 0.0 && spectral.residual <= 1e-10,
        format!(
            "sigma* = {:.6e} 1/s, |f(sigma*)| = {:.3e}",
            spectral.sigma_star, spectral.residual
        ),
    ));

    let (rho0, v0) = s.initial_state()?.deviations(&eq);
    let closed = simulate_linear(
        &lc,
        &s.grid,
        &rho0,
        &v0,
        LinearMode::ClosedLoop { gain: k },
        1,
    )?;
    let open = simulate_linear(&lc, &s.grid, &rho0, &v0, LinearMode::OpenLoop, 1)?;
    let gains = lyapunov_gains(&lc, k);
    let lyapunov_closed = certify_decay(&closed, &lc, &gains, 1, k, TOL_DISCR);
    let lyapunov_open = certify_decay(&open, &lc, &gains, 1, k, TOL_DISCR);
    certs.push(Certificate::new(
        "lyapunov-closed-loop",
        lyapunov_closed.passed(),
        lyapunov_detail(&lyapunov_closed),
    ));
    certs.push(Certificate::new(
        "lyapunov-open-loop-contrast",
        !lyapunov_open.passed(),
        format!(
            "open loop must violate: {}",
            lyapunov_detail(&lyapunov_open)
        ),
    ));

    let envelope = decay_envelope(&closed, k, 5.0, (5.0, 200.0_f64.min(s.grid.horizon)));
    let required = 0.8 * k / 2.0;
    certs.push(Certificate::new(
        "c1-envelope",
        envelope.fitted_rate >= required,
        format!(
            "fitted rate {:.5} 1/s over [{}, {}] s, required {:.5}; {} samples above mu exp(-k t/2)",
            envelope.fitted_rate, envelope.window.0, envelope.window.1, required, envelope.envelope_violations
        ),
    ));

    // speed subsystem at unit Courant number, where upwinding is exact transport
    let dx = s.grid.dx;
    let dt = dx / lc.c4;
    let x1 = snap_to_grid(0.9 * d, dx);
    let center = 60.0;
    let samples = ((x1 / lc.c4 + 2.0 * center) / dt).ceil() as usize + 1;
    let pulse = gaussian_pulse(0.5, center, 10.0, dt, samples);
    let mut convective = Vec::new();
    for x2 in [snap_to_grid(0.4 * d, dx), snap_to_grid(0.65 * d, dx)] {
        for norm in [PNorm::Two, PNorm::Inf] {
            convective.push(empirical_convective_check(
                &pulse, dt, dx, x1, x2, k, lc.c4, norm,
            )?);
        }
    }
    let worst = convective
        .iter()
        .map(|c| (c.agreement() - 1.0).abs())
        .fold(0.0, f64::max);
    certs.push(Certificate::new(
        "convective-gain",
        worst <= 0.05 && convective.iter().all(ConvectiveCheck::non_amplifying),
        format!("max |measured/predicted - 1| = {worst:.3e}"),
    ));

    Ok(AnalysisReport {
        equilibrium: eq,
        coeffs: lc,
        gain: k,
        spectral,
        lyapunov_closed,
        lyapunov_open,
        envelope,
        required_envelope_rate: required,
        convective,
        certificates: certs,
    })
}

pub fn analyze(s: &Scenario, out: &Path) -> Result<(AnalysisReport, RunArtifacts)> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let report = analyze_scenario(s)?;
    let path = out.join("analysis.json");
    write_json(&path, &report)?;
    let artifacts = RunArtifacts {
        analysis_report: Some(path),
        ..Default::default()
    };
    Ok((report, finish("analyze", s, out, start, artifacts)?))
}

/// Reference figures of the nominal configuration, for side-by-side output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceValues {
    pub rho_bar_veh_per_km: f64,
    pub v_bar_km_per_h: f64,
    pub fuel1_improvement_pct: f64,
    pub comfort_improvement_pct: f64,
    pub ttt_improvement_pct: f64,
}

pub const REFERENCE: ReferenceValues = ReferenceValues {
    rho_bar_veh_per_km: 105.8,
    v_bar_km_per_h: 11.35,
    fuel1_improvement_pct: 3.9,
    comfort_improvement_pct: 90.0,
    ttt_improvement_pct: 4.0,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproductionSummary {
    pub rho_bar_veh_per_km: f64,
    pub v_bar_km_per_h: f64,
    pub open_loop_sup_v_dev: [(f64, f64); 3],
    pub closed_loop_sup_v_dev: [(f64, f64); 3],
    pub closed_loop_h_acc_range: (f64, f64),
    pub metrics: MetricsReport,
    pub certificates: Vec<Certificate>,
    pub reference: ReferenceValues,
}

fn sup_at(traj: &Trajectory, eq: &Equilibrium, t: f64) -> (f64, f64) {
    let s = &traj.states[traj.index_at(t)];
    (s.t, s.speed_deviation_sup(eq))
}

/// Full pipeline: both modes with every plot kind, metrics, analysis,
/// functional and norm series, and a summary next to the reference values.
pub fn reproduce(s: &Scenario, out: &Path) -> Result<(ReproductionSummary, RunArtifacts)> {
    let s = s.clone().with_overrides(Some(ControlMode::Compare), None)?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let trajs = simulate_scenario(&s)?;
    let mut artifacts = RunArtifacts::default();
    write_trajectories(&s, &trajs, out, &PlotKind::ALL, &mut artifacts)?;
    let (open, closed) = (&trajs[0], &trajs[1]);
    let metrics = crate::metrics::compare(open, closed, &s.fuel)?;
    let path = out.join("metrics.json");
    write_json(&path, &metrics)?;
    artifacts.metrics_report = Some(path);

    let analysis = analyze_scenario(&s)?;
    let path = out.join("analysis.json");
    write_json(&path, &analysis)?;
    artifacts.analysis_report = Some(path);
    let lyap: Vec<f64> = analysis
        .lyapunov_closed
        .samples
        .iter()
        .map(|v| v.ln())
        .collect();
    let path = out.join("series_lyapunov_ln_v.csv");
    emit_series(&path, "t,ln_v", &analysis.lyapunov_closed.times, &lyap)?;
    artifacts.plots.push(path);
    let path = out.join("series_c1_norm.csv");
    emit_series(
        &path,
        "t,c1_norm",
        &analysis.envelope.times,
        &analysis.envelope.norms,
    )?;
    artifacts.plots.push(path);

    let eq = analysis.equilibrium;
    let times = [0.0, 50.0, s.grid.horizon];
    let summary = ReproductionSummary {
        rho_bar_veh_per_km: eq.rho_bar * 1000.0,
        v_bar_km_per_h: eq.v_bar * 3.6,
        open_loop_sup_v_dev: times.map(|t| sup_at(open, &eq, t)),
        closed_loop_sup_v_dev: times.map(|t| sup_at(closed, &eq, t)),
        closed_loop_h_acc_range: closed.control_range(),
        metrics,
        certificates: analysis.certificates,
        reference: REFERENCE,
    };
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    artifacts.plots.push(path);
    Ok((
        summary,
        finish("reproduce-paper", &s, out, start, artifacts)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub checks: Vec<Certificate>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Structural invariants of the model and solver for the scenario's
/// parameters: equilibrium consistency, linearisation identities, steady
/// state preservation, discrete mass balance and the CFL margin.
pub fn seed_check(s: &Scenario) -> Result<InvariantReport> {
    let p = &s.params;
    let eq = equilibrium(p)?;
    let lc = linear_coeffs(p, &eq);
    let k = s.gain.value();
    let mut checks = Vec::new();

    let flow_err = (eq.rho_bar * eq.v_bar - p.q_in()).abs() / p.q_in();
    let speed_err = (v_mix(eq.rho_bar, eq.h_acc_bar, p)? - eq.v_bar).abs() / eq.v_bar;
    checks.push(Certificate::new(
        "equilibrium-consistency",
        flow_err <= 1e-12 && speed_err <= 1e-12,
        format!("flow rel. error {flow_err:.2e}, speed rel. error {speed_err:.2e}"),
    ));

    let diag = (lc.c2 - lc.c1 * lc.riemann_weight()).abs() / lc.c2;
    checks.push(Certificate::new(
        "riemann-diagonalisation",
        diag <= 1e-12,
        format!("|c2 - c1 h rho^2| / c2 = {diag:.2e}"),
    ));

    let mut cancel: f64 = 0.0;
    for (r, v) in [(0.01, -0.3), (-0.004, 0.2), (0.0, 1.0), (0.02, 0.0)] {
        let h = time_gap_deviation(r, v, &lc, k);
        let src = -lc.c1 * r - lc.c2 * v - lc.c3 * h;
        cancel = cancel.max((src + k * v).abs());
    }
    checks.push(Certificate::new(
        "closed-loop-cancellation",
        cancel <= 1e-12,
        format!("max |source + k v| = {cancel:.2e}"),
    ));

    let g = lyapunov_gains(&lc, k);
    checks.push(Certificate::new(
        "lyapunov-gains",
        [g.k1, g.k2, g.k3, g.k4]
            .iter()
            .all(|x| *x > 0.0 && x.is_finite())
            && g.k3 >= 1.0
            && g.k4 >= g.k3,
        format!(
            "k1 = {:.3e}, k2 = {:.3e}, k3 = {:.3}, k4 = {:.3}",
            g.k1, g.k2, g.k3, g.k4
        ),
    ));

    let steady_grid = s.grid.with_horizon(s.grid.dt * 10_000.0)?;
    let flat = TrafficState::at_equilibrium(&steady_grid, &eq);
    let traj = simulate(p, &steady_grid, &flat, Mode::OpenLoop, &s.solver, 10_000)?;
    let last = traj.states.last().expect("final state recorded");
    let drift = last
        .rho
        .iter()
        .map(|r| (r - eq.rho_bar).abs() / eq.rho_bar)
        .chain(last.v.iter().map(|v| (v - eq.v_bar).abs() / eq.v_bar))
        .fold(0.0, f64::max);
    checks.push(Certificate::new(
        "steady-state-drift",
        drift <= 1e-10,
        format!("max relative drift after 1e4 steps = {drift:.2e}"),
    ));

    let initial = s.initial_state()?;
    let mut mass_res: f64 = 0.0;
    let mut cfl: f64 = 0.0;
    for mode in s.modes() {
        let traj = simulate(p, &s.grid, &initial, mode, &s.solver, usize::MAX)?;
        cfl = cfl.max(traj.max_cfl());
        for w in traj.diagnostics.windows(2) {
            let expect = s.grid.dt * (w[0].inflow - w[0].outflow);
            mass_res = mass_res.max(((w[1].mass - w[0].mass) - expect).abs() / w[0].mass);
        }
    }
    checks.push(Certificate::new(
        "mass-balance",
        mass_res <= 1e-10,
        format!("max relative per-step residual = {mass_res:.2e}"),
    ));
    checks.push(Certificate::new(
        "cfl-margin",
        cfl <= s.solver.cfl_max,
        format!("max CFL = {cfl:.4} (limit {})", s.solver.cfl_max),
    ));
    Ok(InvariantReport { checks })
}
