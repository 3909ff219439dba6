use std::fmt;

use super::{InitialState, Provenance, ResultTable, ScenarioConfig, ScenarioKind, SweepAxis};
use crate::dynamics::{
    default_dt, derive_seeds, ensemble_run, evolve_master, steady_state, OpenSystem, SolverOptions, TimeGrid,
    TimeSeries,
};
use crate::model::{
    basis_vector, chain_hamiltonian, chain_modes, dissipators, dressed_minus, three_level_hamiltonian, ModelConfig,
    PhysicalParams, DOWN,
};
use crate::operator::{HilbertLayout, QuantumState};
use crate::protocol::{build_cycle, run_pulsed, PulsedOptions};
use crate::rates::{self, fock_distribution, rate_coefficients, rate_eq_evolve, RATE_EQ_N_MAX};
use crate::{Error, Execution, Result};

/// Solver failure with the scenario and point it happened at.
#[derive(Debug)]
pub struct ScenarioError {
    pub scenario: ScenarioKind,
    pub context: String,
    pub source: Error,
}

impl ScenarioError {
    /// True when the truncation monitor aborted the run.
    pub fn is_truncation(&self) -> bool {
        fn walk(e: &Error) -> bool {
            match e {
                Error::Truncation { .. } => true,
                Error::Trajectory { source, .. } => walk(source),
                _ => false,
            }
        }
        walk(&self.source)
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.scenario, self.context, self.source)
    }
}

impl std::error::Error for ScenarioError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait Context<T> {
    fn at(self, cfg: &ScenarioConfig, context: impl fmt::Display) -> std::result::Result<T, ScenarioError>;
}

impl<T> Context<T> for Result<T> {
    fn at(self, cfg: &ScenarioConfig, context: impl fmt::Display) -> std::result::Result<T, ScenarioError> {
        self.map_err(|source| ScenarioError {
            scenario: cfg.kind,
            context: context.to_string(),
            source,
        })
    }
}

type Outcome = std::result::Result<ResultTable, ScenarioError>;

/// Runs a validated scenario. Sweep points and trajectories are spread over
/// `exec`; the table is assembled in axis order, so it does not depend on
/// the execution mode or thread count.
pub fn run_scenario(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let mut table = match cfg.kind {
        ScenarioKind::FigParabola => parabola(cfg, exec),
        ScenarioKind::FigTimerate => timerate(cfg, exec),
        ScenarioKind::FigDynamics => dynamics(cfg, exec),
        ScenarioKind::FigChain => chain(cfg, exec),
        ScenarioKind::Pulsed => pulsed(cfg),
        ScenarioKind::Robustness => robustness(cfg, exec),
        ScenarioKind::Custom => custom(cfg, exec),
    }?;
    table.meta("scenario", cfg.kind);
    table.meta("master_seed", cfg.solver.master_seed);
    table.meta("starkcool_version", env!("CARGO_PKG_VERSION"));
    table.metadata.rotate_right(3);
    table.config = cfg.to_ini();
    table.check().at(cfg, "assembling the table")?;
    Ok(table)
}

fn solver_options(cfg: &ScenarioConfig) -> SolverOptions {
    SolverOptions {
        truncation_threshold: cfg.solver.truncation_threshold,
        truncation_policy: cfg.solver.truncation,
        ..SolverOptions::default()
    }
}

fn continuous_system(layout: &HilbertLayout, params: &PhysicalParams) -> Result<OpenSystem> {
    let config = ModelConfig::default();
    let h = three_level_hamiltonian(layout, params, &config)?;
    let jumps = dissipators(layout, params, &config)?;
    OpenSystem::new(h, jumps)
}

fn steady_n(params: &PhysicalParams, cutoff: usize, opts: &SolverOptions) -> Result<f64> {
    let layout = HilbertLayout::single_mode(3, cutoff)?;
    let system = continuous_system(&layout, params)?;
    let ss = steady_state(&system)?;
    let tops = ss.state.fock_distribution(0)?;
    let top = *tops.last().expect("cutoff >= 2");
    if top > opts.truncation_threshold {
        if let crate::dynamics::TruncationPolicy::Error = opts.truncation_policy {
            return Err(Error::Truncation {
                time: f64::INFINITY,
                mode: 0,
                population: top,
                threshold: opts.truncation_threshold,
            });
        }
    }
    Ok(tops.iter().enumerate().map(|(n, p)| n as f64 * p).sum())
}

/// Grid on `[0, t_end]` with exactly `samples` equally spaced samples and a
/// step no longer than `dt`.
fn sampled_grid(t_end: f64, dt: f64, samples: usize) -> Result<TimeGrid> {
    let intervals = samples.max(2) - 1;
    let per = ((t_end / dt / intervals as f64) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    TimeGrid::new(0.0, t_end, t_end / (per * intervals) as f64, per)
}

fn initial_state(layout: &HilbertLayout, internal: &nalgebra::DVector<crate::C64>, init: InitialState) -> Result<QuantumState> {
    match init {
        InitialState::Fock(n) => QuantumState::product(layout, internal, &vec![n; layout.modes()]),
        InitialState::Thermal(m) => QuantumState::thermal(layout, internal, &vec![m; layout.modes()]),
    }
}

fn sweep_values(cfg: &ScenarioConfig) -> Vec<f64> {
    cfg.sweep.map(|s| s.values()).unwrap_or_default()
}

fn parabola(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let sweep = cfg.sweep.expect("validated: fig-parabola has a sweep");
    let cutoff = cfg.solver.cutoffs[0];
    let opts = solver_options(cfg);
    let mut table = ResultTable::new(sweep.axis.name());
    for &eta in &cfg.eta_values {
        let points: Vec<PhysicalParams> = sweep
            .values()
            .into_iter()
            .map(|v| sweep.axis.set(&PhysicalParams { eta, ..cfg.params }, v))
            .collect();
        let numeric = exec.try_map(&points, |p| {
            steady_n(p, cutoff, &opts).at(cfg, format!("eta = {eta}, {} = {}", sweep.axis.name(), sweep.axis.get(p)))
        })?;
        let name = format!("n_ss[eta={eta}]");
        for (p, n) in points.iter().zip(numeric) {
            let x = sweep.axis.get(p);
            table.push(x, &name, n, Provenance::Numeric);
            let rc = rate_coefficients(p).at(cfg, format!("eta = {eta}, {} = {x}", sweep.axis.name()))?;
            if let Some(n) = rc.n_ss {
                table.push(x, &name, n, Provenance::Analytic);
            }
        }
    }
    Ok(table)
}

/// Master-equation `⟨n⟩(t)` from `|−,1⟩`, evolved in windows of `1/W_q`
/// until it drops below `n_end` or `t_max` is reached.
fn cooling_run(
    params: &PhysicalParams,
    cutoff: usize,
    dt: f64,
    samples_per_window: usize,
    t_max: f64,
    n_end: f64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let layout = HilbertLayout::single_mode(3, cutoff)?;
    let system = continuous_system(&layout, params)?;
    let window = 1.0 / rates::quoted_rate(params);
    let mut state = QuantumState::product(&layout, &dressed_minus(3), &[1])?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    while t < t_max {
        let len = window.min(t_max - t);
        let g = sampled_grid(len, dt, samples_per_window)?;
        let grid = TimeGrid::new(t, t + len, g.max_dt(), g.sample_stride())?;
        let out: TimeSeries = evolve_master(&system, &state, &grid, opts)?;
        let skip = usize::from(!times.is_empty());
        times.extend_from_slice(&out.times[skip..]);
        values.extend_from_slice(&out.mean_n(0)[skip..]);
        state = out.final_state;
        t += len;
        if values.last().is_some_and(|&n| n < n_end) {
            break;
        }
    }
    Ok((times, values))
}

fn timerate(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let cutoff = cfg.solver.cutoffs[0];
    let opts = solver_options(cfg);
    let points: Vec<PhysicalParams> = cfg
        .eta_values
        .iter()
        .map(|&eta| PhysicalParams::optimal_point(eta, cfg.params.nu))
        .collect();
    let results = exec.try_map(&points, |p| {
        let window = 1.0 / rates::quoted_rate(p);
        let t_max = cfg.solver.t_end.unwrap_or(20.0 * window);
        let dt = cfg.solver.dt.unwrap_or_else(|| default_dt(p));
        let (times, values) = cooling_run(p, cutoff, dt, cfg.solver.samples, t_max, 0.01, &opts)
            .at(cfg, format!("eta = {}", p.eta))?;
        crate::dynamics::cooling_time(&times, &values, 1.0, 0.01).at(cfg, format!("eta = {}", p.eta))
    })?;
    let mut table = ResultTable::new("eta");
    table.meta(
        "prescription",
        "per eta: Gamma = Delta = nu, Omega^2 = nu^2 eta, Omega_c = nu/2",
    );
    table.meta("cooling_time", "from <n> = 1 to <n> = 0.01, start |-,1>");
    for (p, tc) in points.iter().zip(results) {
        let rc = rate_coefficients(p).at(cfg, format!("eta = {}", p.eta))?;
        table.push(p.eta, "inv_cooling_time", 1.0 / tc, Provenance::Numeric);
        table.push(p.eta, "W_quoted", rates::quoted_rate(p), Provenance::Analytic);
        table.push(p.eta, "W", rc.w, Provenance::Analytic);
        table.push(p.eta, "half_rabi_rate", 1.0 / p.gate_time(), Provenance::Analytic);
    }
    Ok(table)
}

fn dynamics(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let p = &cfg.params;
    let cutoff = cfg.solver.cutoffs[0];
    let opts = solver_options(cfg);
    let t_end = cfg.solver.t_end.unwrap_or(300.0);
    let dt = cfg.solver.dt.unwrap_or_else(|| default_dt(p));
    let grid = sampled_grid(t_end, dt, cfg.solver.samples).at(cfg, "time grid")?;
    let layout = HilbertLayout::single_mode(3, cutoff).at(cfg, "layout")?;
    let system = continuous_system(&layout, p).at(cfg, "model")?;
    let psi0 = initial_state(&layout, &dressed_minus(3), cfg.initial).at(cfg, "initial state")?;

    let seeds = derive_seeds(cfg.solver.master_seed, cfg.solver.n_traj);
    let ens = ensemble_run(&system, &psi0, &grid, &seeds, &opts, exec).at(cfg, "Monte-Carlo ensemble")?;
    let master = evolve_master(&system, &psi0, &grid, &opts).at(cfg, "master equation")?;
    let InitialState::Fock(n0) = cfg.initial else {
        unreachable!("validated: Monte-Carlo scenarios start from a Fock state")
    };
    let p0 = fock_distribution(n0, RATE_EQ_N_MAX).at(cfg, "rate equation")?;
    let rate = rate_eq_evolve(&p0, p, &grid).at(cfg, "rate equation")?;

    let mut table = ResultTable::new("t");
    table.meta("n_traj", cfg.solver.n_traj);
    table.meta("gate_time", p.gate_time());
    let mean = ens.mean_of("n0").expect("single-mode channels");
    let se = ens.std_error_of("n0").expect("single-mode channels");
    for (k, &t) in ens.times.iter().enumerate() {
        table.push_with_error(t, "n_mc", mean[k], se[k], Provenance::Numeric);
        table.push(t, "n_master", master.mean_n(0)[k], Provenance::Numeric);
        table.push(t, "n_rate_eq", rate.mean[k], Provenance::Analytic);
    }
    Ok(table)
}

fn chain(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let p = &cfg.params;
    let opts = solver_options(cfg);
    let spec = chain_modes(3, p.nu, p.eta).at(cfg, "normal modes")?;
    let layout = HilbertLayout::new(3, cfg.solver.cutoffs.clone()).at(cfg, "layout")?;
    let config = ModelConfig {
        addressed_ion: Some(cfg.addressed_ion),
        ..ModelConfig::default()
    };
    let (h, jumps) = chain_hamiltonian(&layout, &spec, p, &config).at(cfg, "chain model")?;
    let system = OpenSystem::new(h, jumps).at(cfg, "chain model")?;
    let t_end = cfg.solver.t_end.unwrap_or(300.0);
    let dt = cfg.solver.dt.unwrap_or(0.2);
    let grid = sampled_grid(t_end, dt, cfg.solver.samples).at(cfg, "time grid")?;
    let psi0 = initial_state(&layout, &dressed_minus(3), cfg.initial).at(cfg, "initial state")?;
    let seeds = derive_seeds(cfg.solver.master_seed, cfg.solver.n_traj);
    let ens = ensemble_run(&system, &psi0, &grid, &seeds, &opts, exec).at(cfg, "Monte-Carlo ensemble")?;

    let mut table = ResultTable::new("t");
    table.meta("n_traj", cfg.solver.n_traj);
    let freqs: Vec<String> = spec.mode_freqs.iter().map(|f| format!("{f:.16e}")).collect();
    table.meta("mode_frequencies", freqs.join(" "));
    let etas = spec.lamb_dicke(cfg.addressed_ion).at(cfg, "normal modes")?;
    let etas: Vec<String> = etas.iter().map(|e| format!("{e:.16e}")).collect();
    table.meta("mode_lamb_dicke", etas.join(" "));
    for m in 0..layout.modes() {
        let name = format!("n{m}");
        let mean = ens.mean_of(&name).expect("one channel per mode");
        let se = ens.std_error_of(&name).expect("one channel per mode");
        for (k, &t) in ens.times.iter().enumerate() {
            table.push_with_error(t, format!("n_mode{m}"), mean[k], se[k], Provenance::Numeric);
        }
    }
    Ok(table)
}

fn pulsed(cfg: &ScenarioConfig) -> Outcome {
    let p = &cfg.params;
    let layout = HilbertLayout::single_mode(2, cfg.solver.cutoffs[0]).at(cfg, "layout")?;
    let state0 = initial_state(&layout, &basis_vector(2, DOWN), cfg.initial).at(cfg, "initial state")?;
    let schedule = cfg
        .targets
        .iter()
        .map(|&n| build_cycle(p, n))
        .collect::<Result<Vec<_>>>()
        .at(cfg, "pulse schedule")?;
    let opts = PulsedOptions {
        gate: cfg.gate,
        dt: cfg.solver.dt,
        solver: solver_options(cfg),
    };
    let out = run_pulsed(&state0, &schedule, p, &opts).at(cfg, "pulsed cycles")?;

    let mut table = ResultTable::new("cycle");
    table.meta("targets", cfg.targets.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "));
    let n = out.mean_n(0);
    let down = out.channel("p_down").expect("two-level channels");
    for k in 0..out.times.len() {
        let c = k as f64;
        table.push(c, "t", out.times[k], Provenance::Numeric);
        table.push(c, "n", n[k], Provenance::Numeric);
        table.push(c, "p_down", down[k], Provenance::Numeric);
        if k > 0 {
            let target = cfg.targets[k - 1];
            let d = crate::protocol::stark_gate_duration(p, target).at(cfg, "gate duration")?;
            table.push(c, "gate_duration", d, Provenance::Analytic);
            table.push(c, "gate_time_quoted", p.gate_time(), Provenance::Analytic);
        }
    }
    Ok(table)
}

struct RobustPoint {
    w: f64,
    n: Option<f64>,
    n_numeric: f64,
}

fn relative(x: f64, x0: f64) -> f64 {
    (x - x0) / x0
}

fn robustness(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let sweep = cfg.sweep.expect("validated: robustness has a sweep");
    let cutoff = cfg.solver.cutoffs[0];
    let opts = solver_options(cfg);
    let centre = sweep.axis.get(&cfg.params);
    let values = sweep.values();
    let mut table = ResultTable::new(sweep.axis.name());
    table.meta("centre", format!("{centre:?}"));

    // Second family: the same relative perturbations applied to Omega.
    let families: Vec<(String, SweepAxis, f64)> = {
        let mut f = vec![(String::new(), sweep.axis, centre)];
        if sweep.axis != SweepAxis::Omega {
            f.push(("[vary=Omega]".to_string(), SweepAxis::Omega, cfg.params.omega));
        }
        f
    };
    for (suffix, axis, base) in &families {
        let points: Vec<PhysicalParams> = values
            .iter()
            .map(|&v| axis.set(&cfg.params, base * v / centre))
            .collect();
        let results = exec.try_map(&points, |p| {
            let rc = rate_coefficients(p).at(cfg, format!("{} = {}", axis.name(), axis.get(p)))?;
            let n_numeric = steady_n(p, cutoff, &opts).at(cfg, format!("{} = {}", axis.name(), axis.get(p)))?;
            Ok(RobustPoint {
                w: rc.w,
                n: rc.n_ss,
                n_numeric,
            })
        })?;
        let reference = {
            let rc = rate_coefficients(&cfg.params).at(cfg, "centre point")?;
            let n_numeric = steady_n(&cfg.params, cutoff, &opts).at(cfg, "centre point")?;
            RobustPoint {
                w: rc.w,
                n: rc.n_ss,
                n_numeric,
            }
        };
        for (&x, r) in values.iter().zip(&results) {
            table.push(x, format!("W{suffix}"), r.w, Provenance::Analytic);
            table.push(x, format!("rel_change_W{suffix}"), relative(r.w, reference.w), Provenance::Analytic);
            if let (Some(n), Some(n0)) = (r.n, reference.n) {
                table.push(x, format!("n_ss{suffix}"), n, Provenance::Analytic);
                table.push(x, format!("rel_change_n{suffix}"), relative(n, n0), Provenance::Analytic);
            }
            table.push(x, format!("n_ss{suffix}"), r.n_numeric, Provenance::Numeric);
            table.push(
                x,
                format!("rel_change_n{suffix}"),
                relative(r.n_numeric, reference.n_numeric),
                Provenance::Numeric,
            );
        }
    }
    Ok(table)
}

fn custom(cfg: &ScenarioConfig, exec: Execution) -> Outcome {
    let (axis, points): (&str, Vec<PhysicalParams>) = match &cfg.sweep {
        Some(s) => (s.axis.name(), sweep_values(cfg).into_iter().map(|v| s.axis.set(&cfg.params, v)).collect()),
        None => ("point", vec![cfg.params]),
    };
    let x_of = |k: usize, p: &PhysicalParams| cfg.sweep.map_or(k as f64, |s| s.axis.get(p));
    let mut table = ResultTable::new(axis);
    for (k, p) in points.iter().enumerate() {
        let x = x_of(k, p);
        let rc = rate_coefficients(p).at(cfg, format!("{axis} = {x}"))?;
        table.push(x, "A_minus", rc.a_minus, Provenance::Analytic);
        table.push(x, "A_plus", rc.a_plus, Provenance::Analytic);
        table.push(x, "W", rc.w, Provenance::Analytic);
        if let Some(n) = rc.n_ss {
            table.push(x, "n_ss", n, Provenance::Analytic);
        }
    }
    if cfg.solver.numeric {
        let opts = solver_options(cfg);
        let cutoff = cfg.solver.cutoffs[0];
        let numeric = exec.try_map(&points, |p| steady_n(p, cutoff, &opts).at(cfg, "numeric steady state"))?;
        for (k, (p, n)) in points.iter().zip(numeric).enumerate() {
            table.push(x_of(k, p), "n_ss", n, Provenance::Numeric);
        }
    }
    Ok(table)
}
