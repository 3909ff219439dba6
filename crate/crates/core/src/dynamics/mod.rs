//! Time evolution: Lindblad integration, Liouvillian steady states and
//! quantum-jump trajectory ensembles.

mod master;
mod mc;
mod observe;
mod steady;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use master::evolve_master;
pub use mc::{derive_seeds, ensemble_run, mc_evolve, Trajectory, TrajectoryEnsemble};
pub use observe::{channel_names, Observer};
pub use steady::{
    steady_state, steady_state_long_time, LongTimeOptions, SteadyStateMethod, SteadyStateResult,
    NULL_SPACE_BUDGET,
};

use crate::model::PhysicalParams;
use crate::operator::{HilbertLayout, Operator, QuantumState, HERMITIAN_TOL};
use crate::{Error, Result, C64};

/// Output sampling and integration step.
///
/// The interval `[t0, t1]` is split into `n_steps` equal steps no longer than
/// `dt`; a sample is taken at `t0`, every `sample_stride` steps, and at `t1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    dt: f64,
    sample_stride: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dt: f64, sample_stride: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(Error::InvalidGrid(format!("need finite t1 > t0, got [{t0}, {t1}]")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        if sample_stride == 0 {
            return Err(Error::InvalidGrid("sample_stride must be >= 1".into()));
        }
        Ok(TimeGrid {
            t0,
            t1,
            dt,
            sample_stride,
        })
    }

    /// Grid with `dt = 0.05 / max(ν, Ω, Ω_c, Γ, |Δ|)` and roughly
    /// `samples` output points.
    pub fn resolving(params: &PhysicalParams, t0: f64, t1: f64, samples: usize) -> Result<Self> {
        let dt = default_dt(params);
        let steps = ((t1 - t0) / dt).ceil().max(1.0) as usize;
        let stride = (steps / samples.max(1)).max(1);
        Self::new(t0, t1, dt, stride)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn max_dt(&self) -> f64 {
        self.dt
    }

    pub fn sample_stride(&self) -> usize {
        self.sample_stride
    }

    pub fn n_steps(&self) -> usize {
        (((self.t1 - self.t0) / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Actual step length.
    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps() as f64
    }

    pub fn time_at(&self, step: usize) -> f64 {
        if step == self.n_steps() {
            self.t1
        } else {
            self.t0 + step as f64 * self.step()
        }
    }

    /// Step indices at which samples are recorded.
    pub fn sample_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut out: Vec<usize> = (0..=n).step_by(self.sample_stride).collect();
        if *out.last().unwrap() != n {
            out.push(n);
        }
        out
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_steps().into_iter().map(|k| self.time_at(k)).collect()
    }
}

pub fn default_dt(params: &PhysicalParams) -> f64 {
    0.05 / params.fastest_scale().max(f64::MIN_POSITIVE)
}

type DriveFn = dyn Fn(f64) -> Operator + Send + Sync;

/// Static or explicitly time-dependent Hamiltonian.
#[derive(Clone)]
pub enum Hamiltonian {
    Static(Operator),
    Driven(Arc<DriveFn>),
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Static(h) => f.debug_tuple("Static").field(&h.dim()).finish(),
            Hamiltonian::Driven(_) => f.write_str("Driven(..)"),
        }
    }
}

/// Hamiltonian plus Lindblad jump operators on one layout.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    layout: HilbertLayout,
    hamiltonian: Hamiltonian,
    jumps: Vec<Operator>,
}

impl OpenSystem {
    pub fn new(h: Operator, jumps: Vec<Operator>) -> Result<Self> {
        let herm = h.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::param(
                "hamiltonian",
                format!("not Hermitian (max deviation {herm:.2e})"),
            ));
        }
        let layout = h.layout().clone();
        for l in &jumps {
            layout.ensure_same(l.layout())?;
        }
        Ok(OpenSystem {
            layout,
            hamiltonian: Hamiltonian::Static(h),
            jumps,
        })
    }

    pub fn closed(h: Operator) -> Result<Self> {
        Self::new(h, Vec::new())
    }

    /// Time-dependent Hamiltonian `h(t)`; its layout is checked at `t = 0`.
    pub fn driven<F>(layout: &HilbertLayout, h: F, jumps: Vec<Operator>) -> Result<Self>
    where
        F: Fn(f64) -> Operator + Send + Sync + 'static,
    {
        layout.ensure_same(h(0.0).layout())?;
        for l in &jumps {
            layout.ensure_same(l.layout())?;
        }
        Ok(OpenSystem {
            layout: layout.clone(),
            hamiltonian: Hamiltonian::Driven(Arc::new(h)),
            jumps,
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }

    pub fn is_static(&self) -> bool {
        matches!(self.hamiltonian, Hamiltonian::Static(_))
    }

    pub fn hamiltonian_at(&self, t: f64) -> DMatrix<C64> {
        match &self.hamiltonian {
            Hamiltonian::Static(h) => h.matrix().clone(),
            Hamiltonian::Driven(f) => f(t).into_matrix(),
        }
    }

    /// Jump matrices with exactly-zero operators dropped.
    pub(crate) fn active_jumps(&self) -> Vec<DMatrix<C64>> {
        self.jumps
            .iter()
            .filter(|l| l.matrix().iter().any(|z| *z != C64::new(0.0, 0.0)))
            .map(|l| l.matrix().clone())
            .collect()
    }

    /// `−(i/2) Σ L†L`, the anti-Hermitian part of `H_eff`.
    pub(crate) fn damping(&self) -> DMatrix<C64> {
        let d = self.layout.dim();
        let mut acc = DMatrix::<C64>::zeros(d, d);
        for l in self.active_jumps() {
            acc += l.adjoint() * &l;
        }
        acc * C64::new(0.0, -0.5)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TruncationPolicy {
    /// Abort with [`Error::Truncation`].
    #[default]
    Error,
    /// Record a [`TruncationWarning`] and continue.
    Warn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Top-Fock-level population that trips the truncation monitor.
    pub truncation_threshold: f64,
    pub truncation_policy: TruncationPolicy,
    /// Tolerance of the step-doubling check (max entry difference).
    pub richardson_tol: f64,
    /// Steps between step-doubling checks.
    pub check_every: usize,
    /// Number of step halvings allowed before giving up.
    pub max_refinements: u32,
    /// Record the smallest eigenvalue of ρ at every sample.
    pub positivity_probe: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            truncation_threshold: 1e-4,
            truncation_policy: TruncationPolicy::Error,
            richardson_tol: 1e-7,
            check_every: 100,
            max_refinements: 12,
            positivity_probe: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationWarning {
    pub time: f64,
    pub mode: usize,
    pub population: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    /// Smallest sampled eigenvalue of ρ, when the probe is enabled.
    pub min_eigenvalue: Option<f64>,
    pub max_top_population: Vec<f64>,
    pub truncation_warnings: Vec<TruncationWarning>,
    pub steps: usize,
    pub refinements: u32,
}

impl Diagnostics {
    pub(crate) fn new(modes: usize) -> Self {
        Diagnostics {
            max_top_population: vec![0.0; modes],
            ..Default::default()
        }
    }

    /// Applies the truncation monitor to one sample.
    pub(crate) fn monitor(&mut self, time: f64, tops: &[f64], opts: &SolverOptions) -> Result<()> {
        for (mode, &pop) in tops.iter().enumerate() {
            self.max_top_population[mode] = self.max_top_population[mode].max(pop);
            if pop > opts.truncation_threshold {
                match opts.truncation_policy {
                    TruncationPolicy::Error => {
                        return Err(Error::Truncation {
                            time,
                            mode,
                            population: pop,
                            threshold: opts.truncation_threshold,
                        })
                    }
                    TruncationPolicy::Warn => {
                        if !self.truncation_warnings.iter().any(|w| w.mode == mode) {
                            self.truncation_warnings.push(TruncationWarning {
                                time,
                                mode,
                                population: pop,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sampled observables of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `values[c][k]` is channel `c` at sample `k`.
    pub values: Vec<Vec<f64>>,
    pub final_state: QuantumState,
    pub diagnostics: Diagnostics,
}

impl TimeSeries {
    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
    }

    /// `⟨n⟩` of one mode.
    pub fn mean_n(&self, mode: usize) -> &[f64] {
        self.channel(&format!("n{mode}"))
            .unwrap_or_else(|| panic!("no mode {mode} in this series"))
    }
}

fn crossing(times: &[f64], values: &[f64], from: usize, level: f64) -> Option<f64> {
    for k in from.max(1)..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        if a >= level && b <= level {
            if a == b {
                return Some(times[k - 1]);
            }
            let frac = (a - level) / (a - b);
            return Some(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    None
}

/// Cooling time of a decreasing `⟨n⟩` series: the first crossing of
/// `n_end` after the last crossing of `n_start`, both by linear interpolation.
///
/// A series that starts at `n_start` (within 1e-9) counts as crossing it at
/// the first sample.
pub fn cooling_time(times: &[f64], values: &[f64], n_start: f64, n_end: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidGrid("series needs at least two samples".into()));
    }
    let tol = 1e-9;
    let mut start: Option<(usize, f64)> = None;
    if (values[0] - n_start).abs() <= tol {
        start = Some((0, times[0]));
    }
    for k in 1..values.len() {
        let (a, b) = (values[k - 1], values[k]);
        if a >= n_start - tol && b < n_start - tol {
            let t = if (a - b).abs() > 0.0 {
                times[k - 1] + (a - n_start).max(0.0) / (a - b) * (times[k] - times[k - 1])
            } else {
                times[k - 1]
            };
            start = Some((k - 1, t));
        }
    }
    let (k0, t0) = start.ok_or(Error::ThresholdNotReached { threshold: n_start })?;
    let t_end = crossing(times, values, k0 + 1, n_end)
        .or_else(|| (values[k0] <= n_end).then_some(times[k0]))
        .ok_or(Error::ThresholdNotReached { threshold: n_end })?;
    Ok(t_end - t0)
}
