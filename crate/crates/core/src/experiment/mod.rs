//! Named scenarios, their configs, and CSV result tables.

mod config;
mod scenarios;
mod table;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use config::{validate_config, ConfigError};
pub use scenarios::{run_scenario, ScenarioError};
pub use table::{config_from_csv, Provenance, ResultTable, Row, CSV_HEADER};

use crate::dynamics::{TruncationPolicy, NULL_SPACE_BUDGET};
use crate::model::{PhysicalParams, MAX_CHAIN_IONS};
use crate::protocol::GateModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    FigTimerate,
    FigParabola,
    FigDynamics,
    FigChain,
    Pulsed,
    Robustness,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::FigTimerate,
        ScenarioKind::FigParabola,
        ScenarioKind::FigDynamics,
        ScenarioKind::FigChain,
        ScenarioKind::Pulsed,
        ScenarioKind::Robustness,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FigTimerate => "fig-timerate",
            ScenarioKind::FigParabola => "fig-parabola",
            ScenarioKind::FigDynamics => "fig-dynamics",
            ScenarioKind::FigChain => "fig-chain",
            ScenarioKind::Pulsed => "pulsed",
            ScenarioKind::Robustness => "robustness",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::FigTimerate => "inverse cooling time vs eta against the rate line",
            ScenarioKind::FigParabola => "steady-state <n> vs Omega_c, numeric and closed form",
            ScenarioKind::FigDynamics => "Monte-Carlo <n>(t) with master-equation reference",
            ScenarioKind::FigChain => "three-ion chain, per-mode <n_m>(t) by Monte Carlo",
            ScenarioKind::Pulsed => "pulsed Stark-gate cooling cycles",
            ScenarioKind::Robustness => "relative change of W and <n> under Omega_c perturbations",
            ScenarioKind::Custom => "closed-form rates (and optional steady state) for given parameters",
        }
    }

    fn uses_sweep(self) -> bool {
        matches!(
            self,
            ScenarioKind::FigParabola | ScenarioKind::Robustness | ScenarioKind::Custom
        )
    }

    fn is_monte_carlo(self) -> bool {
        matches!(self, ScenarioKind::FigDynamics | ScenarioKind::FigChain)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Parameter swept along a table axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Omega,
    OmegaC,
    Delta,
    SmallDelta,
    Gamma,
    Nu,
    Eta,
}

impl SweepAxis {
    const ALL: [SweepAxis; 7] = [
        SweepAxis::Omega,
        SweepAxis::OmegaC,
        SweepAxis::Delta,
        SweepAxis::SmallDelta,
        SweepAxis::Gamma,
        SweepAxis::Nu,
        SweepAxis::Eta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Omega => "Omega",
            SweepAxis::OmegaC => "Omega_c",
            SweepAxis::Delta => "Delta",
            SweepAxis::SmallDelta => "delta",
            SweepAxis::Gamma => "Gamma",
            SweepAxis::Nu => "nu",
            SweepAxis::Eta => "eta",
        }
    }

    pub fn get(self, p: &PhysicalParams) -> f64 {
        match self {
            SweepAxis::Omega => p.omega,
            SweepAxis::OmegaC => p.omega_c,
            SweepAxis::Delta => p.detuning,
            SweepAxis::SmallDelta => p.carrier_detuning,
            SweepAxis::Gamma => p.gamma(),
            SweepAxis::Nu => p.nu,
            SweepAxis::Eta => p.eta,
        }
    }

    pub fn set(self, p: &PhysicalParams, v: f64) -> PhysicalParams {
        let mut q = *p;
        match self {
            SweepAxis::Omega => q.omega = v,
            SweepAxis::OmegaC => q.omega_c = v,
            SweepAxis::Delta => q.detuning = v,
            SweepAxis::SmallDelta => q.carrier_detuning = v,
            SweepAxis::Gamma => q = q.with_gamma(v),
            SweepAxis::Nu => q.nu = v,
            SweepAxis::Eta => q.eta = v,
        }
        q
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
            format!("unknown sweep axis `{s}`; valid axes: {}", names.join(", "))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    /// Evenly spaced values including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n)
            .map(|k| {
                if k == n - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    /// `|−⟩ ⊗ |n⟩` on every mode (`|↓,n⟩` for the pulsed scheme).
    Fock(usize),
    /// Thermal phonon distribution with the given mean on every mode.
    Thermal(f64),
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Fock(n) => write!(f, "fock:{n}"),
            InitialState::Thermal(m) => write!(f, "thermal:{m}"),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected `fock:<n>` or `thermal:<mean>`, got `{s}`");
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "fock" => value.trim().parse().map(InitialState::Fock).map_err(|_| bad()),
            "thermal" => {
                let m: f64 = value.trim().parse().map_err(|_| bad())?;
                if !(m >= 0.0) || !m.is_finite() {
                    return Err(bad());
                }
                Ok(InitialState::Thermal(m))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub cutoffs: Vec<usize>,
    /// Integration step; `None` uses the scenario's default rule.
    pub dt: Option<f64>,
    /// Final time of time-resolved scenarios; `None` lets the scenario pick.
    pub t_end: Option<f64>,
    pub samples: usize,
    pub n_traj: usize,
    pub master_seed: u64,
    pub truncation_threshold: f64,
    pub truncation: TruncationPolicy,
    /// Custom scenario: add numeric steady states to the closed forms.
    pub numeric: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cutoffs: vec![6],
            dt: None,
            t_end: None,
            samples: 61,
            n_traj: 500,
            master_seed: 1,
            truncation_threshold: 1e-4,
            truncation: TruncationPolicy::Error,
            numeric: false,
        }
    }
}

/// Fully resolved scenario configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub params: PhysicalParams,
    pub eta_values: Vec<f64>,
    pub initial: InitialState,
    pub targets: Vec<usize>,
    pub gate: GateModel,
    pub addressed_ion: usize,
    pub sweep: Option<Sweep>,
    pub solver: SolverSettings,
    pub output: Option<PathBuf>,
}

/// `Ω_c = ν₂/2 + 0.15` for a three-ion chain with `ν₁ = 1`.
pub fn chain_coupling() -> f64 {
    3f64.sqrt() / 2.0 + 0.15
}

impl ScenarioConfig {
    /// Defaults of a scenario before any overrides.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let mut cfg = ScenarioConfig {
            kind,
            params: PhysicalParams::parabola(0.05),
            eta_values: Vec::new(),
            initial: InitialState::Fock(1),
            targets: Vec::new(),
            gate: GateModel::Effective,
            addressed_ion: 0,
            sweep: None,
            solver: SolverSettings::default(),
            output: None,
        };
        match kind {
            ScenarioKind::FigParabola => {
                cfg.eta_values = vec![0.05, 0.1];
                cfg.sweep = Some(Sweep {
                    axis: SweepAxis::OmegaC,
                    start: 0.35,
                    stop: 0.65,
                    points: 25,
                });
            }
            ScenarioKind::FigTimerate => {
                cfg.params = PhysicalParams::optimal_point(0.05, 1.0);
                cfg.eta_values = vec![0.02, 0.05, 0.1];
                cfg.solver.samples = 2001;
            }
            ScenarioKind::FigDynamics => {
                cfg.params = PhysicalParams::dynamics();
                cfg.solver.t_end = Some(300.0);
            }
            ScenarioKind::FigChain => {
                cfg.params = PhysicalParams {
                    omega_c: chain_coupling(),
                    ..PhysicalParams::dynamics()
                };
                cfg.solver.cutoffs = vec![7, 6, 5];
                cfg.solver.t_end = Some(300.0);
                cfg.solver.dt = Some(0.2);
                cfg.solver.n_traj = 100;
            }
            ScenarioKind::Pulsed => {
                cfg.params = PhysicalParams::parabola(0.05);
                cfg.initial = InitialState::Thermal(2.0);
                cfg.targets = vec![2, 1, 1];
                cfg.solver.cutoffs = vec![25];
            }
            ScenarioKind::Robustness => {
                cfg.params = PhysicalParams::optimal_point(0.05, 1.0);
                cfg.sweep = Some(Sweep {
                    axis: SweepAxis::OmegaC,
                    start: 0.45,
                    stop: 0.55,
                    points: 3,
                });
            }
            ScenarioKind::Custom => {}
        }
        cfg
    }

    /// Scenario-dependent consistency checks, as `(field, message)` pairs.
    pub(crate) fn semantic_errors(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut err = |f: &str, m: String| out.push((f.to_string(), m));
        let kind = self.kind;
        let modes = if kind == ScenarioKind::FigChain { 3 } else { 1 };
        if self.solver.cutoffs.len() != modes {
            err(
                "solver.cutoffs",
                format!("{kind} needs {modes} cutoff(s), got {}", self.solver.cutoffs.len()),
            );
        }
        let internal = if kind == ScenarioKind::Pulsed { 2 } else { 3 };
        let dim: usize = internal * self.solver.cutoffs.iter().product::<usize>();
        let steady = matches!(kind, ScenarioKind::FigParabola | ScenarioKind::Robustness)
            || (kind == ScenarioKind::Custom && self.solver.numeric);
        if steady && dim > NULL_SPACE_BUDGET {
            err(
                "solver.cutoffs",
                format!("steady-state dimension {dim} exceeds the null-space budget {NULL_SPACE_BUDGET}"),
            );
        }
        if kind == ScenarioKind::FigChain {
            if dim > 1024 {
                err("solver.cutoffs", format!("chain dimension {dim} exceeds the budget 1024"));
            }
            if self.addressed_ion >= 3 {
                err(
                    "scenario.addressed_ion",
                    format!("must be below 3 (ions are 0-based, at most {MAX_CHAIN_IONS} supported)"),
                );
            }
        }
        if self.sweep.is_some() && !kind.uses_sweep() {
            err("sweep", format!("{kind} does not take a sweep"));
        }
        if let Some(s) = &self.sweep {
            for v in s.values() {
                if let Err(e) = s.axis.set(&self.params, v).validate() {
                    err("sweep", format!("{} = {v}: {e}", s.axis.name()));
                    break;
                }
            }
        }
        if matches!(kind, ScenarioKind::FigParabola | ScenarioKind::FigTimerate) && self.eta_values.is_empty() {
            err("scenario.eta_values", format!("{kind} needs at least one eta"));
        }
        if kind == ScenarioKind::FigTimerate && self.eta_values.iter().any(|&e| e <= 0.0) {
            err("scenario.eta_values", "fig-timerate needs eta > 0".into());
        }
        if kind.is_monte_carlo() && matches!(self.initial, InitialState::Thermal(_)) {
            err(
                "scenario.initial",
                "Monte-Carlo scenarios start from a pure Fock state".into(),
            );
        }
        if let InitialState::Fock(n) = self.initial {
            if self.solver.cutoffs.iter().any(|&c| n >= c) {
                err("scenario.initial", format!("Fock level {n} is outside the cutoff"));
            }
        }
        if kind == ScenarioKind::Pulsed {
            if self.targets.is_empty() {
                err("scenario.targets", "pulsed needs at least one target".into());
            }
            if self.params.eta <= 0.0 {
                err("params.eta", "pulsed needs eta > 0".into());
            }
            if self.params.gamma() <= 0.0 {
                err("params.Gamma", "pulsed needs Gamma > 0".into());
            }
        }
        out
    }

    /// Canonical config text; parsing it back gives the same config.
    pub fn to_ini(&self) -> String {
        let p = &self.params;
        let s = &self.solver;
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let ints = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        out.push_str("[scenario]\n");
        out.push_str(&format!("name = {}\n", self.kind));
        if !self.eta_values.is_empty() {
            out.push_str(&format!("eta_values = {}\n", list(&self.eta_values)));
        }
        out.push_str(&format!("initial = {}\n", self.initial));
        if !self.targets.is_empty() {
            out.push_str(&format!("targets = {}\n", ints(&self.targets)));
        }
        let gate = match self.gate {
            GateModel::Effective => "effective",
            GateModel::ExactTwoLevel => "exact",
        };
        out.push_str(&format!("gate = {gate}\n"));
        out.push_str(&format!("addressed_ion = {}\n", self.addressed_ion));
        out.push_str("\n[params]\n");
        for (k, v) in [
            ("Omega", p.omega),
            ("Omega_c", p.omega_c),
            ("Delta", p.detuning),
            ("delta", p.carrier_detuning),
            ("Gamma1", p.gamma1),
            ("Gamma2", p.gamma2),
            ("nu", p.nu),
            ("eta", p.eta),
        ] {
            out.push_str(&format!("{k} = {v:?}\n"));
        }
        if let Some(sw) = &self.sweep {
            out.push_str("\n[sweep]\n");
            out.push_str(&format!("axis = {}\n", sw.axis.name()));
            out.push_str(&format!("start = {:?}\n", sw.start));
            out.push_str(&format!("stop = {:?}\n", sw.stop));
            out.push_str(&format!("points = {}\n", sw.points));
        }
        out.push_str("\n[solver]\n");
        out.push_str(&format!("cutoffs = {}\n", ints(&s.cutoffs)));
        if let Some(dt) = s.dt {
            out.push_str(&format!("dt = {dt:?}\n"));
        }
        if let Some(t) = s.t_end {
            out.push_str(&format!("t_end = {t:?}\n"));
        }
        out.push_str(&format!("samples = {}\n", s.samples));
        out.push_str(&format!("n_traj = {}\n", s.n_traj));
        out.push_str(&format!("master_seed = {}\n", s.master_seed));
        out.push_str(&format!("truncation_threshold = {:?}\n", s.truncation_threshold));
        let policy = match s.truncation {
            TruncationPolicy::Error => "error",
            TruncationPolicy::Warn => "warn",
        };
        out.push_str(&format!("truncation = {policy}\n"));
        out.push_str(&format!("numeric = {}\n", s.numeric));
        out
    }
}

#[cfg(test)]
mod tests;
