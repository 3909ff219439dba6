//! Pulsed Stark-shift-gate cooling.
//!
//! The cycle works on the two-level model `{|↓⟩, |↑⟩} ⊗ N_cut`:
//!
//! 1. an ideal carrier pulse maps `|↓⟩ → |−⟩`, `|↑⟩ → |+⟩`;
//! 2. a Stark-shift gate transfers `|−,n⟩ → |+,n−1⟩`;
//! 3. the inverse carrier map takes `|+⟩ → |↑⟩`, `|−⟩ → |↓⟩`;
//! 4. `|↑⟩` decays to `|↓⟩` at rate 2Γ without changing the phonon number.
//!
//! Carrier pulses act instantaneously. The gate stage either uses the
//! effective Hamiltonian `H_ss` or the full traveling-wave Hamiltonian at
//! `Ω = ν/2`, whose result is mapped back into the dressed frame.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dynamics::{evolve_master, OpenSystem, Observer, SolverOptions, TimeGrid, TimeSeries};
use crate::model::{
    stark_shift_hamiltonian, ModelConfig, PhysicalParams, TwoLevelDrive, DOWN, UP,
};
use crate::operator::{linalg, tensor_embed, HilbertLayout, Operator, QuantumState};
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    /// Carrier π/2 mapping between the bare and dressed bases.
    CarrierPi,
    StarkGate,
    DissipativeWait,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub duration: f64,
    /// Fock level the gate is timed for (stark-gate pulses only).
    pub target_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
    pub cycle_count: usize,
}

impl PulseSequence {
    pub fn repeated(mut self, cycles: usize) -> Self {
        self.cycle_count = cycles;
        self
    }

    pub fn cycle_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// Gate time `π/(ην√n)` for full transfer `|−,n⟩ → |+,n−1⟩` under `H_ss`.
pub fn stark_gate_duration(params: &PhysicalParams, target_n: usize) -> Result<f64> {
    if target_n == 0 {
        return Err(Error::param("target_n", "must be >= 1"));
    }
    if !(params.eta > 0.0) {
        return Err(Error::param("eta", "gate needs eta > 0"));
    }
    Ok(PI / (params.eta * params.nu * (target_n as f64).sqrt()))
}

/// Shortest reset wait `5/(2Γ)`, leaving at most `e⁻⁵` in `|↑⟩`.
pub fn reset_duration(params: &PhysicalParams) -> Result<f64> {
    let g = params.gamma();
    if !(g > 0.0) {
        return Err(Error::param("Gamma", "reset stage needs Gamma > 0"));
    }
    Ok(5.0 / (2.0 * g))
}

/// One cooling cycle timed for `target_n`.
pub fn build_cycle(params: &PhysicalParams, target_n: usize) -> Result<PulseSequence> {
    params.validate()?;
    let gate = stark_gate_duration(params, target_n)?;
    let wait = reset_duration(params)?;
    // nominal length of a carrier π/2 pulse at Ω = ν/2
    let carrier = PI / (2.0 * params.nu);
    let pulse = |kind, duration| Pulse {
        kind,
        duration,
        target_n,
    };
    Ok(PulseSequence {
        pulses: vec![
            pulse(PulseKind::CarrierPi, carrier),
            pulse(PulseKind::StarkGate, gate),
            pulse(PulseKind::CarrierPi, carrier),
            pulse(PulseKind::DissipativeWait, wait),
        ],
        cycle_count: 1,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GateModel {
    /// Exact unitary of `H_ss`.
    #[default]
    Effective,
    /// Traveling-wave Hamiltonian at `Ω = ν/2`, integrated in time.
    ExactTwoLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulsedOptions {
    pub gate: GateModel,
    /// Integration step of time-resolved stages; `None` uses 0.05 of the
    /// fastest scale.
    pub dt: Option<f64>,
    pub solver: SolverOptions,
}

impl Default for PulsedOptions {
    fn default() -> Self {
        PulsedOptions {
            gate: GateModel::Effective,
            dt: None,
            solver: SolverOptions::default(),
        }
    }
}

struct Stages {
    layout: HilbertLayout,
    to_dressed: DMatrix<C64>,
    from_dressed: DMatrix<C64>,
    decay: OpenSystem,
}

impl Stages {
    fn new(layout: &HilbertLayout, params: &PhysicalParams) -> Result<Self> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // columns: images of |↓⟩ and |↑⟩
        let u1 = DMatrix::from_row_slice(2, 2, &[
            C64::new(s, 0.0), C64::new(s, 0.0),
            C64::new(-s, 0.0), C64::new(s, 0.0),
        ]);
        let mut factors = vec![u1.clone()];
        factors.extend(layout.mode_cutoffs().iter().map(|&c| DMatrix::identity(c, c)));
        let to_dressed = tensor_embed(layout, &factors)?.into_matrix();
        factors[0] = u1.adjoint();
        let from_dressed = tensor_embed(layout, &factors)?.into_matrix();

        let mut lower = DMatrix::<C64>::zeros(2, 2);
        lower[(DOWN, UP)] = C64::new((2.0 * params.gamma()).sqrt(), 0.0);
        factors[0] = lower;
        let jump = tensor_embed(layout, &factors)?;
        let decay = OpenSystem::new(Operator::zeros(layout), vec![jump])?;
        Ok(Stages {
            layout: layout.clone(),
            to_dressed,
            from_dressed,
            decay,
        })
    }
}

fn conjugate(u: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = u * rho * u.adjoint();
    linalg::symmetrize(&mut out);
    out
}

/// Density matrix after a Stark-gate stage of length `duration`, expressed in
/// the frame of `H_ss`.
pub fn gate_stage(
    layout: &HilbertLayout,
    rho: &DMatrix<C64>,
    params: &PhysicalParams,
    duration: f64,
    opts: &PulsedOptions,
) -> Result<DMatrix<C64>> {
    match opts.gate {
        GateModel::Effective => {
            let h = stark_shift_hamiltonian(layout, params)?;
            let u = linalg::hermitian_function(h.matrix(), |e| C64::from_polar(1.0, -e * duration));
            Ok(conjugate(&u, rho))
        }
        GateModel::ExactTwoLevel => {
            let drive_params = PhysicalParams {
                omega: params.nu / 2.0,
                ..*params
            };
            let drive = TwoLevelDrive::new(layout, &drive_params, &ModelConfig::default())?;
            let system = OpenSystem::driven(layout, move |t| drive.hamiltonian_at(t), Vec::new())?;
            let dt = opts
                .dt
                .unwrap_or(0.05 / params.nu.max(drive_params.omega).max(params.carrier_detuning.abs()));
            let grid = TimeGrid::new(0.0, duration, dt, usize::MAX)?;
            let start = QuantumState::density_unchecked(layout, rho.clone());
            let out = evolve_master(&system, &start, &grid, &opts.solver)?;
            // undo the carrier rotation exp(−iΩσ_x T) of the dressed frame
            let angle = drive_params.omega * duration;
            let sx = DMatrix::from_row_slice(2, 2, &[
                C64::new(0.0, 0.0), C64::new(1.0, 0.0),
                C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            ]);
            let rot = linalg::hermitian_function(&sx, |e| C64::from_polar(1.0, e * angle));
            let mut factors = vec![rot];
            factors.extend(layout.mode_cutoffs().iter().map(|&c| DMatrix::identity(c, c)));
            let v = tensor_embed(layout, &factors)?;
            Ok(conjugate(v.matrix(), &out.final_state.density_matrix()))
        }
    }
}

/// Runs each sequence in order, each for its `cycle_count` repetitions,
/// sampling the standard channels at the start and after every cycle.
pub fn run_pulsed(
    state0: &QuantumState,
    schedule: &[PulseSequence],
    params: &PhysicalParams,
    opts: &PulsedOptions,
) -> Result<TimeSeries> {
    params.validate()?;
    let layout = state0.layout().clone();
    if layout.internal_dim() != 2 || layout.modes() != 1 {
        return Err(Error::InvalidLayout(format!(
            "pulsed cooling runs on a two-level single-mode layout, got {layout}"
        )));
    }
    if schedule.is_empty() || schedule.iter().any(|s| s.pulses.is_empty()) {
        return Err(Error::param("sequence", "schedule must contain pulses"));
    }
    let stages = Stages::new(&layout, params)?;
    let observer = Observer::new(&layout);
    let mut rho = state0.density_matrix();
    let mut t = 0.0;
    let mut times = vec![t];
    let first = observer.density(&rho);
    let mut values: Vec<Vec<f64>> = first.into_iter().map(|v| vec![v]).collect();
    let mut diag = crate::dynamics::Diagnostics::new(1);
    let mut dressed = false;

    for seq in schedule {
        for _ in 0..seq.cycle_count {
            for pulse in &seq.pulses {
                if !(pulse.duration > 0.0) {
                    return Err(Error::param("duration", "pulse durations must be > 0"));
                }
                match pulse.kind {
                    PulseKind::CarrierPi => {
                        let u = if dressed { &stages.from_dressed } else { &stages.to_dressed };
                        rho = conjugate(u, &rho);
                        dressed = !dressed;
                    }
                    PulseKind::StarkGate => {
                        if pulse.target_n == 0 {
                            return Err(Error::param("target_n", "must be >= 1"));
                        }
                        rho = gate_stage(&layout, &rho, params, pulse.duration, opts)?;
                    }
                    PulseKind::DissipativeWait => {
                        let dt = opts.dt.unwrap_or(0.05 / (2.0 * params.gamma()));
                        let grid = TimeGrid::new(0.0, pulse.duration, dt, usize::MAX)?;
                        let start = QuantumState::density_unchecked(&stages.layout, rho);
                        let out = evolve_master(&stages.decay, &start, &grid, &opts.solver)?;
                        diag.max_trace_error = diag.max_trace_error.max(out.diagnostics.max_trace_error);
                        rho = out.final_state.density_matrix();
                    }
                }
                t += pulse.duration;
            }
            let ch = observer.density(&rho);
            diag.monitor(t, observer.tops(&ch), &opts.solver)?;
            times.push(t);
            for (c, v) in ch.into_iter().enumerate() {
                values[c].push(v);
            }
        }
    }

    Ok(TimeSeries {
        times,
        names: crate::dynamics::channel_names(&layout),
        values,
        final_state: QuantumState::density_unchecked(&layout, rho),
        diagnostics: diag,
    })
}
