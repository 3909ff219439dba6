//! Hamiltonians and dissipators of the cooling schemes.
//!
//! Internal level conventions:
//!
//! * two-level models: `|↓⟩ = 0`, `|↑⟩ = 1`, with the Stark-gate dressed
//!   states `|±⟩ = (|↓⟩ ± |↑⟩)/√2` (eigenstates of σ_x);
//! * three-level models: `|g1⟩ = 0`, `|g2⟩ = 1`, `|e⟩ = 2`, with the dressed
//!   ground states `|±⟩ = (|g1⟩ ± |g2⟩)/√2`. Only `|+⟩` couples to `|e⟩`.
//!
//! The continuous scheme is written in the frame rotating with all three
//! lasers, coupling laser on the Raman resonance:
//!
//! ```text
//! H = Σ_m ν_m a_m†a_m + Δ|e⟩⟨e| − Ω(|g1⟩⟨e| + |g2⟩⟨e| + h.c.)
//!     + Ω_c(|g1⟩⟨g2| K + K†|g2⟩⟨g1|),      K = Π_m exp(iη_m(a_m + a_m†))
//! ```
//!
//! With this sign of the Ω_c term the bright state `|+⟩` sits 2Ω_c above the
//! dark state, so `|−,n⟩ ↔ |+,n−1⟩` is resonant at Ω_c = ν/2, and Δ enters
//! the Lamb-Dicke rates exactly as in [`crate::rates`].

mod chain;

use nalgebra::{DMatrix, DVector};

pub use chain::{chain_hamiltonian, chain_modes, ChainSpec, MAX_CHAIN_IONS};

use crate::operator::{
    displacement_matrix, internal_operator, ladder_matrix, linalg, tensor_embed, HilbertLayout,
    Operator,
};
use crate::{Error, Result, C64};

pub const G1: usize = 0;
pub const G2: usize = 1;
pub const EXCITED: usize = 2;
pub const DOWN: usize = 0;
pub const UP: usize = 1;

/// Largest η accepted by the first-order coupling.
pub const FIRST_ORDER_MAX_ETA: f64 = 0.25;

/// Physical parameters, all frequencies in the same (trap) units.
///
/// `gamma1`, `gamma2` are half decay rates: `|e⟩` decays to `|g1⟩` at rate
/// `2·gamma1` and to `|g2⟩` at `2·gamma2`. The Γ of the rate formulas is
/// [`PhysicalParams::gamma`] = `gamma1 + gamma2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Ω, Rabi frequency of the |g_i⟩ ↔ |e⟩ lasers (and of the two-level drive).
    pub omega: f64,
    /// Ω_c, Rabi frequency of the Stark-shift coupling laser.
    pub omega_c: f64,
    /// Δ, detuning of the |g_i⟩ ↔ |e⟩ lasers.
    pub detuning: f64,
    /// δ, detuning of the two-level traveling-wave laser.
    pub carrier_detuning: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// ν, trap frequency.
    pub nu: f64,
    /// η, Lamb-Dicke parameter.
    pub eta: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            omega: 0.1,
            omega_c: 0.5,
            detuning: 0.0,
            carrier_detuning: 0.0,
            gamma1: 5.0,
            gamma2: 5.0,
            nu: 1.0,
            eta: 0.05,
        }
    }
}

impl PhysicalParams {
    /// Steady-state parabola point: Γ = 10, Ω = 1/10, ν = 1, Δ = 0, Ω_c = ν/2.
    pub fn parabola(eta: f64) -> Self {
        PhysicalParams {
            eta,
            ..Default::default()
        }
    }

    /// Monte-Carlo dynamics point: Δ = 0, Γ = 6, ν = 1, Ω_c = 1/2, Ω = 1, η = 1/10.
    pub fn dynamics() -> Self {
        PhysicalParams {
            omega: 1.0,
            omega_c: 0.5,
            detuning: 0.0,
            carrier_detuning: 0.0,
            gamma1: 3.0,
            gamma2: 3.0,
            nu: 1.0,
            eta: 0.1,
        }
    }

    /// The optimal working point Γνη = ν²η = Δνη = Ω² at Ω_c = ν/2.
    pub fn optimal_point(eta: f64, nu: f64) -> Self {
        PhysicalParams {
            omega: nu * eta.sqrt(),
            omega_c: nu / 2.0,
            detuning: nu,
            carrier_detuning: 0.0,
            gamma1: nu / 2.0,
            gamma2: nu / 2.0,
            nu,
            eta,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma1 + self.gamma2
    }

    /// Sets Γ with the symmetric split Γ₁ = Γ₂ = Γ/2.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma1 = gamma / 2.0;
        self.gamma2 = gamma / 2.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("Omega", self.omega),
            ("Omega_c", self.omega_c),
            ("Delta", self.detuning),
            ("delta", self.carrier_detuning),
            ("Gamma1", self.gamma1),
            ("Gamma2", self.gamma2),
            ("nu", self.nu),
            ("eta", self.eta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.nu <= 0.0 {
            return Err(Error::param("nu", "must be > 0"));
        }
        if self.eta < 0.0 {
            return Err(Error::param("eta", "must be >= 0"));
        }
        if self.gamma1 < 0.0 {
            return Err(Error::param("Gamma1", "must be >= 0"));
        }
        if self.gamma2 < 0.0 {
            return Err(Error::param("Gamma2", "must be >= 0"));
        }
        Ok(())
    }

    /// Fastest frequency scale, used by the default step-size rule.
    pub fn fastest_scale(&self) -> f64 {
        [
            self.nu,
            self.omega.abs(),
            self.omega_c.abs(),
            self.gamma(),
            self.detuning.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Stark-gate time π/(ηΩ_c).
    pub fn gate_time(&self) -> f64 {
        std::f64::consts::PI / (self.eta * self.omega_c)
    }
}

/// How the recoil factor `exp(iη(a + a†))` enters a Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingOrder {
    #[default]
    ExactExponential,
    /// `1 + iη(a + a†)`, only meaningful for η ≤ [`FIRST_ORDER_MAX_ETA`].
    FirstOrder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub coupling_order: CouplingOrder,
    /// Attach a photon-recoil kick to every spontaneous emission.
    pub include_recoil: bool,
    /// Lamb-Dicke parameter of the emitted photon (used only with recoil).
    pub recoil_eta: f64,
    /// Ion addressed by the coupling laser in chain models (0-based).
    pub addressed_ion: Option<usize>,
    /// Largest total Hilbert dimension accepted by the chain builder.
    pub dimension_budget: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            coupling_order: CouplingOrder::ExactExponential,
            include_recoil: false,
            recoil_eta: 0.0,
            addressed_ion: None,
            dimension_budget: 1024,
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(|0⟩ + |1⟩)/√2` padded to `internal_dim`.
pub fn dressed_plus(internal_dim: usize) -> DVector<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(internal_dim);
    v[0] = c(s);
    v[1] = c(s);
    v
}

/// `(|0⟩ − |1⟩)/√2` padded to `internal_dim`.
pub fn dressed_minus(internal_dim: usize) -> DVector<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(internal_dim);
    v[0] = c(s);
    v[1] = c(-s);
    v
}

pub fn basis_vector(dim: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[k] = c(1.0);
    v
}

/// Full-space vector `|internal⟩ ⊗ |fock...⟩`.
pub fn product_vector(
    layout: &HilbertLayout,
    internal: &DVector<C64>,
    fock: &[usize],
) -> Result<DVector<C64>> {
    let mut v = DVector::zeros(layout.dim());
    for (i, &amp) in internal.iter().enumerate() {
        v[layout.index(i, fock)?] = amp;
    }
    Ok(v)
}

fn require_layout(layout: &HilbertLayout, internal: usize, modes: usize) -> Result<()> {
    if layout.internal_dim() != internal || layout.modes() != modes {
        return Err(Error::InvalidLayout(format!(
            "expected internal dimension {internal} with {modes} mode(s), got {layout}"
        )));
    }
    Ok(())
}

fn outer(a: &DVector<C64>, b: &DVector<C64>) -> DMatrix<C64> {
    a * b.adjoint()
}

/// Phonon-space recoil factor `K` for a set of per-mode Lamb-Dicke parameters.
fn recoil_factor(cutoffs: &[usize], etas: &[f64], order: CouplingOrder) -> Result<DMatrix<C64>> {
    match order {
        CouplingOrder::ExactExponential => {
            let factors: Vec<DMatrix<C64>> = cutoffs
                .iter()
                .zip(etas)
                .map(|(&cut, &eta)| displacement_matrix(cut, c(eta)))
                .collect();
            Ok(linalg::kron_all(&factors))
        }
        CouplingOrder::FirstOrder => {
            if let Some(&eta) = etas.iter().find(|e| e.abs() > FIRST_ORDER_MAX_ETA) {
                return Err(Error::param(
                    "eta",
                    format!("first-order coupling requires |eta| <= {FIRST_ORDER_MAX_ETA}, got {eta}"),
                ));
            }
            let dim: usize = cutoffs.iter().product();
            let mut k = DMatrix::<C64>::identity(dim, dim);
            for (m, (&cut, &eta)) in cutoffs.iter().zip(etas).enumerate() {
                let a = ladder_matrix(cut);
                let x = &a + a.adjoint();
                let factors: Vec<DMatrix<C64>> = cutoffs
                    .iter()
                    .enumerate()
                    .map(|(k2, &c2)| if k2 == m { x.clone() } else { DMatrix::identity(c2, c2) })
                    .collect();
                k += linalg::kron_all(&factors) * C64::new(0.0, eta);
            }
            Ok(k)
        }
    }
}

fn phonon_energy(cutoffs: &[usize], freqs: &[f64]) -> DMatrix<C64> {
    let dim: usize = cutoffs.iter().product();
    let mut diag = vec![0.0; dim];
    let mut stride = dim;
    for (&cut, &freq) in cutoffs.iter().zip(freqs) {
        stride /= cut;
        for (i, e) in diag.iter_mut().enumerate() {
            *e += freq * ((i / stride) % cut) as f64;
        }
    }
    DMatrix::from_fn(dim, dim, |i, j| if i == j { c(diag[i]) } else { c(0.0) })
}

/// Continuous-scheme Hamiltonian for arbitrary mode frequencies and per-mode
/// Lamb-Dicke parameters of the coupling laser.
fn continuous_hamiltonian(
    layout: &HilbertLayout,
    mode_freqs: &[f64],
    etas: &[f64],
    params: &PhysicalParams,
    config: &ModelConfig,
) -> Result<Operator> {
    params.validate()?;
    let cutoffs = layout.mode_cutoffs();
    let k = recoil_factor(cutoffs, etas, config.coupling_order)?;
    let pdim = layout.phonon_dim();
    let id_ph = DMatrix::<C64>::identity(pdim, pdim);

    let g1 = basis_vector(3, G1);
    let g2 = basis_vector(3, G2);
    let e = basis_vector(3, EXCITED);

    let repump = outer(&g1, &e) + outer(&g2, &e);
    let repump = &repump + repump.adjoint();

    let mut h = DMatrix::<C64>::identity(3, 3).kronecker(&phonon_energy(cutoffs, mode_freqs));
    h += outer(&e, &e).kronecker(&id_ph) * c(params.detuning);
    h -= repump.kronecker(&id_ph) * c(params.omega);
    let coupling = outer(&g1, &g2).kronecker(&k);
    h += (&coupling + coupling.adjoint()) * c(params.omega_c);
    Operator::from_matrix(layout, h)
}

/// Continuous three-level cooling Hamiltonian on `3 ⊗ N_cut`.
pub fn three_level_hamiltonian(
    layout: &HilbertLayout,
    params: &PhysicalParams,
    config: &ModelConfig,
) -> Result<Operator> {
    require_layout(layout, 3, 1)?;
    continuous_hamiltonian(layout, &[params.nu], &[params.eta], params, config)
}

/// Spontaneous-emission jump operators `√(2Γ₁)|g1⟩⟨e|`, `√(2Γ₂)|g2⟩⟨e|`.
///
/// With recoil enabled each channel splits into two kicks `exp(±iη_e x)`
/// of half the rate, applied on every mode with the given parameters.
pub fn dissipators(
    layout: &HilbertLayout,
    params: &PhysicalParams,
    config: &ModelConfig,
) -> Result<Vec<Operator>> {
    let recoil: Vec<f64> = vec![config.recoil_eta; layout.modes()];
    dissipators_with_recoil(layout, params, config.include_recoil, &recoil)
}

pub(crate) fn dissipators_with_recoil(
    layout: &HilbertLayout,
    params: &PhysicalParams,
    include_recoil: bool,
    recoil_etas: &[f64],
) -> Result<Vec<Operator>> {
    if layout.internal_dim() != 3 {
        return Err(Error::InvalidLayout(format!(
            "dissipators need a three-level layout, got {layout}"
        )));
    }
    if params.gamma1 < 0.0 || !params.gamma1.is_finite() {
        return Err(Error::param("Gamma1", "decay rate must be >= 0"));
    }
    if params.gamma2 < 0.0 || !params.gamma2.is_finite() {
        return Err(Error::param("Gamma2", "decay rate must be >= 0"));
    }
    let mut out = Vec::new();
    for (target, half_rate) in [(G1, params.gamma1), (G2, params.gamma2)] {
        let mut local = DMatrix::<C64>::zeros(3, 3);
        local[(target, EXCITED)] = c(1.0);
        if include_recoil {
            for sign in [1.0, -1.0] {
                let mut factors = vec![local.clone() * c(half_rate.sqrt())];
                factors.extend(
                    layout
                        .mode_cutoffs()
                        .iter()
                        .zip(recoil_etas)
                        .map(|(&cut, &eta)| displacement_matrix(cut, c(sign * eta))),
                );
                out.push(tensor_embed(layout, &factors)?);
            }
        } else {
            out.push(internal_operator(layout, local * c((2.0 * half_rate).sqrt()))?);
        }
    }
    Ok(out)
}

/// Effective Stark-shift-gate Hamiltonian `(iην/2)(σ₊a − σ₋a†)` with
/// `σ₊ = |+⟩⟨−|`, on `2 ⊗ N_cut`.
pub fn stark_shift_hamiltonian(layout: &HilbertLayout, params: &PhysicalParams) -> Result<Operator> {
    require_layout(layout, 2, 1)?;
    params.validate()?;
    let sigma_plus = outer(&dressed_plus(2), &dressed_minus(2));
    let a = ladder_matrix(layout.mode_cutoffs()[0]);
    let term = sigma_plus.kronecker(&a);
    let h = (&term - term.adjoint()) * C64::new(0.0, params.eta * params.nu / 2.0);
    Operator::from_matrix(layout, h)
}

/// Two-level traveling-wave Hamiltonian in the interaction picture of the
/// free atom and phonons:
/// `H(t) = Ω(σ₊ exp(iη[a e^{−iνt} + a† e^{iνt}] − iδt) + h.c.)`, `σ₊ = |↑⟩⟨↓|`.
///
/// Builds the recoil factor from scratch at every call; [`TwoLevelDrive`]
/// is the fast path for integrators.
pub fn two_level_lab_hamiltonian(
    layout: &HilbertLayout,
    params: &PhysicalParams,
    t: f64,
) -> Result<Operator> {
    require_layout(layout, 2, 1)?;
    params.validate()?;
    let z = C64::from_polar(params.eta, -params.nu * t);
    let d = displacement_matrix(layout.mode_cutoffs()[0], z);
    let sigma_plus = outer(&basis_vector(2, UP), &basis_vector(2, DOWN));
    let term = sigma_plus.kronecker(&d) * C64::from_polar(params.omega, -params.carrier_detuning * t);
    Operator::from_matrix(layout, &term + term.adjoint())
}

/// Precomputed two-level traveling-wave drive.
///
/// Uses `D(t) = R(t) D(0) R(t)†` with `R(t) = exp(iνt a†a)`, so each
/// evaluation is a phase multiplication of the stored `D(0)`.
#[derive(Clone, Debug)]
pub struct TwoLevelDrive {
    layout: HilbertLayout,
    omega: f64,
    nu: f64,
    carrier_detuning: f64,
    d0: DMatrix<C64>,
}

impl TwoLevelDrive {
    pub fn new(layout: &HilbertLayout, params: &PhysicalParams, config: &ModelConfig) -> Result<Self> {
        require_layout(layout, 2, 1)?;
        params.validate()?;
        let cutoffs = layout.mode_cutoffs();
        let d0 = recoil_factor(cutoffs, &[params.eta], config.coupling_order)?;
        Ok(TwoLevelDrive {
            layout: layout.clone(),
            omega: params.omega,
            nu: params.nu,
            carrier_detuning: params.carrier_detuning,
            d0,
        })
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn hamiltonian_at(&self, t: f64) -> Operator {
        let n = self.d0.nrows();
        let mut h = DMatrix::<C64>::zeros(2 * n, 2 * n);
        let carrier = C64::from_polar(self.omega, -self.carrier_detuning * t);
        for col in 0..n {
            for row in 0..n {
                let phase = C64::from_polar(1.0, self.nu * t * (row as f64 - col as f64));
                let v = self.d0[(row, col)] * phase * carrier;
                // ↑ block row, ↓ block column
                h[(UP * n + row, DOWN * n + col)] = v;
                h[(DOWN * n + col, UP * n + row)] = v.conj();
            }
        }
        Operator::from_matrix(&self.layout, h).expect("drive matrix matches its layout")
    }
}
