//! Axial modes of a linear ion chain and the multi-mode cooling Hamiltonian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{continuous_hamiltonian, dissipators_with_recoil, ModelConfig, PhysicalParams};
use crate::operator::{HilbertLayout, Operator};
use crate::{Error, Result};

pub const MAX_CHAIN_IONS: usize = 10;

/// Normal modes of `n_ions` ions in a harmonic axial potential.
///
/// `mode_matrix[(j, m)]` is the component `b_{j,m}` of mode `m` on ion `j`.
/// Modes are sorted by frequency (centre of mass first) and each mode vector
/// is normalized with its last nonzero component positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub n_ions: usize,
    pub nu1: f64,
    pub eta_base: f64,
    pub equilibrium: Vec<f64>,
    pub mode_freqs: Vec<f64>,
    pub mode_matrix: DMatrix<f64>,
}

impl ChainSpec {
    pub fn modes(&self) -> usize {
        self.mode_freqs.len()
    }

    /// `η_{j,m} = η_base · b_{j,m} · √(ν₁/ν_m)` for the addressed ion `j`.
    pub fn lamb_dicke(&self, ion: usize) -> Result<Vec<f64>> {
        if ion >= self.n_ions {
            return Err(Error::IndexOutOfRange {
                what: "ion",
                index: ion,
                bound: self.n_ions,
            });
        }
        Ok((0..self.modes())
            .map(|m| self.eta_base * self.mode_matrix[(ion, m)] * (self.nu1 / self.mode_freqs[m]).sqrt())
            .collect())
    }
}

/// Equilibrium positions in units of the length scale `(e²/4πε₀mν₁²)^{1/3}`.
fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let spacing = 2.0 * (n as f64).powf(-0.56);
    let mut u = DVector::from_fn(n, |i, _| spacing * (i as f64 - (n as f64 - 1.0) / 2.0));
    for _ in 0..100 {
        let grad = DVector::from_fn(n, |i, _| {
            let mut g = u[i];
            for j in 0..n {
                if j != i {
                    let d = u[i] - u[j];
                    g -= d.signum() / (d * d);
                }
            }
            g
        });
        let hess = coulomb_hessian(u.as_slice());
        let step = hess
            .lu()
            .solve(&grad)
            .ok_or_else(|| Error::param("n_ions", "singular equilibrium Hessian"))?;
        // damp so that ions never cross
        let mut scale = 1.0;
        loop {
            let trial = &u - &step * scale;
            if trial.as_slice().windows(2).all(|w| w[1] > w[0]) {
                u = trial;
                break;
            }
            scale /= 2.0;
            if scale < 1e-12 {
                return Err(Error::param("n_ions", "equilibrium search stalled"));
            }
        }
        if step.amax() * scale < 1e-14 {
            break;
        }
    }
    Ok(u.iter().copied().collect())
}

fn coulomb_hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let k = 2.0 / (u[i] - u[j]).abs().powi(3);
                h[(i, i)] += k;
                h[(i, j)] -= k;
            }
        }
    }
    h
}

/// Axial normal modes for `n_ions` ions with centre-of-mass frequency `nu1`.
pub fn chain_modes(n_ions: usize, nu1: f64, eta_base: f64) -> Result<ChainSpec> {
    if n_ions == 0 || n_ions > MAX_CHAIN_IONS {
        return Err(Error::UnsupportedIonNumber(n_ions));
    }
    if !(nu1 > 0.0) || !nu1.is_finite() {
        return Err(Error::param("nu", "must be > 0"));
    }
    if !(eta_base >= 0.0) || !eta_base.is_finite() {
        return Err(Error::param("eta", "must be >= 0"));
    }
    let equilibrium = equilibrium_positions(n_ions)?;
    let eig = SymmetricEigen::new(coulomb_hessian(&equilibrium));
    let mut order: Vec<usize> = (0..n_ions).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut mode_freqs = Vec::with_capacity(n_ions);
    let mut mode_matrix = DMatrix::<f64>::zeros(n_ions, n_ions);
    for (m, &k) in order.iter().enumerate() {
        mode_freqs.push(nu1 * eig.eigenvalues[k].max(0.0).sqrt());
        let mut v = eig.eigenvectors.column(k).into_owned();
        v /= v.norm();
        let last = v.iter().rev().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
        if last < 0.0 {
            v = -v;
        }
        mode_matrix.set_column(m, &v);
    }
    Ok(ChainSpec {
        n_ions,
        nu1,
        eta_base,
        equilibrium,
        mode_freqs,
        mode_matrix,
    })
}

/// Cooling Hamiltonian and jump operators with the coupling laser on one ion.
///
/// The repump lasers act on the addressed ion only; `params.nu` and
/// `params.eta` are replaced by the chain's mode frequencies and
/// Lamb-Dicke parameters. `layout` carries one cutoff per mode.
pub fn chain_hamiltonian(
    layout: &HilbertLayout,
    spec: &ChainSpec,
    params: &PhysicalParams,
    config: &ModelConfig,
) -> Result<(Operator, Vec<Operator>)> {
    if layout.internal_dim() != 3 || layout.modes() != spec.modes() {
        return Err(Error::InvalidLayout(format!(
            "chain of {} ions needs a 3-level layout with {} modes, got {layout}",
            spec.n_ions,
            spec.modes()
        )));
    }
    if layout.dim() > config.dimension_budget {
        return Err(Error::DimensionBudget {
            dim: layout.dim(),
            budget: config.dimension_budget,
        });
    }
    let ion = config.addressed_ion.unwrap_or(0);
    let etas = spec.lamb_dicke(ion)?;
    let h = continuous_hamiltonian(layout, &spec.mode_freqs, &etas, params, config)?;
    let recoil: Vec<f64> = (0..spec.modes())
        .map(|m| config.recoil_eta * spec.mode_matrix[(ion, m)] * (spec.nu1 / spec.mode_freqs[m]).sqrt())
        .collect();
    let jumps = dissipators_with_recoil(layout, params, config.include_recoil, &recoil)?;
    Ok((h, jumps))
}
