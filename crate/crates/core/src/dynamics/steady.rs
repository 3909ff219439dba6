use nalgebra::{DMatrix, DVector};

use super::{evolve_master, OpenSystem, SolverOptions, TimeGrid};
use crate::operator::{linalg, QuantumState};
use crate::{Error, Result, C64};

/// Largest Hilbert dimension handled by the dense null-space solve
/// (the superoperator has `d²×d²` entries).
pub const NULL_SPACE_BUDGET: usize = 48;

const RESIDUAL_TOL: f64 = 1e-8;
const PIVOT_RATIO: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SteadyStateMethod {
    NullSpace,
    LongTime,
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub state: QuantumState,
    /// Largest entry of `𝓛ρ`.
    pub residual: f64,
    pub method: SteadyStateMethod,
}

/// Column-stacked superoperator: `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
fn liouvillian(system: &OpenSystem) -> DMatrix<C64> {
    let d = system.layout().dim();
    let heff = system.hamiltonian_at(0.0) + system.damping();
    let id = DMatrix::<C64>::identity(d, d);
    let minus_i = C64::new(0.0, -1.0);
    let mut s = id.kronecker(&(&heff * minus_i));
    // −i(−ρ H_eff†) = i ρ H_eff†
    s += (heff.adjoint() * C64::new(0.0, 1.0)).transpose().kronecker(&id);
    for l in system.active_jumps() {
        s += l.map(|z| z.conj()).kronecker(&l);
    }
    s
}

fn residual(system: &OpenSystem, rho: &DMatrix<C64>) -> f64 {
    let heff = system.hamiltonian_at(0.0) + system.damping();
    let a = &heff * rho;
    let mut out = (&a - a.adjoint()) * C64::new(0.0, -1.0);
    for l in system.active_jumps() {
        out += &l * rho * l.adjoint();
    }
    linalg::max_abs(&out)
}

/// Unique steady state from the kernel of the Liouvillian.
///
/// One row of `𝓛 vec(ρ) = 0` is replaced by `tr ρ = 1`; a rank deficit of
/// the resulting system means the kernel is degenerate, which is reported
/// rather than resolved.
pub fn steady_state(system: &OpenSystem) -> Result<SteadyStateResult> {
    if !system.is_static() {
        return Err(Error::param("hamiltonian", "steady state needs a static Hamiltonian"));
    }
    let d = system.layout().dim();
    if d > NULL_SPACE_BUDGET {
        return Err(Error::DimensionBudget {
            dim: d,
            budget: NULL_SPACE_BUDGET,
        });
    }
    let mut s = liouvillian(system);
    let n = d * d;
    for col in 0..n {
        s[(0, col)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        s[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);

    let lu = s.full_piv_lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..n).map(|k| u[(k, k)].norm()).collect();
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let deficit = pivots.iter().filter(|&&p| p <= PIVOT_RATIO * largest).count();
    if deficit > 0 {
        return Err(Error::DegenerateKernel { deficit });
    }
    let x = lu
        .solve(&rhs)
        .ok_or(Error::DegenerateKernel { deficit: 1 })?;
    let mut rho = DMatrix::from_column_slice(d, d, x.as_slice());
    linalg::symmetrize(&mut rho);
    let tr = rho.trace();
    rho /= tr;
    let res = residual(system, &rho);
    if res > RESIDUAL_TOL {
        return Err(Error::SteadyStateNotConverged {
            windows: 0,
            change: res,
        });
    }
    Ok(SteadyStateResult {
        state: QuantumState::density_unchecked(system.layout(), rho),
        residual: res,
        method: SteadyStateMethod::NullSpace,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongTimeOptions {
    /// Evolution time per convergence window.
    pub window: f64,
    /// Largest allowed entry change of ρ across one window.
    pub tol: f64,
    pub max_windows: usize,
    pub dt: f64,
    pub solver: SolverOptions,
}

/// Steady state by evolving `initial` window by window until ρ changes by
/// at most `tol` (max entry) across a window.
pub fn steady_state_long_time(
    system: &OpenSystem,
    initial: &QuantumState,
    opts: &LongTimeOptions,
) -> Result<SteadyStateResult> {
    let mut state = initial.to_density();
    let mut t = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_windows {
        let grid = TimeGrid::new(t, t + opts.window, opts.dt, usize::MAX)?;
        let series = evolve_master(system, &state, &grid, &opts.solver)?;
        let prev = state.density_matrix();
        state = series.final_state;
        t += opts.window;
        change = linalg::max_abs(&(state.density_matrix() - prev));
        if change <= opts.tol {
            let res = if system.is_static() {
                residual(system, &state.density_matrix())
            } else {
                change
            };
            return Ok(SteadyStateResult {
                state,
                residual: res,
                method: SteadyStateMethod::LongTime,
            });
        }
    }
    Err(Error::SteadyStateNotConverged {
        windows: opts.max_windows,
        change,
    })
}
