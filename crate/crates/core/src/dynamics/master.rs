use nalgebra::DMatrix;

use super::{Diagnostics, OpenSystem, Observer, SolverOptions, TimeGrid, TimeSeries};
use crate::operator::{linalg, QuantumState};
use crate::{Error, Result, C64};

/// Lindblad generator `ρ ↦ −i(H_eff ρ − ρ H_eff†) + Σ LρL†`.
struct Generator<'a> {
    system: &'a OpenSystem,
    damping: DMatrix<C64>,
    static_heff: Option<DMatrix<C64>>,
    jumps: Vec<DMatrix<C64>>,
    jumps_adj: Vec<DMatrix<C64>>,
}

impl<'a> Generator<'a> {
    fn new(system: &'a OpenSystem) -> Self {
        let damping = system.damping();
        let static_heff = system
            .is_static()
            .then(|| system.hamiltonian_at(0.0) + &damping);
        let jumps = system.active_jumps();
        let jumps_adj = jumps.iter().map(|l| l.adjoint()).collect();
        Generator {
            system,
            damping,
            static_heff,
            jumps,
            jumps_adj,
        }
    }

    fn heff(&self, t: f64) -> std::borrow::Cow<'_, DMatrix<C64>> {
        match &self.static_heff {
            Some(h) => std::borrow::Cow::Borrowed(h),
            None => std::borrow::Cow::Owned(self.system.hamiltonian_at(t) + &self.damping),
        }
    }

    fn apply(&self, heff: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let a = heff * rho;
        // ρ H_eff† = (H_eff ρ)† for Hermitian ρ
        let mut out = (&a - a.adjoint()) * C64::new(0.0, -1.0);
        for (l, ld) in self.jumps.iter().zip(&self.jumps_adj) {
            out += l * rho * ld;
        }
        out
    }

    fn rk4(&self, t: f64, h: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let h0 = self.heff(t);
        let hm = self.heff(t + 0.5 * h);
        let h1 = self.heff(t + h);
        let half = C64::new(0.5 * h, 0.0);
        let full = C64::new(h, 0.0);
        let k1 = self.apply(&h0, rho);
        let k2 = self.apply(&hm, &(rho + &k1 * half));
        let k3 = self.apply(&hm, &(rho + &k2 * half));
        let k4 = self.apply(&h1, &(rho + &k3 * full));
        let mut next = rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        linalg::symmetrize(&mut next);
        next
    }
}

/// Integrates the Lindblad master equation on `grid` with fixed-step RK4.
///
/// Every `check_every` steps one step is compared with two half steps; if the
/// difference exceeds `richardson_tol` the step is halved for the rest of the
/// run. ρ is re-symmetrized after every step.
pub fn evolve_master(
    system: &OpenSystem,
    rho0: &QuantumState,
    grid: &TimeGrid,
    opts: &SolverOptions,
) -> Result<TimeSeries> {
    let layout = system.layout();
    layout.ensure_same(rho0.layout())?;
    let gen = Generator::new(system);
    let observer = Observer::new(layout);
    let mut diag = Diagnostics::new(layout.modes());

    let mut rho = rho0.density_matrix();
    linalg::symmetrize(&mut rho);

    let samples = grid.sample_steps();
    let mut times = Vec::with_capacity(samples.len());
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); observer.len()];
    let h_base = grid.step();
    let mut substeps: usize = 1;
    let mut next_sample = 0;

    let mut record = |step: usize, rho: &DMatrix<C64>, diag: &mut Diagnostics| -> Result<()> {
        let t = grid.time_at(step);
        let ch = observer.density(rho);
        diag.monitor(t, observer.tops(&ch), opts)?;
        let tr = rho.trace();
        diag.max_trace_error = diag.max_trace_error.max((tr - C64::new(1.0, 0.0)).norm());
        if opts.positivity_probe {
            let m = linalg::min_hermitian_eigenvalue(rho);
            diag.min_eigenvalue = Some(diag.min_eigenvalue.map_or(m, |x: f64| x.min(m)));
        }
        times.push(t);
        for (c, v) in ch.into_iter().enumerate() {
            values[c].push(v);
        }
        Ok(())
    };

    for step in 0..=grid.n_steps() {
        if next_sample < samples.len() && samples[next_sample] == step {
            record(step, &rho, &mut diag)?;
            next_sample += 1;
        }
        if step == grid.n_steps() {
            break;
        }
        let t = grid.time_at(step);
        if opts.check_every > 0 && step % opts.check_every == 0 {
            loop {
                let h = h_base / substeps as f64;
                let one = gen.rk4(t, h, &rho);
                let mid = gen.rk4(t, 0.5 * h, &rho);
                let two = gen.rk4(t + 0.5 * h, 0.5 * h, &mid);
                let err = linalg::max_abs(&(one - &two));
                if err <= opts.richardson_tol {
                    break;
                }
                diag.refinements += 1;
                if diag.refinements > opts.max_refinements {
                    return Err(Error::StepUnderflow {
                        time: t,
                        refinements: diag.refinements,
                    });
                }
                substeps *= 2;
            }
        }
        let h = h_base / substeps as f64;
        for k in 0..substeps {
            rho = gen.rk4(t + k as f64 * h, h, &rho);
            diag.steps += 1;
        }
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(linalg::hermiticity_error(&rho));
        if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::StepUnderflow {
                time: t,
                refinements: diag.refinements,
            });
        }
    }

    Ok(TimeSeries {
        times,
        names: super::channel_names(layout),
        values,
        final_state: QuantumState::density_unchecked(layout, rho),
        diagnostics: diag,
    })
}
