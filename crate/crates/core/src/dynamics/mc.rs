use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Diagnostics, OpenSystem, Observer, SolverOptions, TimeGrid, TimeSeries};
use crate::operator::{linalg, QuantumState};
use crate::{Error, Execution, Result, C64};

/// Jumps are localized to `1/LOCALIZE` of a grid step.
const LOCALIZE: usize = 8;

/// Per-trajectory seeds derived from `(master_seed, index)`.
///
/// Stream `index` of a ChaCha8 generator keyed by `master_seed` supplies the
/// seed, so every trajectory is independent of how many others are run.
pub fn derive_seeds(master_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(i);
            rng.next_u64()
        })
        .collect()
}

enum Drift {
    /// `U(k·h/8)` for `k = 1, 2, 4, 8`, indexed by `log2 k`.
    Exact([DMatrix<C64>; 4]),
    /// RK4 on the non-Hermitian Schrödinger equation.
    Rk4 { damping: DMatrix<C64> },
}

/// Everything a trajectory needs that does not depend on the seed.
pub(crate) struct Plan<'a> {
    system: &'a OpenSystem,
    grid: TimeGrid,
    drift: Drift,
    jumps: Vec<DMatrix<C64>>,
    observer: Observer,
}

impl<'a> Plan<'a> {
    pub(crate) fn new(system: &'a OpenSystem, grid: &TimeGrid) -> Result<Self> {
        let h = grid.step() / LOCALIZE as f64;
        let drift = if system.is_static() {
            let heff = system.hamiltonian_at(0.0) + system.damping();
            let u1 = linalg::expm(&(heff * C64::new(0.0, -h)));
            let u2 = &u1 * &u1;
            let u4 = &u2 * &u2;
            let u8 = &u4 * &u4;
            Drift::Exact([u1, u2, u4, u8])
        } else {
            Drift::Rk4 {
                damping: system.damping(),
            }
        };
        Ok(Plan {
            system,
            grid: *grid,
            drift,
            jumps: system.active_jumps(),
            observer: Observer::new(system.layout()),
        })
    }

    fn rk4(&self, damping: &DMatrix<C64>, t: f64, h: f64, psi: &DVector<C64>) -> DVector<C64> {
        let mi = C64::new(0.0, -1.0);
        let f = |t: f64, v: &DVector<C64>| -> DVector<C64> {
            (self.system.hamiltonian_at(t) + damping) * v * mi
        };
        let half = C64::new(0.5 * h, 0.0);
        let k1 = f(t, psi);
        let k2 = f(t + 0.5 * h, &(psi + &k1 * half));
        let k3 = f(t + 0.5 * h, &(psi + &k2 * half));
        let k4 = f(t + h, &(psi + &k3 * C64::new(h, 0.0)));
        psi + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }

    /// Replaces `psi` by a normalized post-jump state.
    fn jump(&self, psi: &mut DVector<C64>, rng: &mut ChaCha8Rng, t: f64) -> Result<usize> {
        let candidates: Vec<DVector<C64>> = self.jumps.iter().map(|l| l * &*psi).collect();
        let weights: Vec<f64> = candidates.iter().map(linalg::norm_sqr).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NormUnderflow {
                time: t,
                reason: "no jump channel has weight at a threshold crossing".into(),
            });
        }
        let mut pick = rng.random::<f64>() * total;
        let mut channel = weights.len() - 1;
        for (k, &w) in weights.iter().enumerate() {
            if pick < w {
                channel = k;
                break;
            }
            pick -= w;
        }
        while weights[channel] == 0.0 {
            channel -= 1;
        }
        *psi = &candidates[channel] / C64::new(weights[channel].sqrt(), 0.0);
        Ok(channel)
    }

    pub(crate) fn run(&self, psi0: &DVector<C64>, seed: u64) -> Result<Trajectory> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            // threshold in (0, 1]
            1.0 - rng.random::<f64>()
        };
        let mut threshold = draw(&mut rng);
        let mut psi = psi0.clone();
        let mut jumps = Vec::new();

        let samples = self.grid.sample_steps();
        let mut times = Vec::with_capacity(samples.len());
        let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(samples.len()); self.observer.len()];
        let mut next_sample = 0;
        let unit = self.grid.step() / LOCALIZE as f64;

        for step in 0..=self.grid.n_steps() {
            if next_sample < samples.len() && samples[next_sample] == step {
                times.push(self.grid.time_at(step));
                for (c, v) in self.observer.ket(&psi).into_iter().enumerate() {
                    values[c].push(v);
                }
                next_sample += 1;
            }
            if step == self.grid.n_steps() {
                break;
            }
            let t_step = self.grid.time_at(step);
            let mut done = 0;
            while done < LOCALIZE {
                let t = t_step + done as f64 * unit;
                let mut chunk = LOCALIZE - done;
                chunk = 1 << (usize::BITS - 1 - chunk.leading_zeros());
                loop {
                    let trial = match &self.drift {
                        Drift::Exact(us) => &us[chunk.trailing_zeros() as usize] * &psi,
                        Drift::Rk4 { damping } => {
                            let mut v = psi.clone();
                            for k in 0..chunk {
                                v = self.rk4(damping, t + k as f64 * unit, unit, &v);
                            }
                            v
                        }
                    };
                    let norm2 = linalg::norm_sqr(&trial);
                    if !norm2.is_finite() {
                        return Err(Error::NormUnderflow {
                            time: t,
                            reason: "state norm is not finite".into(),
                        });
                    }
                    if norm2 > threshold {
                        psi = trial;
                        done += chunk;
                        break;
                    }
                    if chunk == 1 {
                        psi = trial;
                        done += 1;
                        let t_jump = t + unit;
                        let channel = self.jump(&mut psi, &mut rng, t_jump)?;
                        jumps.push((t_jump, channel));
                        threshold = draw(&mut rng);
                        break;
                    }
                    chunk /= 2;
                }
            }
        }

        let norm = linalg::norm_sqr(&psi).sqrt();
        if !(norm > 1e-150) {
            return Err(Error::NormUnderflow {
                time: self.grid.t1(),
                reason: "final state has vanishing norm".into(),
            });
        }
        let layout = self.system.layout();
        Ok(Trajectory {
            seed,
            jumps,
            series: TimeSeries {
                times,
                names: super::channel_names(layout),
                values,
                final_state: QuantumState::ket_unchecked(layout, psi / C64::new(norm, 0.0)),
                diagnostics: Diagnostics::new(layout.modes()),
            },
        })
    }
}

/// One quantum-jump trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub seed: u64,
    /// `(time, channel)` of every jump; channels index the nonzero jump
    /// operators in their original order.
    pub jumps: Vec<(f64, usize)>,
    pub series: TimeSeries,
}

fn initial_ket(system: &OpenSystem, psi0: &QuantumState) -> Result<DVector<C64>> {
    system.layout().ensure_same(psi0.layout())?;
    psi0.as_ket()
        .cloned()
        .ok_or_else(|| Error::InvalidState("quantum-jump trajectories need a ket".into()))
}

/// Single waiting-time trajectory.
///
/// The norm of the unnormalized state decays under `H_eff`; a jump happens
/// when it drops below a uniform threshold drawn from the seeded stream.
/// Crossings are localized by step halving to `1/8` of the grid step.
/// Static Hamiltonians use exact propagators of `H_eff`, driven ones RK4.
pub fn mc_evolve(
    system: &OpenSystem,
    psi0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
) -> Result<Trajectory> {
    let psi = initial_ket(system, psi0)?;
    Plan::new(system, grid)?.run(&psi, seed)
}

/// Aggregated trajectory ensemble.
#[derive(Clone, Debug)]
pub struct TrajectoryEnsemble {
    /// Seeds in aggregation (ascending) order.
    pub seeds: Vec<u64>,
    pub trajectories: Vec<Trajectory>,
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub mean: Vec<Vec<f64>>,
    /// Sample standard deviation over `√N`.
    pub std_error: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl TrajectoryEnsemble {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn mean_of(&self, name: &str) -> Option<&[f64]> {
        self.index(name).map(|i| self.mean[i].as_slice())
    }

    pub fn std_error_of(&self, name: &str) -> Option<&[f64]> {
        self.index(name).map(|i| self.std_error[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// Runs one trajectory per seed and aggregates them in ascending seed
/// order, so the result does not depend on the order of `seeds` or on
/// scheduling. The truncation monitor is applied to the ensemble mean.
pub fn ensemble_run(
    system: &OpenSystem,
    psi0: &QuantumState,
    grid: &TimeGrid,
    seeds: &[u64],
    opts: &SolverOptions,
    exec: Execution,
) -> Result<TrajectoryEnsemble> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "ensemble needs at least one seed"));
    }
    let psi = initial_ket(system, psi0)?;
    let plan = Plan::new(system, grid)?;
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    let trajectories = exec.try_map(&sorted, |&seed| {
        plan.run(&psi, seed).map_err(|e| Error::Trajectory {
            seed,
            source: Box::new(e),
        })
    })?;

    let n = trajectories.len() as f64;
    let first = &trajectories[0].series;
    let channels = first.values.len();
    let samples = first.times.len();
    let mut mean = vec![vec![0.0; samples]; channels];
    let mut std_error = vec![vec![0.0; samples]; channels];
    for c in 0..channels {
        for k in 0..samples {
            let m = trajectories.iter().map(|tr| tr.series.values[c][k]).sum::<f64>() / n;
            mean[c][k] = m;
            if trajectories.len() > 1 {
                let var = trajectories
                    .iter()
                    .map(|tr| (tr.series.values[c][k] - m).powi(2))
                    .sum::<f64>()
                    / (n - 1.0);
                std_error[c][k] = (var / n).sqrt();
            }
        }
    }

    let observer = Observer::new(system.layout());
    let mut diagnostics = Diagnostics::new(system.layout().modes());
    for k in 0..samples {
        let column: Vec<f64> = (0..channels).map(|c| mean[c][k]).collect();
        diagnostics.monitor(first.times[k], observer.tops(&column), opts)?;
    }

    Ok(TrajectoryEnsemble {
        seeds: sorted,
        times: first.times.clone(),
        names: first.names.clone(),
        trajectories,
        mean,
        std_error,
        diagnostics,
    })
}
