use nalgebra::DMatrix;
use starkcool::dynamics::{
    derive_seeds, ensemble_run, evolve_master, mc_evolve, steady_state, steady_state_long_time, LongTimeOptions,
    OpenSystem, SolverOptions, TimeGrid, TruncationPolicy,
};
use starkcool::model::{dissipators, three_level_hamiltonian, ModelConfig, PhysicalParams, DOWN, UP};
use starkcool::operator::{linalg, transition, HilbertLayout, Operator, QuantumState};
use starkcool::{Error, Execution, C64};

const GAMMA: f64 = 0.5;

fn decay_system(cutoff: usize) -> OpenSystem {
    let layout = HilbertLayout::single_mode(2, cutoff).unwrap();
    let jump = transition(&layout, DOWN, UP).unwrap().scale(C64::new((2.0 * GAMMA).sqrt(), 0.0));
    OpenSystem::new(Operator::zeros(&layout), vec![jump]).unwrap()
}

fn cooling_system(cutoff: usize) -> OpenSystem {
    let layout = HilbertLayout::single_mode(3, cutoff).unwrap();
    let p = PhysicalParams::dynamics();
    let cfg = ModelConfig::default();
    let h = three_level_hamiltonian(&layout, &p, &cfg).unwrap();
    OpenSystem::new(h, dissipators(&layout, &p, &cfg).unwrap()).unwrap()
}

#[test]
fn master_decay_is_exponential() {
    let sys = decay_system(2);
    let rho0 = QuantumState::basis(sys.layout(), UP, &[0]).unwrap();
    let grid = TimeGrid::new(0.0, 5.0, 0.01, 10).unwrap();
    let series = evolve_master(&sys, &rho0, &grid, &SolverOptions::default()).unwrap();
    let up = series.channel("p_up").unwrap();
    for (t, p) in series.times.iter().zip(up) {
        assert!((p - (-2.0 * GAMMA * t).exp()).abs() < 1e-8, "t = {t}: {p}");
    }
}

#[test]
fn first_jump_times_are_exponential() {
    let sys = decay_system(2);
    let psi0 = QuantumState::basis(sys.layout(), UP, &[0]).unwrap();
    let grid = TimeGrid::new(0.0, 30.0, 0.01, 100).unwrap();
    let n = 400;
    let mut times: Vec<f64> = derive_seeds(11, n)
        .into_iter()
        .map(|s| mc_evolve(&sys, &psi0, &grid, s).unwrap().jumps[0].0)
        .collect();
    times.sort_by(f64::total_cmp);
    let d = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let cdf = 1.0 - (-2.0 * GAMMA * t).exp();
            (cdf - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - cdf).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.36 / (n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn ensemble_ignores_seed_order_and_scheduling() {
    let sys = cooling_system(6);
    let psi0 = QuantumState::basis(sys.layout(), 0, &[1]).unwrap();
    let grid = TimeGrid::new(0.0, 20.0, 0.1, 20).unwrap();
    let seeds = derive_seeds(5, 16);
    let mut reversed = seeds.clone();
    reversed.reverse();
    let opts = SolverOptions::default();
    let a = ensemble_run(&sys, &psi0, &grid, &seeds, &opts, Execution::Parallel).unwrap();
    let b = ensemble_run(&sys, &psi0, &grid, &reversed, &opts, Execution::Sequential).unwrap();
    assert_eq!(a.times, b.times);
    for (x, y) in a.mean.iter().zip(&b.mean) {
        let bits = |v: &Vec<f64>| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(x), bits(y));
    }
}

#[test]
fn steady_state_methods_agree() {
    let sys = cooling_system(4);
    let direct = steady_state(&sys).unwrap();
    assert!(direct.residual < 1e-10);
    let initial = QuantumState::basis(sys.layout(), 0, &[0]).unwrap();
    let opts = LongTimeOptions {
        window: 200.0,
        tol: 1e-10,
        max_windows: 200,
        dt: 0.1,
        solver: SolverOptions::default(),
    };
    let long = steady_state_long_time(&sys, &initial, &opts).unwrap();
    let diff = linalg::max_abs(&(direct.state.density_matrix() - long.state.density_matrix()));
    assert!(diff < 1e-7, "max entry difference {diff}");
}

#[test]
fn pure_decay_has_no_unique_steady_state() {
    let sys = decay_system(3);
    assert!(matches!(steady_state(&sys), Err(Error::DegenerateKernel { .. })));

    let layout = sys.layout().clone();
    let mut internal = nalgebra::DVector::zeros(2);
    internal[UP] = C64::new(1.0, 0.0);
    let initial = QuantumState::thermal(&layout, &internal, &[0.5]).unwrap();
    let phonons = initial.fock_distribution(0).unwrap();
    let opts = LongTimeOptions {
        window: 10.0,
        tol: 1e-10,
        max_windows: 50,
        dt: 0.01,
        solver: SolverOptions {
            truncation_policy: TruncationPolicy::Warn,
            ..SolverOptions::default()
        },
    };
    let long = steady_state_long_time(&sys, &initial, &opts).unwrap();
    let pops = long.state.populations();
    for (n, p) in phonons.iter().enumerate() {
        let down = pops[layout.index(DOWN, &[n]).unwrap()];
        assert!((down - p).abs() < 1e-9, "level {n}: {down} vs {p}");
    }
}

#[test]
fn closed_evolution_matches_propagator() {
    let layout = HilbertLayout::single_mode(3, 4).unwrap();
    let h = three_level_hamiltonian(&layout, &PhysicalParams::dynamics(), &ModelConfig::default()).unwrap();
    let sys = OpenSystem::closed(h.clone()).unwrap();
    let rho0 = QuantumState::basis(&layout, 0, &[1]).unwrap();
    let t = 7.0;
    let grid = TimeGrid::new(0.0, t, 0.005, 100).unwrap();
    let series = evolve_master(&sys, &rho0, &grid, &SolverOptions::default()).unwrap();
    let u = linalg::expm(&(h.matrix() * C64::new(0.0, -t)));
    let want: DMatrix<C64> = &u * rho0.density_matrix() * u.adjoint();
    let diff = linalg::max_abs(&(series.final_state.density_matrix() - want));
    assert!(diff < 1e-7, "max entry difference {diff}");
}

#[test]
fn truncation_monitor_policies() {
    let sys = cooling_system(3);
    let rho0 = QuantumState::basis(sys.layout(), 0, &[2]).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 0.05, 5).unwrap();
    let strict = SolverOptions::default();
    let err = evolve_master(&sys, &rho0, &grid, &strict).unwrap_err();
    assert!(matches!(err, Error::Truncation { mode: 0, .. }), "{err}");

    let lenient = SolverOptions {
        truncation_policy: TruncationPolicy::Warn,
        ..SolverOptions::default()
    };
    let series = evolve_master(&sys, &rho0, &grid, &lenient).unwrap();
    assert!(!series.diagnostics.truncation_warnings.is_empty());
    assert!(series.diagnostics.max_top_population[0] > 0.5);
}
