use nalgebra::DMatrix;
use proptest::prelude::*;
use starkcool::model::{
    stark_shift_hamiltonian, three_level_hamiltonian, two_level_lab_hamiltonian, CouplingOrder, ModelConfig,
    PhysicalParams,
};
use starkcool::operator::{
    annihilation, creation, displacement_factor, displacement_matrix, linalg, HilbertLayout, QuantumState,
};
use starkcool::C64;

fn params() -> impl Strategy<Value = PhysicalParams> {
    (
        0.0..3.0f64,
        0.0..2.0f64,
        -3.0..3.0f64,
        -1.0..1.0f64,
        0.0..10.0f64,
        0.0..10.0f64,
        0.2..3.0f64,
        0.0..0.25f64,
    )
        .prop_map(|(omega, omega_c, detuning, carrier_detuning, gamma1, gamma2, nu, eta)| PhysicalParams {
            omega,
            omega_c,
            detuning,
            carrier_detuning,
            gamma1,
            gamma2,
            nu,
            eta,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuous_hamiltonian_is_hermitian(p in params(), cutoff in 2usize..8, first in any::<bool>()) {
        let layout = HilbertLayout::single_mode(3, cutoff).unwrap();
        let config = ModelConfig {
            coupling_order: if first { CouplingOrder::FirstOrder } else { CouplingOrder::ExactExponential },
            ..ModelConfig::default()
        };
        let h = three_level_hamiltonian(&layout, &p, &config).unwrap();
        prop_assert!(h.hermiticity_error() < 1e-12);
    }

    #[test]
    fn two_level_hamiltonians_are_hermitian(p in params(), t in 0.0..100.0f64, cutoff in 2usize..8) {
        let layout = HilbertLayout::single_mode(2, cutoff).unwrap();
        prop_assert!(two_level_lab_hamiltonian(&layout, &p, t).unwrap().hermiticity_error() < 1e-12);
        prop_assert!(stark_shift_hamiltonian(&layout, &p).unwrap().hermiticity_error() < 1e-12);
    }

    #[test]
    fn displacement_pair_composes_to_identity(r in 0.0..0.6f64, phase in 0.0..6.3f64) {
        let cutoff = 30;
        let z = C64::from_polar(r, phase);
        let prod = displacement_matrix(cutoff, z) * displacement_matrix(cutoff, -z);
        for i in 0..cutoff - 14 {
            for j in 0..cutoff - 14 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod[(i, j)] - C64::new(want, 0.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn displacement_is_interior_unitary(r in 0.0..0.6f64, phase in 0.0..6.3f64) {
        let layout = HilbertLayout::new(3, vec![30]).unwrap();
        let d = displacement_factor(&layout, 0, C64::from_polar(r, phase)).unwrap();
        prop_assert!(d.interior_unitarity_error(14) < 1e-9);
    }

    #[test]
    fn density_states_are_physical(mean in 0.0..2.0f64, cutoff in 4usize..12) {
        let layout = HilbertLayout::single_mode(2, cutoff).unwrap();
        let mut internal = nalgebra::DVector::<C64>::zeros(2);
        internal[0] = C64::new(1.0, 0.0);
        let rho = QuantumState::thermal(&layout, &internal, &[mean]).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
    }
}

#[test]
fn canonical_commutator_except_top_level() {
    let layout = HilbertLayout::new(2, vec![5, 4]).unwrap();
    for mode in 0..2 {
        let a = annihilation(&layout, mode).unwrap();
        let ad = creation(&layout, mode).unwrap();
        let comm = a.commutator(&ad).unwrap();
        let top = layout.mode_cutoffs()[mode] - 1;
        for i in 0..layout.dim() {
            let (_, fock) = layout.decompose(i);
            let want = if fock[mode] == top { -(top as f64) } else { 1.0 };
            assert!((comm.matrix()[(i, i)] - C64::new(want, 0.0)).norm() < 1e-12);
        }
        let off = comm.matrix() - DMatrix::from_diagonal(&comm.matrix().diagonal());
        assert!(linalg::max_abs(&off) < 1e-12);
    }
}

#[test]
fn expm_matches_diagonalization() {
    let layout = HilbertLayout::single_mode(3, 4).unwrap();
    let h = three_level_hamiltonian(&layout, &PhysicalParams::dynamics(), &ModelConfig::default()).unwrap();
    let t = 0.7;
    let by_expm = linalg::expm(&(h.matrix() * C64::new(0.0, -t)));
    let by_eigen = linalg::hermitian_function(h.matrix(), |e| C64::from_polar(1.0, -e * t));
    assert!(linalg::max_abs(&(by_expm - by_eigen)) < 1e-11);
}
