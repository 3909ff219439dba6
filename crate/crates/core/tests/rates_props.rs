use proptest::prelude::*;
use starkcool::dynamics::TimeGrid;
use starkcool::model::PhysicalParams;
use starkcool::rates::{
    a_minus, a_plus, cooling_rate, cooling_region_bound, n_at_resonance, n_final, rate_coefficients,
    rate_eq_evolve, thermal_distribution, w_at_resonance,
};

fn params() -> impl Strategy<Value = PhysicalParams> {
    (0.01..2.0f64, 0.05..1.5f64, -3.0..3.0f64, 0.05..10.0f64, 0.05..10.0f64, 0.5..2.0f64, 0.0..0.2f64).prop_map(
        |(omega, omega_c, detuning, gamma1, gamma2, nu, eta)| PhysicalParams {
            omega,
            omega_c,
            detuning,
            carrier_detuning: 0.0,
            gamma1,
            gamma2,
            nu,
            eta,
        },
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn heating_density_is_loss_density_at_negative_trap_frequency(p in params()) {
        let flipped = PhysicalParams { nu: -p.nu, ..p };
        prop_assert_eq!(a_plus(&p).unwrap(), a_minus(&flipped).unwrap());
        prop_assert_eq!(a_minus(&p).unwrap(), a_plus(&flipped).unwrap());
    }

    #[test]
    fn closed_forms_of_final_occupation_agree(p in params()) {
        if let Ok(occ) = n_final(&p) {
            prop_assert!(rel(occ.ratio, occ.explicit) < 1e-9, "{} vs {}", occ.ratio, occ.explicit);
        } else {
            prop_assert!(a_minus(&p).unwrap() <= a_plus(&p).unwrap());
        }
    }

    #[test]
    fn resonance_forms_match_general_ones(p in params()) {
        let q = PhysicalParams { omega_c: p.nu / 2.0, ..p };
        let w = cooling_rate(&q).unwrap();
        prop_assert!((w_at_resonance(&q).unwrap() - w).abs() <= 1e-9 * w.abs().max(1e-12));
        if let Some(n) = rate_coefficients(&q).unwrap().n_ss {
            prop_assert!(rel(n_at_resonance(&q).unwrap(), n) < 1e-9);
        }
    }

    #[test]
    fn cooling_region_matches_sign_of_rate(p in params()) {
        let q = PhysicalParams { omega_c: p.nu / 2.0, eta: 0.1, ..p };
        let w = cooling_rate(&q).unwrap();
        let inside = cooling_region_bound(&q).is_none_or(|b| q.omega * q.omega < b);
        if w.abs() > 1e-12 {
            prop_assert_eq!(inside, w > 0.0);
        }
    }

    #[test]
    fn rate_equation_conserves_probability(p in params(), mean in 0.0..3.0f64) {
        let p = PhysicalParams { eta: 0.05, ..p };
        let p0 = thermal_distribution(mean, 60).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 0.1, 20).unwrap();
        if let Ok(series) = rate_eq_evolve(&p0, &p, &grid) {
            prop_assert!(series.max_sum_error <= 1e-10);
            prop_assert!(series.min_probability >= -1e-12);
        }
    }
}

#[test]
fn stationary_distribution_is_geometric() {
    let p = PhysicalParams::optimal_point(0.1, 1.0);
    let c = rate_coefficients(&p).unwrap();
    let q = c.a_plus / c.a_minus;
    let grid = TimeGrid::new(0.0, 4000.0, 0.5, 1000).unwrap();
    let p0 = thermal_distribution(1.0, 40).unwrap();
    let series = rate_eq_evolve(&p0, &p, &grid).unwrap();
    let last = series.distributions.last().unwrap();
    for (n, &pn) in last.iter().enumerate().take(6) {
        let want = (1.0 - q) * q.powi(n as i32);
        assert!((pn - want).abs() < 1e-9, "P({n}) = {pn}, geometric {want}");
    }
}

#[test]
fn mean_relaxes_exponentially_at_rate_w() {
    // d<n>/dt = -W<n> + eta^2 A+ exactly, so <n> - n_ss decays as e^{-Wt}
    let p = PhysicalParams::parabola(0.1);
    let c = rate_coefficients(&p).unwrap();
    let n_ss = c.n_ss.unwrap();
    let grid = TimeGrid::new(0.0, 10.0, 0.01, 100).unwrap();
    let p0 = thermal_distribution(1.0, 60).unwrap();
    let series = rate_eq_evolve(&p0, &p, &grid).unwrap();
    let n0 = series.mean[0];
    for (t, n) in series.times.iter().zip(&series.mean) {
        let want = n_ss + (n0 - n_ss) * (-c.w * t).exp();
        assert!((n - want).abs() < 1e-8, "t = {t}: {n} vs {want}");
    }
}
