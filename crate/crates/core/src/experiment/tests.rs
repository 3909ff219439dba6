use super::*;

fn errors(text: &str) -> Vec<ConfigError> {
    validate_config(text).expect_err("config should be rejected")
}

fn fields(errs: &[ConfigError]) -> Vec<&str> {
    errs.iter().map(|e| e.field.as_str()).collect()
}

const CUSTOM: &str = "[scenario]\nname = custom\n[params]\nOmega = 0.1\nOmega_c = 0.5\nDelta = 0\nnu = 1\neta = 0.05\nGamma = 10\n";

#[test]
fn defaults_validate_for_every_scenario() {
    for kind in ScenarioKind::ALL {
        if kind == ScenarioKind::Custom {
            continue;
        }
        let cfg = validate_config(&format!("[scenario]\nname = {kind}\n")).unwrap();
        assert_eq!(cfg, ScenarioConfig::defaults(kind), "{kind}");
    }
}

#[test]
fn resolved_config_round_trips() {
    for kind in ScenarioKind::ALL {
        let cfg = if kind == ScenarioKind::Custom {
            validate_config(CUSTOM).unwrap()
        } else {
            ScenarioConfig::defaults(kind)
        };
        assert_eq!(validate_config(&cfg.to_ini()).unwrap(), cfg, "{kind}");
    }
}

#[test]
fn custom_missing_nu_names_the_field() {
    let text = CUSTOM.replace("nu = 1\n", "");
    assert_eq!(fields(&errors(&text)), vec!["params.nu"]);
}

#[test]
fn negative_decay_rate_is_rejected() {
    let errs = errors("[scenario]\nname = fig-parabola\n[params]\nGamma1 = -1\n");
    assert!(fields(&errs).contains(&"params.Gamma1"));
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let errs = errors("[scenario]\nname = fig-nothing\n");
    assert_eq!(errs.len(), 1);
    for kind in ScenarioKind::ALL {
        assert!(errs[0].message.contains(kind.name()));
    }
}

#[test]
fn every_violation_is_reported() {
    let text = "[scenario]\nname = fig-parabola\nbogus = 1\n[params]\nnu = -1\neta = x\n[sweep]\npoints = 1\n[solver]\nn_traj = 0\n[extra]\na = 1\n";
    let errs = errors(text);
    let f = fields(&errs);
    for want in ["scenario.bogus", "params.nu", "params.eta", "sweep.points", "solver.n_traj", "extra"] {
        assert!(f.contains(&want), "{want} missing from {f:?}");
    }
}

#[test]
fn gamma_conflicts_with_split_rates() {
    let errs = errors("[scenario]\nname = fig-parabola\n[params]\nGamma = 4\nGamma1 = 1\n");
    assert_eq!(fields(&errs), vec!["params.Gamma"]);
}

#[test]
fn duplicate_keys_are_rejected() {
    let errs = errors("[scenario]\nname = fig-parabola\n[params]\nOmega = 0.1\nOmega = 0.2\n");
    assert_eq!(fields(&errs), vec!["params.Omega"]);
}

#[test]
fn chain_needs_three_cutoffs() {
    let errs = errors("[scenario]\nname = fig-chain\n[solver]\ncutoffs = 6\n");
    assert_eq!(fields(&errs), vec!["solver.cutoffs"]);
}

#[test]
fn sweep_on_non_sweep_scenario_is_rejected() {
    let errs = errors("[scenario]\nname = fig-dynamics\n[sweep]\naxis = Omega\nstart = 0.5\nstop = 1\npoints = 3\n");
    assert_eq!(fields(&errs), vec!["sweep"]);
}

#[test]
fn partial_sweep_inherits_defaults() {
    let cfg = validate_config("[scenario]\nname = fig-parabola\n[sweep]\npoints = 5\n").unwrap();
    let s = cfg.sweep.unwrap();
    assert_eq!((s.axis, s.start, s.stop, s.points), (SweepAxis::OmegaC, 0.35, 0.65, 5));
}

#[test]
fn sweep_values_hit_endpoints() {
    let s = Sweep {
        axis: SweepAxis::OmegaC,
        start: 0.35,
        stop: 0.65,
        points: 25,
    };
    let v = s.values();
    assert_eq!(v.len(), 25);
    assert_eq!(v[0], 0.35);
    assert_eq!(v[24], 0.65);
    assert!((v[12] - 0.5).abs() < 1e-15);
}

#[test]
fn initial_state_grammar() {
    assert_eq!("fock:3".parse::<InitialState>().unwrap(), InitialState::Fock(3));
    assert_eq!("thermal:1.5".parse::<InitialState>().unwrap(), InitialState::Thermal(1.5));
    assert!("thermal:-1".parse::<InitialState>().is_err());
    assert!("coherent:1".parse::<InitialState>().is_err());
}

#[test]
fn custom_with_zero_drive_has_zero_rates() {
    let cfg = validate_config(&CUSTOM.replace("Omega = 0.1", "Omega = 0")).unwrap();
    let table = run_scenario(&cfg, crate::Execution::Sequential).unwrap();
    for obs in ["A_minus", "A_plus", "W"] {
        let rows = table.series(obs, Provenance::Analytic);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].value, 0.0);
    }
}

#[test]
fn custom_table_is_deterministic_and_reproducible() {
    let cfg = validate_config(&format!("{CUSTOM}[solver]\nnumeric = true\n")).unwrap();
    let a = run_scenario(&cfg, crate::Execution::Sequential).unwrap().to_csv_string();
    let b = run_scenario(&cfg, crate::Execution::Parallel).unwrap().to_csv_string();
    assert_eq!(a, b);
    let again = validate_config(&config_from_csv(&a).unwrap()).unwrap();
    assert_eq!(again, cfg);
}
