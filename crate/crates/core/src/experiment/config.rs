//! Scenario config grammar.
//!
//! ```text
//! [scenario]
//! name = fig-parabola          ; required
//! eta_values = 0.05, 0.1       ; scenarios that compare several η
//! initial = fock:1             ; fock:<n> or thermal:<mean>
//! targets = 2, 1, 1            ; pulsed: target Fock level per cycle
//! gate = effective             ; pulsed: effective | exact
//! addressed_ion = 0            ; fig-chain
//!
//! [params]                     ; PhysicalParams overrides
//! Omega = 0.1
//! Gamma = 10                   ; symmetric split, or Gamma1/Gamma2
//!
//! [sweep]
//! axis = Omega_c
//! start = 0.35
//! stop = 0.65
//! points = 25
//!
//! [solver]
//! cutoffs = 7, 6, 5
//! dt = 0.05
//! t_end = 300
//! samples = 61
//! n_traj = 500
//! master_seed = 1
//! truncation_threshold = 1e-4
//! truncation = error           ; error | warn
//! numeric = true               ; custom: add numeric steady states
//!
//! [output]
//! path = fig3.csv
//! ```
//!
//! Keys are case-sensitive (`Delta` and `delta` are different parameters).
//! Lines starting with `#` or `;` are comments.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use ini::Ini;

use super::{InitialState, ScenarioConfig, ScenarioKind, Sweep, SweepAxis};
use crate::dynamics::TruncationPolicy;
use crate::model::PhysicalParams;
use crate::protocol::GateModel;

/// One violation found while validating a config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// `section.key`, or the section name for section-level problems.
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

const SECTIONS: [&str; 5] = ["scenario", "params", "sweep", "solver", "output"];
const PARAM_KEYS: [&str; 9] = [
    "Omega", "Omega_c", "Delta", "delta", "Gamma1", "Gamma2", "Gamma", "nu", "eta",
];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "scenario" => &["name", "eta_values", "initial", "targets", "gate", "addressed_ion"],
        "params" => &PARAM_KEYS,
        "sweep" => &["axis", "start", "stop", "points"],
        "solver" => &[
            "cutoffs",
            "dt",
            "t_end",
            "samples",
            "n_traj",
            "master_seed",
            "truncation_threshold",
            "truncation",
            "numeric",
        ],
        "output" => &["path"],
        _ => &[],
    }
}

/// Collected key/value pairs with error accumulation.
struct Reader<'a> {
    ini: &'a Ini,
    errors: Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let values: Vec<&str> = self
            .ini
            .section_all(Some(section))
            .flat_map(|p| p.get_all(key))
            .collect();
        if values.len() > 1 {
            self.errors
                .push(ConfigError::new(format!("{section}.{key}"), "given more than once"));
        }
        values.last().copied()
    }

    fn parse<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<T> {
        let raw = self.raw(section, key)?;
        match raw.trim().parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(ConfigError::new(
                    format!("{section}.{key}"),
                    format!("expected {what}, got `{raw}`"),
                ));
                None
            }
        }
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let v: f64 = self.parse(section, key, "a number")?;
        if !v.is_finite() {
            self.errors
                .push(ConfigError::new(format!("{section}.{key}"), "must be finite"));
            return None;
        }
        Some(v)
    }

    fn list<T: std::str::FromStr>(&mut self, section: &str, key: &str, what: &str) -> Option<Vec<T>> {
        let raw = self.raw(section, key)?;
        let mut out = Vec::new();
        for item in raw.split(',') {
            match item.trim().parse() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.errors.push(ConfigError::new(
                        format!("{section}.{key}"),
                        format!("expected a comma-separated list of {what}, got `{raw}`"),
                    ));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::new(field, message));
    }
}

fn set_param(p: &mut PhysicalParams, key: &str, v: f64) {
    match key {
        "Omega" => p.omega = v,
        "Omega_c" => p.omega_c = v,
        "Delta" => p.detuning = v,
        "delta" => p.carrier_detuning = v,
        "Gamma1" => p.gamma1 = v,
        "Gamma2" => p.gamma2 = v,
        "Gamma" => *p = p.with_gamma(v),
        "nu" => p.nu = v,
        "eta" => p.eta = v,
        _ => unreachable!("unknown parameter {key}"),
    }
}

fn check_params(p: &PhysicalParams, errors: &mut Vec<ConfigError>) {
    if p.nu <= 0.0 {
        errors.push(ConfigError::new("params.nu", "must be > 0"));
    }
    if p.eta < 0.0 {
        errors.push(ConfigError::new("params.eta", "must be >= 0"));
    }
    if p.gamma1 < 0.0 {
        errors.push(ConfigError::new("params.Gamma1", "decay rate must be >= 0"));
    }
    if p.gamma2 < 0.0 {
        errors.push(ConfigError::new("params.Gamma2", "decay rate must be >= 0"));
    }
}

/// Parses and fully validates a config, reporting every violation.
pub fn validate_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigError>> {
    let ini = Ini::load_from_str(text).map_err(|e| vec![ConfigError::new("syntax", e.to_string())])?;
    let mut r = Reader {
        ini: &ini,
        errors: Vec::new(),
    };

    for (section, props) in ini.iter() {
        let Some(section) = section else {
            for (k, _) in props.iter() {
                r.error(k, "key outside of any section");
            }
            continue;
        };
        if !SECTIONS.contains(&section) {
            r.error(section, format!("unknown section; valid sections: {}", SECTIONS.join(", ")));
            continue;
        }
        let allowed = allowed_keys(section);
        for (k, _) in props.iter() {
            if !allowed.contains(&k) {
                r.error(
                    &format!("{section}.{k}"),
                    format!("unknown key; valid keys: {}", allowed.join(", ")),
                );
            }
        }
    }

    let kind = match r.raw("scenario", "name") {
        None => {
            r.error("scenario.name", "missing required field");
            None
        }
        Some(name) => match name.trim().parse::<ScenarioKind>() {
            Ok(k) => Some(k),
            Err(_) => {
                let valid: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
                r.error(
                    "scenario.name",
                    format!("unknown scenario `{name}`; valid names: {}", valid.join(", ")),
                );
                None
            }
        },
    };
    let mut cfg = ScenarioConfig::defaults(kind.unwrap_or(ScenarioKind::Custom));

    // parameters
    let mut given = BTreeSet::new();
    let mut gamma = None;
    for key in PARAM_KEYS {
        if let Some(v) = r.float("params", key) {
            given.insert(key);
            if key == "Gamma" {
                gamma = Some(v);
            } else {
                set_param(&mut cfg.params, key, v);
            }
        }
    }
    if let Some(g) = gamma {
        if given.contains("Gamma1") || given.contains("Gamma2") {
            r.error("params.Gamma", "give either Gamma or Gamma1/Gamma2, not both");
        } else {
            set_param(&mut cfg.params, "Gamma", g);
        }
    }
    if kind == Some(ScenarioKind::Custom) {
        let has_gamma = given.contains("Gamma") || (given.contains("Gamma1") && given.contains("Gamma2"));
        for key in ["Omega", "Omega_c", "Delta", "nu", "eta"] {
            if !given.contains(key) {
                r.error(&format!("params.{key}"), "missing required field for the custom scenario");
            }
        }
        if !has_gamma {
            r.error("params.Gamma", "missing required field for the custom scenario (or Gamma1 and Gamma2)");
        }
    }
    check_params(&cfg.params, &mut r.errors);

    // scenario section
    if let Some(etas) = r.list::<f64>("scenario", "eta_values", "numbers") {
        if etas.is_empty() || etas.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            r.error("scenario.eta_values", "values must be finite and >= 0");
        } else {
            cfg.eta_values = etas;
        }
    }
    if let Some(raw) = r.raw("scenario", "initial") {
        match raw.trim().parse::<InitialState>() {
            Ok(s) => cfg.initial = s,
            Err(msg) => r.error("scenario.initial", msg),
        }
    }
    if let Some(targets) = r.list::<usize>("scenario", "targets", "integers") {
        if targets.is_empty() || targets.contains(&0) {
            r.error("scenario.targets", "targets must be >= 1");
        } else {
            cfg.targets = targets;
        }
    }
    if let Some(raw) = r.raw("scenario", "gate") {
        match raw.trim() {
            "effective" => cfg.gate = GateModel::Effective,
            "exact" => cfg.gate = GateModel::ExactTwoLevel,
            other => r.error("scenario.gate", format!("expected `effective` or `exact`, got `{other}`")),
        }
    }
    if let Some(ion) = r.parse::<usize>("scenario", "addressed_ion", "a non-negative integer") {
        cfg.addressed_ion = ion;
    }

    // sweep
    let axis = r.raw("sweep", "axis");
    let start = r.float("sweep", "start");
    let stop = r.float("sweep", "stop");
    let points = r.parse::<usize>("sweep", "points", "a positive integer");
    if axis.is_some() || start.is_some() || stop.is_some() || points.is_some() {
        let axis = match axis.map(|a| a.trim().parse::<SweepAxis>()) {
            Some(Ok(a)) => Some(a),
            Some(Err(msg)) => {
                r.error("sweep.axis", msg);
                None
            }
            None => cfg.sweep.map(|s| s.axis).or_else(|| {
                r.error("sweep.axis", "missing required field");
                None
            }),
        };
        let base = cfg.sweep;
        let start = start.or(base.map(|s| s.start));
        let stop = stop.or(base.map(|s| s.stop));
        let points = points.or(base.map(|s| s.points));
        if start.is_none() {
            r.error("sweep.start", "missing required field");
        }
        if stop.is_none() {
            r.error("sweep.stop", "missing required field");
        }
        if points.is_none() {
            r.error("sweep.points", "missing required field");
        }
        if let Some(n) = points {
            if n < 2 {
                r.error("sweep.points", "a sweep needs at least 2 points");
            }
        }
        if let (Some(axis), Some(start), Some(stop), Some(points)) = (axis, start, stop, points) {
            cfg.sweep = Some(Sweep {
                axis,
                start,
                stop,
                points,
            });
        }
    }

    // solver
    let mut s = cfg.solver.clone();
    if let Some(c) = r.list::<usize>("solver", "cutoffs", "integers") {
        if c.is_empty() || c.iter().any(|&x| x < 2) {
            r.error("solver.cutoffs", "every cutoff must be >= 2");
        } else {
            s.cutoffs = c;
        }
    }
    if let Some(dt) = r.float("solver", "dt") {
        if dt <= 0.0 {
            r.error("solver.dt", "must be > 0");
        } else {
            s.dt = Some(dt);
        }
    }
    if let Some(t) = r.float("solver", "t_end") {
        if t <= 0.0 {
            r.error("solver.t_end", "must be > 0");
        } else {
            s.t_end = Some(t);
        }
    }
    if let Some(n) = r.parse::<usize>("solver", "samples", "a positive integer") {
        if n < 2 {
            r.error("solver.samples", "must be >= 2");
        } else {
            s.samples = n;
        }
    }
    if let Some(n) = r.parse::<usize>("solver", "n_traj", "a positive integer") {
        if n == 0 {
            r.error("solver.n_traj", "must be >= 1");
        } else {
            s.n_traj = n;
        }
    }
    if let Some(seed) = r.parse::<u64>("solver", "master_seed", "an unsigned integer") {
        s.master_seed = seed;
    }
    if let Some(th) = r.float("solver", "truncation_threshold") {
        if !(th > 0.0 && th < 1.0) {
            r.error("solver.truncation_threshold", "must lie in (0, 1)");
        } else {
            s.truncation_threshold = th;
        }
    }
    if let Some(raw) = r.raw("solver", "truncation") {
        match raw.trim() {
            "error" => s.truncation = TruncationPolicy::Error,
            "warn" => s.truncation = TruncationPolicy::Warn,
            other => r.error("solver.truncation", format!("expected `error` or `warn`, got `{other}`")),
        }
    }
    if let Some(b) = r.parse::<bool>("solver", "numeric", "true or false") {
        s.numeric = b;
    }
    cfg.solver = s;

    if let Some(path) = r.raw("output", "path") {
        if path.trim().is_empty() {
            r.error("output.path", "must not be empty");
        } else {
            cfg.output = Some(PathBuf::from(path.trim()));
        }
    }

    if let Some(kind) = kind {
        cfg.kind = kind;
        for (field, msg) in cfg.semantic_errors() {
            r.error(&field, msg);
        }
    }

    if r.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(r.errors)
    }
}
