//! Closed-form Lamb-Dicke rate theory of the continuous scheme.
//!
//! To second order in η the phonon distribution obeys the birth-death
//! equation
//!
//! ```text
//! dP(n)/dt = η²( A₋[(n+1)P(n+1) − nP(n)] + A₊[nP(n−1) − (n+1)P(n)] )
//! ```
//!
//! with `A₊(ν) = A₋(−ν)`. Γ always means `Γ₁ + Γ₂`.

use crate::dynamics::TimeGrid;
use crate::model::PhysicalParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCoefficients {
    pub a_minus: f64,
    pub a_plus: f64,
    /// Signed cooling rate `η²(A₋ − A₊)`.
    pub w: f64,
    /// Steady-state `⟨n⟩`, `None` in the heating regime.
    pub n_ss: Option<f64>,
}

fn a_minus_at(p: &PhysicalParams, nu: f64) -> Result<f64> {
    let g = p.gamma();
    let (om, oc, delta) = (p.omega, p.omega_c, p.detuning);
    let x = nu - 2.0 * oc;
    let bracket = 2.0 * om * om + x * (delta - nu + oc);
    let den = g * g * x * x + bracket * bracket;
    let num = 2.0 * g * om * om * oc * oc;
    if den == 0.0 {
        if num == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::SingularDenominator);
    }
    Ok(num / den)
}

/// Phonon-loss rate density
/// `A₋ = 2ΓΩ²Ω_c² / [Γ²(ν−2Ω_c)² + (2Ω² + (ν−2Ω_c)(Δ−ν+Ω_c))²]`.
pub fn a_minus(p: &PhysicalParams) -> Result<f64> {
    a_minus_at(p, p.nu)
}

/// Phonon-gain rate density, `A₋` with `ν → −ν`.
pub fn a_plus(p: &PhysicalParams) -> Result<f64> {
    a_minus_at(p, -p.nu)
}

pub fn rate_coefficients(p: &PhysicalParams) -> Result<RateCoefficients> {
    let a_minus = a_minus(p)?;
    let a_plus = a_plus(p)?;
    Ok(RateCoefficients {
        a_minus,
        a_plus,
        w: p.eta * p.eta * (a_minus - a_plus),
        n_ss: (a_minus > a_plus).then(|| a_plus / (a_minus - a_plus)),
    })
}

/// `η²(A₋ − A₊)`; negative values mean heating.
pub fn cooling_rate(p: &PhysicalParams) -> Result<f64> {
    Ok(rate_coefficients(p)?.w)
}

/// Steady-state occupation in both closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinalOccupation {
    /// `A₊/(A₋ − A₊)`.
    pub ratio: f64,
    /// The expanded rational expression.
    pub explicit: f64,
}

/// Expanded steady-state occupation
/// `[Γ²(ν−2Ω_c)² + (2Ω²+(ν−2Ω_c)(Δ−ν+Ω_c))²]
///  / [4ν(2Ω_cΓ² + (Δ+3Ω_c)(ν² + 2(Ω_c(Δ+Ω_c) − Ω²)))]`.
pub fn n_final_explicit(p: &PhysicalParams) -> Result<f64> {
    let g = p.gamma();
    let (om, oc, delta, nu) = (p.omega, p.omega_c, p.detuning, p.nu);
    let x = nu - 2.0 * oc;
    let bracket = 2.0 * om * om + x * (delta - nu + oc);
    let num = g * g * x * x + bracket * bracket;
    let den = 4.0
        * nu
        * (2.0 * oc * g * g + (delta + 3.0 * oc) * (nu * nu + 2.0 * (oc * (delta + oc) - om * om)));
    if den == 0.0 {
        return Err(Error::SingularDenominator);
    }
    Ok(num / den)
}

/// Steady-state `⟨n⟩`; errors in the heating regime `A₋ ≤ A₊`.
pub fn n_final(p: &PhysicalParams) -> Result<FinalOccupation> {
    let c = rate_coefficients(p)?;
    let ratio = c.n_ss.ok_or(Error::HeatingRegime {
        a_minus: c.a_minus,
        a_plus: c.a_plus,
    })?;
    let explicit = n_final_explicit(p)?;
    debug_assert!(
        (ratio - explicit).abs() <= 1e-6 * ratio.abs().max(1e-300) || !ratio.is_normal(),
        "closed forms disagree: {ratio} vs {explicit}"
    );
    Ok(FinalOccupation { ratio, explicit })
}

/// Cooling rate at `Ω_c = ν/2`:
/// `W = (1/8)Γη²ν²Ω²(Ω⁻⁴ − 4[4Γ²ν² + (3ν² + 2Δν − 2Ω²)²]⁻¹)`.
pub fn w_at_resonance(p: &PhysicalParams) -> Result<f64> {
    let g = p.gamma();
    let (om, nu, delta, eta) = (p.omega, p.nu, p.detuning, p.eta);
    let om2 = om * om;
    if om2 == 0.0 {
        return Ok(0.0);
    }
    let b = 3.0 * nu * nu + 2.0 * delta * nu - 2.0 * om2;
    let den = 4.0 * g * g * nu * nu + b * b;
    if den == 0.0 {
        return Err(Error::SingularDenominator);
    }
    Ok(0.125 * g * eta * eta * nu * nu * om2 * (1.0 / (om2 * om2) - 4.0 / den))
}

/// Steady-state occupation at `Ω_c = ν/2`:
/// `Ω⁴ / (ν(νΓ² + (Δ+3ν/2)(ν² + 2(½(Δ+ν/2)ν − Ω²))))`.
pub fn n_at_resonance(p: &PhysicalParams) -> Result<f64> {
    let g = p.gamma();
    let (om, nu, delta) = (p.omega, p.nu, p.detuning);
    let om2 = om * om;
    let den = nu * (nu * g * g + (delta + 1.5 * nu) * (nu * nu + 2.0 * (0.5 * (delta + 0.5 * nu) * nu - om2)));
    if den == 0.0 {
        return Err(Error::SingularDenominator);
    }
    Ok(om2 * om2 / den)
}

/// The simplified rate `ηΩ_c/8` quoted for the optimal working point.
pub fn quoted_rate(p: &PhysicalParams) -> f64 {
    p.eta * p.omega_c / 8.0
}

/// Largest Ω² for which `Ω_c = ν/2` cools:
/// `ν(4Γ² + 4Δ² + 9ν² + 12Δν) / (4(2Δ + 3ν))`; `None` when every Ω cools
/// (`2Δ + 3ν ≤ 0`).
pub fn cooling_region_bound(p: &PhysicalParams) -> Option<f64> {
    let g = p.gamma();
    let (nu, delta) = (p.nu, p.detuning);
    let den = 4.0 * (2.0 * delta + 3.0 * nu);
    (den > 0.0).then(|| nu * (4.0 * g * g + 4.0 * delta * delta + 9.0 * nu * nu + 12.0 * delta * nu) / den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityReport {
    /// `(Γνη/Ω², ν²η/Ω², |Δ|νη/Ω²)`.
    pub ratios: (f64, f64, f64),
    /// All three ratios at most 1.
    pub in_lamb_dicke_validity: bool,
    /// Cooling-region inequality at `Ω_c = ν/2`.
    pub cooling_region: bool,
}

pub fn validity(p: &PhysicalParams) -> Result<ValidityReport> {
    let om2 = p.omega * p.omega;
    if om2 == 0.0 {
        return Err(Error::param("Omega", "validity ratios need Omega != 0"));
    }
    let s = p.nu * p.eta / om2;
    let ratios = (p.gamma() * s, p.nu * s, p.detuning.abs() * s);
    Ok(ValidityReport {
        ratios,
        in_lamb_dicke_validity: ratios.0 <= 1.0 && ratios.1 <= 1.0 && ratios.2 <= 1.0,
        cooling_region: cooling_region_bound(p).is_none_or(|b| om2 <= b),
    })
}

/// Resolved-sideband cooling limit `(α + 1/4)(Γ/ν)²`.
pub fn sideband_reference(gamma: f64, nu: f64, alpha: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::param("nu", "must be > 0"));
    }
    Ok((alpha + 0.25) * (gamma / nu).powi(2))
}

/// One point of a (Δ, Γ) scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub detuning: f64,
    pub gamma: f64,
    pub w: f64,
    pub n_ss: Option<f64>,
}

/// Rates over a (Δ, Γ) grid, Δ-major, all other parameters from `base`.
pub fn scan_detuning_gamma(base: &PhysicalParams, detunings: &[f64], gammas: &[f64]) -> Result<Vec<ScanPoint>> {
    let mut out = Vec::with_capacity(detunings.len() * gammas.len());
    for &detuning in detunings {
        for &gamma in gammas {
            let p = PhysicalParams {
                detuning,
                ..base.with_gamma(gamma)
            };
            let c = rate_coefficients(&p)?;
            out.push(ScanPoint {
                detuning,
                gamma,
                w: c.w,
                n_ss: c.n_ss,
            });
        }
    }
    Ok(out)
}

/// Default Fock truncation of the rate equation.
pub const RATE_EQ_N_MAX: usize = 60;
const BOUNDARY_GUARD: f64 = 1e-6;

/// Sampled solution of the rate equation.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub times: Vec<f64>,
    /// `distributions[k][n]` is `P(n)` at sample `k`.
    pub distributions: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Largest `|ΣP − 1|` over all samples.
    pub max_sum_error: f64,
    /// Smallest `P(n)` over all samples.
    pub min_probability: f64,
}

fn rate_rhs(p: &[f64], lose: f64, gain: f64, out: &mut [f64]) {
    let top = p.len() - 1;
    for n in 0..=top {
        let nf = n as f64;
        let mut d = -lose * nf * p[n];
        if n < top {
            d += lose * (nf + 1.0) * p[n + 1] - gain * (nf + 1.0) * p[n];
        }
        if n > 0 {
            d += gain * nf * p[n - 1];
        }
        out[n] = d;
    }
}

/// Integrates the rate equation from `p0` (support `0..p0.len()`), with a
/// reflecting boundary at the last level. Uses RK4 with enough substeps per
/// grid step to stay well inside the stability region.
pub fn rate_eq_evolve(p0: &[f64], params: &PhysicalParams, grid: &TimeGrid) -> Result<RateSeries> {
    if p0.len() < 2 {
        return Err(Error::param("P0", "need at least two levels"));
    }
    if p0.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::param("P0", "probabilities must be finite and >= 0"));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::param("P0", format!("must sum to 1, sums to {total}")));
    }
    let c = rate_coefficients(params)?;
    let eta2 = params.eta * params.eta;
    let (lose, gain) = (eta2 * c.a_minus, eta2 * c.a_plus);
    let top = p0.len() - 1;
    let fastest = (lose + gain) * (2.0 * top as f64 + 1.0);
    let h_grid = grid.step();
    let substeps = ((h_grid * fastest) / 0.5).ceil().max(1.0) as usize;
    let h = h_grid / substeps as f64;

    let n = p0.len();
    let mut p = p0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let samples = grid.sample_steps();
    let mut next = 0;
    let mut out = RateSeries {
        times: Vec::new(),
        distributions: Vec::new(),
        mean: Vec::new(),
        max_sum_error: 0.0,
        min_probability: f64::INFINITY,
    };
    for step in 0..=grid.n_steps() {
        if next < samples.len() && samples[next] == step {
            let t = grid.time_at(step);
            if p[top] > BOUNDARY_GUARD {
                return Err(Error::BoundaryOccupation { occupation: p[top] });
            }
            let sum: f64 = p.iter().sum();
            out.max_sum_error = out.max_sum_error.max((sum - 1.0).abs());
            out.min_probability = p.iter().copied().fold(out.min_probability, f64::min);
            out.times.push(t);
            out.mean.push(p.iter().enumerate().map(|(k, x)| k as f64 * x).sum());
            out.distributions.push(p.clone());
            next += 1;
        }
        if step == grid.n_steps() {
            break;
        }
        for _ in 0..substeps {
            rate_rhs(&p, lose, gain, &mut k1);
            for i in 0..n {
                tmp[i] = p[i] + 0.5 * h * k1[i];
            }
            rate_rhs(&tmp, lose, gain, &mut k2);
            for i in 0..n {
                tmp[i] = p[i] + 0.5 * h * k2[i];
            }
            rate_rhs(&tmp, lose, gain, &mut k3);
            for i in 0..n {
                tmp[i] = p[i] + h * k3[i];
            }
            rate_rhs(&tmp, lose, gain, &mut k4);
            for i in 0..n {
                p[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
        }
    }
    Ok(out)
}

/// Initial distribution `δ_{n,n0}` on `0..=n_max`.
pub fn fock_distribution(n0: usize, n_max: usize) -> Result<Vec<f64>> {
    if n0 > n_max {
        return Err(Error::IndexOutOfRange {
            what: "Fock level",
            index: n0,
            bound: n_max + 1,
        });
    }
    let mut p = vec![0.0; n_max + 1];
    p[n0] = 1.0;
    Ok(p)
}

/// Truncated, renormalized thermal distribution on `0..=n_max`.
pub fn thermal_distribution(mean: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::param("mean_n", "must be finite and >= 0"));
    }
    if mean == 0.0 {
        return fock_distribution(0, n_max);
    }
    let q = mean / (1.0 + mean);
    let w: Vec<f64> = (0..=n_max).map(|n| q.powi(n as i32)).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> PhysicalParams {
        PhysicalParams::parabola(0.05)
    }

    #[test]
    fn fig3_coefficients() {
        let c = rate_coefficients(&fig3()).unwrap();
        assert!((c.a_minus - 125.0).abs() < 1e-9);
        assert!((c.a_plus - 1.2229e-4).abs() < 1e-8);
        let n = n_final(&fig3()).unwrap();
        assert!((n.ratio - 9.783e-7).abs() < 1e-10);
        assert!((n.ratio - n.explicit).abs() <= 1e-10 * n.ratio);
    }

    #[test]
    fn zero_repump_no_rates() {
        let p = PhysicalParams {
            omega: 0.0,
            ..fig3()
        };
        let c = rate_coefficients(&p).unwrap();
        assert_eq!((c.a_minus, c.a_plus, c.w), (0.0, 0.0, 0.0));
        assert!(matches!(n_final(&p), Err(Error::HeatingRegime { .. })));
    }

    #[test]
    fn resonance_forms_agree() {
        let p = fig3();
        let n_res = n_at_resonance(&p).unwrap();
        let n = n_final(&p).unwrap().ratio;
        assert!((n_res - n).abs() <= 1e-10 * n);
        let w = w_at_resonance(&p).unwrap();
        let w_general = cooling_rate(&p).unwrap();
        assert!((w - w_general).abs() <= 1e-10 * w);
        assert!((w / (p.eta * p.eta * 125.0) - 1.0).abs() < 2e-6);
    }

    #[test]
    fn eta_doubling_quadruples_rate() {
        let p = fig3();
        let q = PhysicalParams {
            eta: 2.0 * p.eta,
            ..p
        };
        assert_eq!(cooling_rate(&q).unwrap(), 4.0 * cooling_rate(&p).unwrap());
    }

    #[test]
    fn validity_ratios() {
        let r = validity(&fig3()).unwrap();
        assert!((r.ratios.0 - 50.0).abs() < 1e-9);
        assert!((r.ratios.1 - 5.0).abs() < 1e-12);
        assert_eq!(r.ratios.2, 0.0);
        assert!(!r.in_lamb_dicke_validity);
        assert!(r.cooling_region);
        let tiny = PhysicalParams {
            eta: 1e-9,
            ..fig3()
        };
        assert!(validity(&tiny).unwrap().in_lamb_dicke_validity);
        let dark = PhysicalParams {
            omega: 0.0,
            ..fig3()
        };
        assert!(validity(&dark).is_err());
    }

    #[test]
    fn region_bound_value() {
        let b = cooling_region_bound(&fig3()).unwrap();
        assert!((b - 409.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn sideband_values() {
        assert!((sideband_reference(0.1, 1.0, 1.0).unwrap() - 0.0125).abs() < 1e-15);
        assert!((sideband_reference(3.0, 2.0, 0.0).unwrap() - 0.5625).abs() < 1e-15);
        assert!((sideband_reference(1.0 / 0.1, 1.0, 1.0).unwrap() - 125.0).abs() < 1e-9);
        assert!(sideband_reference(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn pure_loss_chain() {
        let p = fig3();
        // A₊ is tiny but not zero; compare the early-time decay of P(1)
        let grid = TimeGrid::new(0.0, 2.0, 0.01, 20).unwrap();
        let s = rate_eq_evolve(&fock_distribution(1, 10).unwrap(), &p, &grid).unwrap();
        let lose = p.eta * p.eta * a_minus(&p).unwrap();
        for (t, dist) in s.times.iter().zip(&s.distributions) {
            assert!((dist[0] - (1.0 - (-lose * t).exp())).abs() < 1e-5);
        }
        assert!(s.max_sum_error < 1e-12);
    }

    #[test]
    fn boundary_guard_trips() {
        let p = fig3();
        let grid = TimeGrid::new(0.0, 1.0, 0.1, 1).unwrap();
        let hot = thermal_distribution(20.0, 10).unwrap();
        assert!(matches!(
            rate_eq_evolve(&hot, &p, &grid),
            Err(Error::BoundaryOccupation { .. })
        ));
    }

    #[test]
    fn scan_shape() {
        let pts = scan_detuning_gamma(&fig3(), &[0.0, 1.0], &[1.0, 5.0, 10.0]).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[4].detuning, pts[4].gamma), (1.0, 5.0));
    }
}
