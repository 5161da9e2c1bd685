//! Closed-form rates for the random-parameter bosonic channels: thermal
//! entropy, the dirty-paper lower bound and its optimal coefficient,
//! homodyne/heterodyne capacities, the amplifier bound and the classical
//! Costa baseline. All rates are in bits.

use serde::Serialize;

use crate::error::{QrpsError, Result};
use crate::optim::golden_section_max;

/// Default golden-section bracket width for the coefficient searches.
pub const DEFAULT_T_TOL: f64 = 1e-6;

/// Pure-loss / thermal-loss channel parameters with additive interference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BosonicParams {
    pub n_a: f64,
    pub n_s: f64,
    pub n_e: f64,
    pub eta: f64,
}

fn check_photons(v: f64, name: &str) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(QrpsError::validation(format!(
            "{name} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

impl BosonicParams {
    pub fn new(n_a: f64, n_s: f64, n_e: f64, eta: f64) -> Result<Self> {
        check_photons(n_a, "N_A")?;
        check_photons(n_s, "N_S")?;
        check_photons(n_e, "N_E")?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(QrpsError::validation(format!(
                "transmissivity must lie in [0, 1], got {eta}"
            )));
        }
        Ok(Self { n_a, n_s, n_e, eta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmplifierParams {
    pub kappa: f64,
    pub n_a: f64,
    pub n_s: f64,
    pub n_e: f64,
}

impl AmplifierParams {
    pub fn new(kappa: f64, n_a: f64, n_s: f64, n_e: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 1.0 {
            return Err(QrpsError::validation(format!(
                "amplifier gain must exceed 1, got {kappa}"
            )));
        }
        check_photons(n_a, "N_A")?;
        check_photons(n_s, "N_S")?;
        check_photons(n_e, "N_E")?;
        Ok(Self {
            kappa,
            n_a,
            n_s,
            n_e,
        })
    }
}

/// Maximizer of a coefficient search on [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientOptimum {
    pub t_max: f64,
    pub rate: f64,
    /// The maximizer sits at t = 1; the true optimum may lie beyond.
    pub at_upper_boundary: bool,
}

/// g(N) = (N+1) log(N+1) − N log N, with g(0) = 0.
pub fn thermal_entropy(n: f64) -> Result<f64> {
    check_photons(n, "mean photon number")?;
    Ok(g(n))
}

fn g(n: f64) -> f64 {
    if n == 0.0 {
        0.0
    } else {
        (n + 1.0) * (n + 1.0).log2() - n * n.log2()
    }
}

/// Residual-noise photon number and log penalty shared by both bounds.
fn interference_terms(t: f64, n_a: f64, n_s: f64) -> Result<(f64, f64)> {
    if n_a == 0.0 {
        if n_s > 0.0 && t != 0.0 {
            return Err(QrpsError::Singular(format!(
                "N_A = 0 with N_S = {n_s} and t = {t}: log penalty undefined"
            )));
        }
        return Ok((0.0, 0.0));
    }
    let denom = n_a + t * t * n_s;
    let residual = (1.0 - t).powi(2) * n_a * n_s / denom;
    Ok((residual, (denom / n_a).log2()))
}

/// Dirty-paper rate for the auxiliary U = X + tS. Any real t is accepted.
pub fn dpc_rate(t: f64, p: &BosonicParams) -> Result<f64> {
    if !t.is_finite() {
        return Err(QrpsError::validation("coefficient t must be finite"));
    }
    let (residual, penalty) = interference_terms(t, p.n_a, p.n_s)?;
    let noise = (1.0 - p.eta) * p.n_e;
    Ok(g(p.eta * (p.n_a + p.n_s) + noise) - g(p.eta * residual + noise) - penalty)
}

/// Maximizes `f` over [0, 1]: golden-section interior search, then the
/// endpoints. Ties resolve to the leftmost candidate.
fn maximize_unit_interval(f: impl Fn(f64) -> f64, tol: f64) -> CoefficientOptimum {
    let (t_in, r_in) = golden_section_max(&f, 0.0, 1.0, tol);
    let mut best = (0.0, f(0.0));
    if r_in > best.1 {
        best = (t_in, r_in);
    }
    let r1 = f(1.0);
    if r1 > best.1 {
        best = (1.0, r1);
    }
    CoefficientOptimum {
        t_max: best.0,
        rate: best.1,
        at_upper_boundary: best.0 >= 1.0 - tol,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(QrpsError::Config(format!(
            "search tolerance must be in (0, 1), got {tol}"
        )));
    }
    Ok(())
}

/// Best dirty-paper coefficient t ∈ [0, 1].
pub fn optimize_dpc_coefficient(p: &BosonicParams, tol: f64) -> Result<CoefficientOptimum> {
    check_tol(tol)?;
    if p.n_a == 0.0 && p.n_s > 0.0 {
        // only t = 0 is defined
        return Ok(CoefficientOptimum {
            t_max: 0.0,
            rate: dpc_rate(0.0, p)?,
            at_upper_boundary: false,
        });
    }
    Ok(maximize_unit_interval(
        |t| dpc_rate(t, p).expect("defined for N_A > 0"),
        tol,
    ))
}

pub fn homodyne_capacity(p: &BosonicParams) -> f64 {
    0.5 * (1.0 + 4.0 * p.eta * p.n_a / (2.0 * (1.0 - p.eta) * p.n_e + 1.0)).log2()
}

pub fn heterodyne_capacity(p: &BosonicParams) -> f64 {
    (1.0 + p.eta * p.n_a / ((1.0 - p.eta) * p.n_e + 1.0)).log2()
}

/// The amplifier analogue of [`dpc_rate`] at a fixed coefficient.
pub fn amplifier_bracket(t: f64, a: &AmplifierParams) -> Result<f64> {
    let (residual, penalty) = interference_terms(t, a.n_a, a.n_s)?;
    let noise = (a.kappa - 1.0) * a.n_e;
    Ok(g(a.kappa * (a.n_a + a.n_s) + noise) - g(a.kappa * residual + noise) - penalty)
}

/// Dirty-paper lower bound for the thermal amplifier, maximized over t ∈ [0, 1].
pub fn amplifier_dpc_bound(a: &AmplifierParams) -> Result<CoefficientOptimum> {
    if a.n_a == 0.0 && a.n_s > 0.0 {
        return Ok(CoefficientOptimum {
            t_max: 0.0,
            rate: amplifier_bracket(0.0, a)?,
            at_upper_boundary: false,
        });
    }
    Ok(maximize_unit_interval(
        |t| amplifier_bracket(t, a).expect("defined for N_A > 0"),
        DEFAULT_T_TOL,
    ))
}

fn check_costa(power: f64, noise_var: f64) -> Result<()> {
    if !power.is_finite() || power < 0.0 {
        return Err(QrpsError::validation(format!(
            "power must be non-negative, got {power}"
        )));
    }
    if !noise_var.is_finite() || noise_var < 0.0 {
        return Err(QrpsError::validation(format!(
            "noise variance must be non-negative, got {noise_var}"
        )));
    }
    Ok(())
}

/// ½ log(1 + P/σ²) for the classical Gaussian dirty-paper channel.
pub fn costa_capacity(power: f64, noise_var: f64) -> Result<f64> {
    check_costa(power, noise_var)?;
    if noise_var == 0.0 {
        return Err(QrpsError::validation("noise variance must be positive"));
    }
    Ok(0.5 * (1.0 + power / noise_var).log2())
}

/// P/(P + σ²). At σ² = 0 the limit value 1 is returned when P > 0.
pub fn mmse_coefficient(power: f64, noise_var: f64) -> Result<f64> {
    check_costa(power, noise_var)?;
    if noise_var == 0.0 {
        if power > 0.0 {
            return Ok(1.0);
        }
        return Err(QrpsError::validation(
            "P = σ² = 0 leaves the coefficient undefined",
        ));
    }
    Ok(power / (power + noise_var))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_point() -> BosonicParams {
        BosonicParams::new(2.0, 2.0, 0.0, 0.5).unwrap()
    }

    #[test]
    fn thermal_entropy_closed_forms() {
        assert_eq!(thermal_entropy(0.0).unwrap(), 0.0);
        assert!((thermal_entropy(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((thermal_entropy(2.0).unwrap() - (3.0 * 3f64.log2() - 2.0)).abs() < 1e-14);
        assert!(thermal_entropy(-0.1).is_err());
    }

    #[test]
    fn endpoint_rates() {
        let p = paper_point();
        let three_log3 = 3.0 * 3f64.log2();
        assert!((dpc_rate(0.0, &p).unwrap() - (three_log3 - 4.0)).abs() < 1e-12);
        assert!((dpc_rate(1.0, &p).unwrap() - (three_log3 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_corner() {
        let p = BosonicParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        assert!(dpc_rate(0.0, &p).is_ok());
        assert!(matches!(dpc_rate(0.5, &p), Err(QrpsError::Singular(_))));
        let opt = optimize_dpc_coefficient(&p, DEFAULT_T_TOL).unwrap();
        assert_eq!(opt.t_max, 0.0);
    }

    #[test]
    fn flat_objective_reports_left_endpoint() {
        let p = BosonicParams::new(2.0, 0.0, 1.0, 0.7).unwrap();
        let opt = optimize_dpc_coefficient(&p, DEFAULT_T_TOL).unwrap();
        assert_eq!(opt.t_max, 0.0);
        assert_eq!(opt.rate, dpc_rate(0.0, &p).unwrap());
    }

    #[test]
    fn costa_guards() {
        assert!(costa_capacity(1.0, 0.0).is_err());
        assert_eq!(mmse_coefficient(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(mmse_coefficient(1.5, 1.5).unwrap(), 0.5);
        assert!((costa_capacity(3.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplifier_gain_checked() {
        assert!(AmplifierParams::new(1.0, 1.0, 1.0, 0.0).is_err());
    }
}
