//! Quasi-critical excitation classes and everything attached to a class:
//! the shift function and its Fermi-boundary values, the form-factor scaling
//! exponent, the critical decay exponents, and the asymptotic phases.
//!
//! A class is labeled by (tau, n0, ell): n0 separated particles (tau = +1,
//! space-like) or holes (tau = -1, time-like) localized at a common rapidity
//! lambda0, plus ell net particle-hole transfers across the Fermi zone.

use crate::error::{Error, Result};
use crate::quad::SampledFunction;
use crate::thermo::ThermoState;
use serde::{Deserialize, Serialize};

/// Which two-point function the class contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correlator {
    /// < Psi(x,t) Psi^dag(0,0) >: intermediate states with one extra particle.
    FieldPsiPsidag,
    /// < Psi^dag(x,t) Psi(0,0) >: one particle removed.
    FieldPsidagPsi,
    /// < j(x,t) j(0,0) >: particle number conserved.
    Density,
}

impl Correlator {
    pub fn delta_n(self) -> i32 {
        match self {
            Correlator::FieldPsiPsidag => 1,
            Correlator::FieldPsidagPsi => -1,
            Correlator::Density => 0,
        }
    }
}

/// Class descriptor. `alpha` is the twist of the density generating
/// function; it must be 0 for the field correlators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationClass {
    /// +1 space-like, -1 time-like.
    pub tau: i32,
    /// Number of separated excitations (all at lambda0).
    pub n0: u32,
    /// Right particle/hole discrepancy.
    pub ell: i64,
    /// N' - N.
    pub delta_n: i32,
    /// Twist.
    pub alpha: f64,
    /// Common separated rapidity.
    pub lambda0: f64,
}

impl ExcitationClass {
    pub fn new(tau: i32, n0: u32, ell: i64, delta_n: i32, alpha: f64, lambda0: f64) -> Result<Self> {
        if tau != 1 && tau != -1 {
            return Err(Error::Argument(format!("tau must be +1 or -1, got {tau}")));
        }
        if !(-1..=1).contains(&delta_n) {
            return Err(Error::Argument(format!(
                "delta_n must be in {{-1, 0, +1}}, got {delta_n}"
            )));
        }
        if alpha != 0.0 && delta_n != 0 {
            return Err(Error::Argument(
                "twist alpha is only defined for the number-conserving (density) case".into(),
            ));
        }
        if !lambda0.is_finite() || !alpha.is_finite() {
            return Err(Error::Argument("lambda0 and alpha must be finite".into()));
        }
        Ok(ExcitationClass {
            tau,
            n0,
            ell,
            delta_n,
            alpha,
            lambda0,
        })
    }

    /// Separated particles live outside the Fermi zone in the space-like
    /// regime and separated holes live inside it in the time-like regime.
    /// Irrelevant (and unchecked) when n0 = 0.
    pub fn validate_regime(&self, state: &ThermoState) -> Result<()> {
        if self.n0 == 0 {
            return Ok(());
        }
        let inside = self.lambda0.abs() < state.q;
        if self.tau == 1 && inside {
            return Err(Error::Argument(format!(
                "space-like class needs |lambda0| > q, got lambda0 = {} with q = {}",
                self.lambda0, state.q
            )));
        }
        if self.tau == -1 && !inside {
            return Err(Error::Argument(format!(
                "time-like class needs |lambda0| < q, got lambda0 = {} with q = {}",
                self.lambda0, state.q
            )));
        }
        Ok(())
    }
}

/// Shift function of a class together with its boundary values and the
/// saddle-rapidity phase combinations.
#[derive(Debug, Clone)]
pub struct ShiftData {
    /// F+ = F(q) + Delta N.
    pub fplus: f64,
    /// F- = F(-q).
    pub fminus: f64,
    /// F(lambda) sampled on the Fermi zone.
    pub ffun: SampledFunction,
    /// Phi+ = phi(q, -q) - phi(q, lambda0).
    pub phi_plus: f64,
    /// Phi- = 1 + phi(-q, -q) - phi(-q, lambda0).
    pub phi_minus: f64,
}

impl ShiftData {
    /// F+ + ell, the exponent at the right Fermi edge.
    pub fn a_exponent(&self, cls: &ExcitationClass) -> f64 {
        self.fplus + cls.ell as f64
    }

    /// F- + ell + tau n0, the exponent at the left Fermi edge.
    pub fn b_exponent(&self, cls: &ExcitationClass) -> f64 {
        self.fminus + cls.ell as f64 + (cls.tau * cls.n0 as i32) as f64
    }
}

/// Shift function of a class evaluated at one rapidity:
/// F = -DeltaN [Z/2 + phi(., q)] + alpha Z - ell phi(., q)
///     + (ell + tau n0) phi(., -q) - tau n0 phi(., lambda0).
fn shift_at(state: &ThermoState, cls: &ExcitationClass, lambda: f64) -> Result<f64> {
    let q = state.q;
    let z = state.z_at(lambda);
    let dn = cls.delta_n as f64;
    let ell = cls.ell as f64;
    let tn0 = (cls.tau * cls.n0 as i32) as f64;
    let mut f = -dn * (z / 2.0 + state.phi(lambda, q)?) + cls.alpha * z;
    f += -ell * state.phi(lambda, q)? + (ell + tn0) * state.phi(lambda, -q)?;
    if cls.n0 > 0 {
        f -= tn0 * state.phi(lambda, cls.lambda0)?;
    }
    Ok(f)
}

/// Assemble the shift data of a class.
pub fn shift_data(state: &ThermoState, cls: &ExcitationClass) -> Result<ShiftData> {
    cls.validate_regime(state)?;
    let q = state.q;
    let values: Result<Vec<f64>> = state
        .grid
        .nodes
        .iter()
        .map(|&l| shift_at(state, cls, l))
        .collect();
    let ffun = SampledFunction::new(state.grid.clone(), values?);
    let fplus = shift_at(state, cls, q)? + cls.delta_n as f64;
    let fminus = shift_at(state, cls, -q)?;
    let l0 = cls.lambda0;
    let phi_plus = state.phi(q, -q)? - state.phi(q, l0)?;
    let phi_minus = 1.0 + state.phi(-q, -q)? - state.phi(-q, l0)?;
    Ok(ShiftData {
        fplus,
        fminus,
        ffun,
        phi_plus,
        phi_minus,
    })
}

/// Boundary exponents in closed form through the fractional charge and the
/// saddle-phase combinations:
/// (a, b) = ((alpha + ell) Z +- DeltaN/(2Z) + tau n0 Phi+-).
pub fn closed_form_exponents(state: &ThermoState, cls: &ExcitationClass, sd: &ShiftData) -> (f64, f64) {
    let z = state.z_fermi;
    let base = (cls.alpha + cls.ell as f64) * z;
    let dn = cls.delta_n as f64;
    let tn0 = (cls.tau * cls.n0 as i32) as f64;
    (
        base + dn / (2.0 * z) + tn0 * sd.phi_plus,
        base - dn / (2.0 * z) + tn0 * sd.phi_minus,
    )
}

/// Form-factor scaling exponent of the class:
/// theta = (F+ + ell)^2 + (F- + ell + tau n0)^2 + n0.
pub fn theta_exponent(sd: &ShiftData, cls: &ExcitationClass) -> f64 {
    let a = sd.a_exponent(cls);
    let b = sd.b_exponent(cls);
    a * a + b * b + cls.n0 as f64
}

/// Critical decay exponent of the class's harmonic:
/// delta = n0^2/2 + (F+ + ell)^2 + (F- + ell + tau n0)^2.
pub fn delta_exponent(sd: &ShiftData, cls: &ExcitationClass, correlator: Correlator) -> Result<f64> {
    if cls.delta_n != correlator.delta_n() {
        return Err(Error::Argument(format!(
            "class delta_n = {} does not match correlator (expected {})",
            cls.delta_n,
            correlator.delta_n()
        )));
    }
    if correlator == Correlator::Density && cls.alpha != 0.0 {
        return Err(Error::Argument(
            "density exponents are evaluated at twist alpha = 0".into(),
        ));
    }
    let a = sd.a_exponent(cls);
    let b = sd.b_exponent(cls);
    let n0 = cls.n0 as f64;
    Ok(n0 * n0 / 2.0 + a * a + b * b)
}

/// Oscillation phase of the class's term:
/// phi_tau = sgn(x - v_F t) a^2 - sgn(x + v_F t) b^2 - tau sgn(t) n0^2/2,
/// with sgn(x -+ v_F t) derived from (tau, sgn x, sgn t): in the space-like
/// regime both equal sgn(x); in the time-like regime they are -+ sgn(t).
pub fn phase_phi_tau(
    sd: &ShiftData,
    cls: &ExcitationClass,
    sign_x: i32,
    sign_t: i32,
    correlator: Correlator,
) -> Result<f64> {
    if sign_x.abs() != 1 || sign_t.abs() != 1 {
        return Err(Error::Argument("sign_x and sign_t must be +-1".into()));
    }
    if cls.delta_n != correlator.delta_n() {
        return Err(Error::Argument(format!(
            "class delta_n = {} does not match correlator (expected {})",
            cls.delta_n,
            correlator.delta_n()
        )));
    }
    let (sx, st) = (sign_x as f64, sign_t as f64);
    let (sgn_minus, sgn_plus) = if cls.tau == 1 { (sx, sx) } else { (-st, st) };
    let a = sd.a_exponent(cls);
    let b = sd.b_exponent(cls);
    let n0 = cls.n0 as f64;
    Ok(sgn_minus * a * a - sgn_plus * b * b - (cls.tau as f64) * st * n0 * n0 / 2.0)
}
