//! Threshold singularities of the density structure factor and the spectral
//! function: dispersion thresholds, the closed-form Fourier kernels, and the
//! edge exponents with their one- and two-sided coefficients.

use crate::error::{Error, Result};
use crate::specfun::gamma;
use crate::thermo::ThermoState;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative half-width of the rejected band around the Fermi rapidities
/// +-q, where the single-mode threshold picture degenerates.
const Q_BAND: f64 = 1e-6;

/// Perturbation used to resolve removable 0 * inf forms at integer
/// exponent sums.
const DEGENERATE_EPS: f64 = 1e-6;
const DEGENERATE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdKind {
    Particle,
    Hole,
}

/// A point on the one-particle or one-hole excitation threshold.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Threshold {
    pub kind: ThresholdKind,
    pub lambda: f64,
    /// k_p = p(lambda) - k_F or k_h = k_F - p(lambda).
    pub k: f64,
    /// eps_p = eps(lambda) or eps_h = -eps(lambda); always >= 0.
    pub eps: f64,
    /// Sound velocity v(lambda).
    pub v: f64,
}

/// Classify lambda and evaluate the threshold dispersion there.
pub fn threshold_at(state: &ThermoState, lambda: f64) -> Result<Threshold> {
    let q = state.q;
    if !lambda.is_finite() {
        return Err(Error::Argument("lambda must be finite".into()));
    }
    if (lambda - q).abs() <= Q_BAND * q || (lambda + q).abs() <= Q_BAND * q {
        return Err(Error::RegimeBoundary(format!(
            "lambda = {lambda} lies on the Fermi boundary band around +-q = +-{q}"
        )));
    }
    let v = state.sound_velocity(lambda);
    if lambda > q {
        Ok(Threshold {
            kind: ThresholdKind::Particle,
            lambda,
            k: state.p_at(lambda) - state.k_f,
            eps: state.eps_at(lambda),
            v,
        })
    } else if lambda.abs() < q {
        Ok(Threshold {
            kind: ThresholdKind::Hole,
            lambda,
            k: state.k_f - state.p_at(lambda),
            eps: -state.eps_at(lambda),
            v,
        })
    } else {
        Err(Error::Argument(format!(
            "lambda = {lambda} is below the left Fermi boundary -q = -{q}"
        )))
    }
}

/// Closed form of the one-sided oscillatory kernel:
/// H(b) (2 pi)^{1-alpha} b^{alpha-1} / Gamma(alpha).
pub fn fourier_kernel(alpha: f64, b: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!(
            "kernel exponent must be positive, got {alpha}"
        )));
    }
    if b < 0.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        if alpha < 1.0 {
            return Err(Error::Domain(format!(
                "kernel diverges at b = 0 for exponent {alpha} < 1"
            )));
        }
        return Ok(if alpha == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((2.0 * PI).powf(1.0 - alpha) * b.powf(alpha - 1.0) / gamma(alpha)?)
}

/// Two-dimensional kernel, supported on the interior of the light cone
/// E > v_F |P|; factorizes into two one-dimensional kernels along the
/// light-cone coordinates.
pub fn fourier_kernel_2d(
    alpha_plus: f64,
    alpha_minus: f64,
    e: f64,
    p: f64,
    v_f: f64,
) -> Result<f64> {
    if !(v_f > 0.0) {
        return Err(Error::Domain(format!("v_F must be positive, got {v_f}")));
    }
    if !(alpha_plus > 0.0) || !(alpha_minus > 0.0) {
        return Err(Error::Domain(
            "both kernel exponents must be positive".into(),
        ));
    }
    if e <= v_f * p.abs() {
        return Ok(0.0);
    }
    let ip = fourier_kernel(alpha_plus, (e + v_f * p) / (2.0 * v_f))?;
    let im = fourier_kernel(alpha_minus, (e - v_f * p) / (2.0 * v_f))?;
    Ok(ip * im / (2.0 * v_f))
}

/// Spectral-function branch labels. The anti branches sit at the reflected
/// points (k, -eps) and carry the swapped exponent sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralBranch {
    Particle,
    Hole,
    AntiParticle,
    AntiHole,
}

impl SpectralBranch {
    fn underlying(self) -> ThresholdKind {
        match self {
            SpectralBranch::Particle | SpectralBranch::AntiParticle => ThresholdKind::Particle,
            SpectralBranch::Hole | SpectralBranch::AntiHole => ThresholdKind::Hole,
        }
    }
}

/// Edge exponents and the coefficients of |delta omega / 2 pi|^{alpha_+ +
/// alpha_- - 1} on the two sides of the threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeResult {
    /// "dsf-particle", "dsf-hole", or the spectral branch name.
    pub branch: String,
    pub lambda: f64,
    pub k: f64,
    pub eps: f64,
    pub v: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// alpha_+ + alpha_- - 1.
    pub edge_exponent: f64,
    /// Coefficient on the delta omega > 0 side.
    pub coefficient_above: f64,
    /// Coefficient on the delta omega < 0 side; identically 0 for one-sided
    /// (hole-type) results.
    pub coefficient_below: f64,
    /// Set when the exponent sum hits a nonnegative integer and the
    /// coefficients are removable-limit values.
    pub degenerate: bool,
    /// Squared form-factor handle the coefficients are proportional to.
    pub amplitude: f64,
}

fn check_amplitude(amplitude: f64) -> Result<()> {
    if !(amplitude >= 0.0) {
        return Err(Error::Argument(format!(
            "amplitude handle must be >= 0, got {amplitude}"
        )));
    }
    Ok(())
}

/// Gamma(1 - a_plus - a_minus) * sin(pi * a_sel); removable singularities at
/// integer a_plus + a_minus resolved by a Richardson-extrapolated limit along
/// a_pm -> a_pm + eps.
fn gamma_sin_pair(a_plus: f64, a_minus: f64) -> Result<(f64, f64, bool)> {
    let sum = a_plus + a_minus;
    let degenerate = sum >= -DEGENERATE_TOL && (sum - sum.round()).abs() <= DEGENERATE_TOL;
    if !degenerate {
        let g = gamma(1.0 - sum)?;
        return Ok(((PI * a_minus).sin() * g, (PI * a_plus).sin() * g, false));
    }
    let eval = |eps: f64| -> Result<(f64, f64)> {
        let g = gamma(1.0 - sum - 2.0 * eps)?;
        Ok((
            (PI * (a_minus + eps)).sin() * g,
            (PI * (a_plus + eps)).sin() * g,
        ))
    };
    let (p1, q1) = eval(DEGENERATE_EPS)?;
    let (p2, q2) = eval(DEGENERATE_EPS / 2.0)?;
    Ok((2.0 * p2 - p1, 2.0 * q2 - q1, true))
}

fn two_sided(
    branch: &str,
    thr: &Threshold,
    a_plus: f64,
    a_minus: f64,
    scale: f64,
    amplitude: f64,
    v_f: f64,
) -> Result<EdgeResult> {
    // particle-type kinematics: v > v_F
    let denom = (thr.v - v_f).powf(a_plus) * (thr.v + v_f).powf(a_minus);
    let (s_above, s_below, degenerate) = gamma_sin_pair(a_plus, a_minus)?;
    Ok(EdgeResult {
        branch: branch.into(),
        lambda: thr.lambda,
        k: thr.k,
        eps: thr.eps,
        v: thr.v,
        alpha_plus: a_plus,
        alpha_minus: a_minus,
        edge_exponent: a_plus + a_minus - 1.0,
        coefficient_above: scale * amplitude * s_above / denom,
        coefficient_below: scale * amplitude * s_below / denom,
        degenerate,
        amplitude,
    })
}

fn one_sided(
    branch: &str,
    thr: &Threshold,
    a_plus: f64,
    a_minus: f64,
    scale: f64,
    amplitude: f64,
    v_f: f64,
    below: bool,
) -> Result<EdgeResult> {
    // hole-type kinematics: |v| < v_F
    let denom = (v_f - thr.v).powf(a_plus) * (v_f + thr.v).powf(a_minus);
    let coeff = scale * amplitude / (gamma(a_plus + a_minus)? * denom);
    let (above, bel) = if below { (0.0, coeff) } else { (coeff, 0.0) };
    Ok(EdgeResult {
        branch: branch.into(),
        lambda: thr.lambda,
        k: thr.k,
        eps: thr.eps,
        v: thr.v,
        alpha_plus: a_plus,
        alpha_minus: a_minus,
        edge_exponent: a_plus + a_minus - 1.0,
        coefficient_above: above,
        coefficient_below: bel,
        degenerate: false,
        amplitude,
    })
}

/// Density-structure-factor edge at the threshold through lambda.
///
/// Exponents: alpha_+ = (Z/2 + 1/(2Z) + phi(q, lambda))^2,
/// alpha_- = (Z/2 - 1/(2Z) + phi(-q, lambda))^2. The particle threshold is
/// two-sided; the hole threshold exists only above.
pub fn dsf_edge(state: &ThermoState, lambda: f64, amplitude: f64) -> Result<EdgeResult> {
    check_amplitude(amplitude)?;
    let thr = threshold_at(state, lambda)?;
    let z = state.z_fermi;
    let a_plus = (0.5 * z + 0.5 / z + state.phi(state.q, lambda)?).powi(2);
    let a_minus = (0.5 * z - 0.5 / z + state.phi(-state.q, lambda)?).powi(2);
    match thr.kind {
        ThresholdKind::Particle => two_sided(
            "dsf-particle",
            &thr,
            a_plus,
            a_minus,
            1.0 / PI,
            amplitude,
            state.v_f,
        ),
        ThresholdKind::Hole => one_sided(
            "dsf-hole", &thr, a_plus, a_minus, 1.0, amplitude, state.v_f, false,
        ),
    }
}

/// Spectral-function edge for one of the four branches at the threshold
/// through lambda.
///
/// Exponent sets: (Z/2 + phi(+-q, lambda))^2 on the particle and anti-hole
/// branches, (Z/2 +- 1/Z + phi(+-q, lambda))^2 on the hole and anti-particle
/// branches. The anti branches carry an overall minus sign and live at
/// (k, -eps).
pub fn spectral_edge(
    state: &ThermoState,
    lambda: f64,
    branch: SpectralBranch,
    amplitude: f64,
) -> Result<EdgeResult> {
    check_amplitude(amplitude)?;
    let thr = threshold_at(state, lambda)?;
    if thr.kind != branch.underlying() {
        return Err(Error::Argument(format!(
            "lambda = {lambda} is on the {:?} threshold, incompatible with branch {branch:?}",
            thr.kind
        )));
    }
    let z = state.z_fermi;
    let pp = state.phi(state.q, lambda)?;
    let pm = state.phi(-state.q, lambda)?;
    let p_plus = (0.5 * z + pp).powi(2);
    let p_minus = (0.5 * z + pm).powi(2);
    let h_plus = (0.5 * z + 1.0 / z + pp).powi(2);
    let h_minus = (0.5 * z - 1.0 / z + pm).powi(2);
    let v_f = state.v_f;
    match branch {
        SpectralBranch::Particle => two_sided(
            "particle",
            &thr,
            p_plus,
            p_minus,
            1.0 / (2.0 * PI * PI),
            amplitude,
            v_f,
        ),
        SpectralBranch::Hole => one_sided(
            "hole",
            &thr,
            h_plus,
            h_minus,
            1.0 / (2.0 * PI),
            amplitude,
            v_f,
            false,
        ),
        SpectralBranch::AntiParticle => {
            // hole exponent set, negated, sides swapped relative to the
            // direct particle branch
            let mut r = two_sided(
                "anti-particle",
                &thr,
                h_plus,
                h_minus,
                -1.0 / (2.0 * PI * PI),
                amplitude,
                v_f,
            )?;
            std::mem::swap(&mut r.coefficient_above, &mut r.coefficient_below);
            Ok(r)
        }
        SpectralBranch::AntiHole => one_sided(
            "anti-hole",
            &thr,
            p_plus,
            p_minus,
            -1.0 / (2.0 * PI),
            amplitude,
            v_f,
            true,
        ),
    }
}
