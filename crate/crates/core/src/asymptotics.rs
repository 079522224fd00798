//! Saddle-point analysis of the phase u = eps - (x/t) p and assembly of the
//! table of leading oscillating harmonics of the two-point functions at
//! large x, t with fixed ratio x/t.

use crate::error::{Error, Result};
use crate::excitations::{phase_phi_tau, shift_data, Correlator, ExcitationClass};
use crate::specfun::barnes_g;
use crate::thermo::ThermoState;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Relative width of the excluded band around |x/t| = v_F where the
/// expansion degenerates.
pub const DEFAULT_EXCLUSION_BAND: f64 = 0.01;

/// Saddle rapidity and curvature for a given ray x/t.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaddleData {
    pub lambda0: f64,
    /// +1 space-like (|x/t| > v_F), -1 time-like.
    pub tau: i32,
    /// u''(lambda0) = eps''(lambda0) - (x/t) p''(lambda0) > 0.
    pub upp: f64,
}

/// Solve v(lambda0) = x/t with the default exclusion band around v_F.
pub fn find_saddle(state: &ThermoState, x_over_t: f64) -> Result<SaddleData> {
    find_saddle_with_band(state, x_over_t, DEFAULT_EXCLUSION_BAND)
}

/// Solve v(lambda0) = x/t; `band` is the relative exclusion width around
/// |x/t| = v_F.
pub fn find_saddle_with_band(state: &ThermoState, x_over_t: f64, band: f64) -> Result<SaddleData> {
    if !x_over_t.is_finite() {
        return Err(Error::Argument("x/t must be finite".into()));
    }
    let v_f = state.v_f;
    if (x_over_t.abs() - v_f).abs() <= band * v_f {
        return Err(Error::RegimeBoundary(format!(
            "|x/t| = {} is within {band} of the sound velocity {v_f}",
            x_over_t.abs()
        )));
    }
    let tau = if x_over_t.abs() > v_f { 1 } else { -1 };
    // expand a bracket in the monotone velocity
    let mut lo = -state.q;
    let mut hi = state.q;
    let mut grow = state.q;
    while state.sound_velocity(lo) > x_over_t {
        lo -= grow;
        grow *= 2.0;
        if !lo.is_finite() {
            return Err(Error::Solver("saddle bracket expansion failed".into()));
        }
    }
    grow = state.q;
    while state.sound_velocity(hi) < x_over_t {
        hi += grow;
        grow *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Solver("saddle bracket expansion failed".into()));
        }
    }
    // velocity monotonicity is assumed throughout; verify on the bracket
    state.verify_velocity_monotone(lo, hi, 64)?;
    let mut flo = state.sound_velocity(lo) - x_over_t;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = state.sound_velocity(mid) - x_over_t;
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    let lambda0 = 0.5 * (lo + hi);
    let upp = state.eps_second(lambda0) - x_over_t * state.p_second(lambda0);
    if upp <= 0.0 {
        return Err(Error::Solver(format!(
            "saddle curvature u''({lambda0}) = {upp} is not positive"
        )));
    }
    Ok(SaddleData { lambda0, tau, upp })
}

/// Structural role of a term in the asymptotic series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    Oscillating,
    /// Density correlator: the constant D^2.
    DensityConstant,
    /// Density correlator: the smooth 1/x^2-type background.
    DensityNonOscillating,
}

/// One harmonic of the asymptotic expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    pub kind: TermKind,
    pub n0: u32,
    pub ell: i64,
    pub tau: i32,
    pub lambda0: f64,
    /// (2 ell + tau n0) k_F + tau n0 p(lambda0).
    pub harmonic_momentum: f64,
    /// tau n0 eps(lambda0).
    pub harmonic_energy: f64,
    /// (F+ + ell)^2.
    pub exp_plus: f64,
    /// (F- + ell + tau n0)^2.
    pub exp_minus: f64,
    /// n0^2/2.
    pub exp_saddle: f64,
    /// pi phi_tau / 2.
    pub phase: f64,
    /// (sqrt(2 pi) rho(lambda0))^{n0} G(1 + n0); the curvature factor
    /// |t eps'' - x p''|^{-n0^2/2} is applied at evaluation.
    pub prefactor: f64,
    /// |F^O|^2 handle; structure is exact, overall scale is external.
    pub amplitude: f64,
    pub amplitude_source: String,
}

impl AsymptoticTerm {
    /// Total power-law decay exponent used for ranking.
    pub fn total_exponent(&self) -> f64 {
        match self.kind {
            TermKind::DensityConstant => 0.0,
            TermKind::DensityNonOscillating => 2.0,
            TermKind::Oscillating => self.exp_plus + self.exp_minus + self.exp_saddle,
        }
    }

    /// Numerical value of the term at (x, t).
    pub fn evaluate(&self, state: &ThermoState, x: f64, t: f64) -> Complex64 {
        match self.kind {
            TermKind::DensityConstant => Complex64::new(state.density * state.density, 0.0),
            TermKind::DensityNonOscillating => {
                let v2t2 = state.v_f * state.v_f * t * t;
                let denom = x * x - v2t2;
                Complex64::new(
                    -state.z_fermi * state.z_fermi * (x * x + v2t2)
                        / (2.0 * PI * PI * denom * denom),
                    0.0,
                )
            }
            TermKind::Oscillating => {
                let curv = (t * state.eps_second(self.lambda0)
                    - x * state.p_second(self.lambda0))
                .abs();
                let osc = Complex64::new(
                    0.0,
                    x * self.harmonic_momentum - t * self.harmonic_energy + self.phase,
                )
                .exp();
                let decay = (2.0 * PI * (x - state.v_f * t)).abs().powf(self.exp_plus)
                    * (2.0 * PI * (x + state.v_f * t)).abs().powf(self.exp_minus)
                    * curv.powf(self.exp_saddle);
                osc * self.prefactor * self.amplitude / decay
            }
        }
    }
}

/// Appendix-level amplitude conversion: the density form factor equals
/// (P_ex / 2 pi) times the alpha-derivative of the twisted one, so squared
/// handles convert by (P_ex / 2 pi)^2.
pub fn density_amplitude_from_twisted(d_alpha_sq: f64, p_ex: f64) -> Result<f64> {
    if p_ex == 0.0 {
        return Err(Error::Argument(
            "amplitude conversion is singular at zero excitation momentum".into(),
        ));
    }
    Ok((p_ex / (2.0 * PI)).powi(2) * d_alpha_sq)
}

/// Build the ordered table of harmonics for one correlator along the ray
/// through (x, t).
pub fn asymptotic_table(
    state: &ThermoState,
    correlator: Correlator,
    x: f64,
    t: f64,
    n0_max: u32,
    ell_max: u32,
    amplitudes: &HashMap<(u32, i64), f64>,
) -> Result<Vec<AsymptoticTerm>> {
    asymptotic_table_with_band(
        state,
        correlator,
        x,
        t,
        n0_max,
        ell_max,
        amplitudes,
        DEFAULT_EXCLUSION_BAND,
    )
}

/// As `asymptotic_table`, with an explicit exclusion band around v_F.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_table_with_band(
    state: &ThermoState,
    correlator: Correlator,
    x: f64,
    t: f64,
    n0_max: u32,
    ell_max: u32,
    amplitudes: &HashMap<(u32, i64), f64>,
    band: f64,
) -> Result<Vec<AsymptoticTerm>> {
    if t == 0.0 {
        return Err(Error::Argument("t must be nonzero".into()));
    }
    let saddle = find_saddle_with_band(state, x / t, band)?;
    let sign_x = if x >= 0.0 { 1 } else { -1 };
    let sign_t = if t > 0.0 { 1 } else { -1 };
    let rho0 = state.rho_at(saddle.lambda0);
    let p0 = state.p_at(saddle.lambda0);
    let e0 = state.eps_at(saddle.lambda0);
    let mut terms = Vec::new();
    if correlator == Correlator::Density {
        terms.push(AsymptoticTerm {
            kind: TermKind::DensityConstant,
            n0: 0,
            ell: 0,
            tau: saddle.tau,
            lambda0: saddle.lambda0,
            harmonic_momentum: 0.0,
            harmonic_energy: 0.0,
            exp_plus: 0.0,
            exp_minus: 0.0,
            exp_saddle: 0.0,
            phase: 0.0,
            prefactor: 1.0,
            amplitude: 1.0,
            amplitude_source: "exact".into(),
        });
        terms.push(AsymptoticTerm {
            kind: TermKind::DensityNonOscillating,
            n0: 0,
            ell: 0,
            tau: saddle.tau,
            lambda0: saddle.lambda0,
            harmonic_momentum: 0.0,
            harmonic_energy: 0.0,
            exp_plus: 1.0,
            exp_minus: 1.0,
            exp_saddle: 0.0,
            phase: 0.0,
            prefactor: 1.0,
            amplitude: 1.0,
            amplitude_source: "exact".into(),
        });
    }
    for n0 in 0..=n0_max {
        for ell in -(ell_max as i64)..=ell_max as i64 {
            if correlator == Correlator::Density && n0 == 0 && ell == 0 {
                continue;
            }
            let cls = ExcitationClass::new(
                saddle.tau,
                n0,
                ell,
                correlator.delta_n(),
                0.0,
                saddle.lambda0,
            )?;
            let sd = shift_data(state, &cls)?;
            let a = sd.a_exponent(&cls);
            let b = sd.b_exponent(&cls);
            let phase = PI / 2.0 * phase_phi_tau(&sd, &cls, sign_x, sign_t, correlator)?;
            let tn0 = (saddle.tau * n0 as i32) as f64;
            let (amplitude, amplitude_source) = match amplitudes.get(&(n0, ell)) {
                Some(&ampl) => {
                    if !(ampl >= 0.0) {
                        return Err(Error::Argument(format!(
                            "amplitude for (n0, ell) = ({n0}, {ell}) must be >= 0"
                        )));
                    }
                    (ampl, "supplied".to_string())
                }
                None => (1.0, "default-unit".to_string()),
            };
            terms.push(AsymptoticTerm {
                kind: TermKind::Oscillating,
                n0,
                ell,
                tau: saddle.tau,
                lambda0: saddle.lambda0,
                harmonic_momentum: (2.0 * ell as f64 + tn0) * state.k_f + tn0 * p0,
                harmonic_energy: tn0 * e0,
                exp_plus: a * a,
                exp_minus: b * b,
                exp_saddle: (n0 * n0) as f64 / 2.0,
                phase,
                prefactor: ((2.0 * PI).sqrt() * rho0).powi(n0 as i32) * barnes_g(1.0 + n0 as f64)?,
                amplitude,
                amplitude_source,
            });
        }
    }
    terms.sort_by(|u, v| {
        u.total_exponent()
            .partial_cmp(&v.total_exponent())
            .unwrap()
            .then(u.n0.cmp(&v.n0))
            .then(u.ell.cmp(&v.ell))
    });
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitations::{delta_exponent, theta_exponent};
    use crate::thermo::{build_thermo_state, ModelParams};
    use approx::assert_relative_eq;

    fn state(c: f64) -> ThermoState {
        build_thermo_state(ModelParams::new(c, 1.0).unwrap(), 96).unwrap()
    }

    #[test]
    fn free_fermion_saddles() {
        let st = state(1e6);
        let s = find_saddle(&st, 3.0).unwrap();
        assert_relative_eq!(s.lambda0, 1.5, epsilon = 1e-4);
        assert_eq!(s.tau, 1);
        assert_relative_eq!(s.upp, 2.0, epsilon = 1e-4);
        let s = find_saddle(&st, 1.0).unwrap();
        assert_relative_eq!(s.lambda0, 0.5, epsilon = 1e-4);
        assert_eq!(s.tau, -1);
    }

    #[test]
    fn boundary_band_rejected() {
        let st = state(1e6);
        // v_F ~ 2 at the free-fermion point with h = 1
        assert!(matches!(
            find_saddle(&st, st.v_f * 1.005),
            Err(Error::RegimeBoundary(_))
        ));
        assert!(find_saddle(&st, st.v_f * 1.02).is_ok());
    }

    #[test]
    fn saddle_matches_grid_scan_oracle() {
        let st = state(1.0);
        let target = 4.0;
        let s = find_saddle(&st, target).unwrap();
        // dense argmin scan of |v(lambda) - x/t|
        let mut best = (f64::INFINITY, 0.0);
        let (lo, hi) = (0.0, 6.0 * st.q);
        for k in 0..=600_000 {
            let l = lo + (hi - lo) * k as f64 / 600_000.0;
            let d = (st.sound_velocity(l) - target).abs();
            if d < best.0 {
                best = (d, l);
            }
        }
        assert_relative_eq!(s.lambda0, best.1, epsilon = 1e-5);
        assert!((st.sound_velocity(s.lambda0) - target).abs() <= 1e-9);
    }

    #[test]
    fn field_table_free_fermion_space_like() {
        let st = state(1e6);
        let table = asymptotic_table(
            &st,
            Correlator::FieldPsiPsidag,
            3.0,
            1.0,
            2,
            2,
            &HashMap::new(),
        )
        .unwrap();
        let key: Vec<(u32, i64, f64)> = table
            .iter()
            .take(4)
            .map(|t| (t.n0, t.ell, t.total_exponent()))
            .collect();
        assert_eq!((key[0].0, key[0].1), (0, 0));
        assert_relative_eq!(key[0].2, 0.5, epsilon = 1e-4);
        // next two: the saddle harmonics (1, -1) and (1, 0) at exponent 1
        assert_eq!((key[1].0, key[1].1), (1, -1));
        assert_eq!((key[2].0, key[2].1), (1, 0));
        assert_relative_eq!(key[1].2, 1.0, epsilon = 1e-4);
        assert_relative_eq!(key[2].2, 1.0, epsilon = 1e-4);
        assert!(key[3].2 > 2.0);
    }

    #[test]
    fn field_table_free_fermion_time_like() {
        let st = state(1e6);
        let table = asymptotic_table(
            &st,
            Correlator::FieldPsiPsidag,
            1.0,
            1.0,
            2,
            2,
            &HashMap::new(),
        )
        .unwrap();
        let find = |n0: u32, ell: i64| {
            table
                .iter()
                .find(|t| t.kind == TermKind::Oscillating && t.n0 == n0 && t.ell == ell)
                .unwrap()
                .total_exponent()
        };
        assert_relative_eq!(find(1, 0), 3.0, epsilon = 1e-4);
        assert_relative_eq!(find(1, 1), 3.0, epsilon = 1e-4);
        assert_relative_eq!(find(0, 1), 2.5, epsilon = 1e-4);
        assert_relative_eq!(find(0, -1), 2.5, epsilon = 1e-4);
    }

    #[test]
    fn density_table_free_fermion() {
        let st = state(1e6);
        for (x, t, tau) in [(3.0, 1.0, 1), (1.0, 1.0, -1)] {
            let table =
                asymptotic_table(&st, Correlator::Density, x, t, 2, 2, &HashMap::new()).unwrap();
            assert_eq!(table[0].kind, TermKind::DensityConstant);
            assert_relative_eq!(
                table[0].evaluate(&st, x, t).re,
                (st.k_f / PI).powi(2),
                epsilon = 1e-10
            );
            // leading oscillating harmonics: (1, 0) and (1, -tau) at 3/2
            let leading: Vec<(u32, i64)> = table
                .iter()
                .filter(|t| t.kind == TermKind::Oscillating && t.total_exponent() < 1.75)
                .map(|t| (t.n0, t.ell))
                .collect();
            assert_eq!(leading.len(), 2);
            assert!(leading.contains(&(1, 0)));
            assert!(leading.contains(&(1, -tau)));
            // they dominate the exponent-2 smooth background
            assert!(table
                .iter()
                .any(|t| t.kind == TermKind::DensityNonOscillating));
        }
    }

    #[test]
    fn exponent_assembly_identity() {
        let st = state(1.0);
        for corr in [
            Correlator::FieldPsiPsidag,
            Correlator::FieldPsidagPsi,
            Correlator::Density,
        ] {
            let table = asymptotic_table(&st, corr, 5.0, 1.0, 2, 2, &HashMap::new()).unwrap();
            let saddle = find_saddle(&st, 5.0).unwrap();
            for term in table.iter().filter(|t| t.kind == TermKind::Oscillating) {
                let cls = ExcitationClass::new(
                    term.tau,
                    term.n0,
                    term.ell,
                    corr.delta_n(),
                    0.0,
                    saddle.lambda0,
                )
                .unwrap();
                let sd = shift_data(&st, &cls).unwrap();
                let delta = delta_exponent(&sd, &cls, corr).unwrap();
                assert_relative_eq!(term.total_exponent(), delta, epsilon = 1e-12);
                // scaling exponent bookkeeping
                let th = theta_exponent(&sd, &cls);
                assert_relative_eq!(
                    term.exp_plus + term.exp_minus,
                    th - term.n0 as f64,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn density_harmonics_are_2kf_multiples() {
        let st = state(1.0);
        let table =
            asymptotic_table(&st, Correlator::Density, 5.0, 1.0, 2, 2, &HashMap::new()).unwrap();
        for term in table
            .iter()
            .filter(|t| t.kind == TermKind::Oscillating && t.n0 == 0)
        {
            let ratio = term.harmonic_momentum / (2.0 * st.k_f);
            assert_relative_eq!(ratio, term.ell as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn ranking_is_deterministic() {
        let st = state(1.0);
        let t1 = asymptotic_table(&st, Correlator::Density, 5.0, 1.0, 2, 2, &HashMap::new())
            .unwrap();
        let t2 = asymptotic_table(&st, Correlator::Density, 5.0, 1.0, 2, 2, &HashMap::new())
            .unwrap();
        let k1: Vec<_> = t1.iter().map(|t| (t.kind, t.n0, t.ell)).collect();
        let k2: Vec<_> = t2.iter().map(|t| (t.kind, t.n0, t.ell)).collect();
        assert_eq!(k1, k2);
        for w in t1.windows(2) {
            assert!(w[0].total_exponent() <= w[1].total_exponent() + 1e-15);
        }
    }

    #[test]
    fn amplitude_handles_and_conversion() {
        let st = state(1.0);
        let mut ampl = HashMap::new();
        ampl.insert((1u32, 0i64), 0.25);
        let table =
            asymptotic_table(&st, Correlator::Density, 5.0, 1.0, 1, 1, &ampl).unwrap();
        let term = table
            .iter()
            .find(|t| t.kind == TermKind::Oscillating && t.n0 == 1 && t.ell == 0)
            .unwrap();
        assert_eq!(term.amplitude, 0.25);
        assert_eq!(term.amplitude_source, "supplied");
        let other = table
            .iter()
            .find(|t| t.kind == TermKind::Oscillating && t.n0 == 0)
            .unwrap();
        assert_eq!(other.amplitude_source, "default-unit");
        // conversion between twisted and density amplitude normalizations
        let conv = density_amplitude_from_twisted(4.0, PI).unwrap();
        assert_relative_eq!(conv, 1.0, epsilon = 1e-14);
        assert!(density_amplitude_from_twisted(1.0, 0.0).is_err());
    }

    #[test]
    fn invalid_inputs() {
        let st = state(1.0);
        assert!(asymptotic_table(&st, Correlator::Density, 1.0, 0.0, 1, 1, &HashMap::new())
            .is_err());
        let mut bad = HashMap::new();
        bad.insert((0u32, 1i64), -1.0);
        assert!(asymptotic_table(&st, Correlator::Density, 5.0, 1.0, 1, 1, &bad).is_err());
    }
}
