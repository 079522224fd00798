//! Real special functions: log-gamma, gamma with sign tracking, and the
//! Barnes G-function.
//!
//! Everything here is computed in log-space; ratio expressions downstream
//! exponentiate once at the end.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_8;
/// log of the Glaisher-Kinkelin constant.
const LN_GLAISHER: f64 = 0.248_754_477_033_784_262_5;

/// Stirling series coefficients B_{2n} / (2n (2n-1)).
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// ln Gamma(x) for x > 0 via the Stirling series with upward recursion.
fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let mut series = 0.0;
    let z2 = z * z;
    let mut zp = z;
    for c in STIRLING {
        series += c / zp;
        zp *= z2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series + shift
}

/// ln Gamma(z) for z > 0.
///
/// Relative accuracy of exp(log_gamma) is better than 1e-13 on [0.01, 170].
pub fn log_gamma(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        if is_nonpositive_integer(z) {
            return Err(Error::Domain(format!("log_gamma pole at z = {z}")));
        }
        return Err(Error::Domain(format!(
            "log_gamma requires z > 0, got {z}"
        )));
    }
    Ok(ln_gamma_positive(z))
}

/// (ln |Gamma(x)|, sign of Gamma(x)) for any real x off the pole set.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::Domain(format!("gamma pole at x = {x}")));
    }
    if x > 0.0 {
        return Ok((ln_gamma_positive(x), 1.0));
    }
    // Reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x)), with 1 - x > 1.
    let s = (PI * x).sin();
    let ln_abs = (PI / s.abs()).ln() - ln_gamma_positive(1.0 - x);
    Ok((ln_abs, s.signum()))
}

/// Gamma(x) for real x off the pole set.
pub fn gamma(x: f64) -> Result<f64> {
    let (ln_abs, sign) = ln_gamma_signed(x)?;
    Ok(sign * ln_abs.exp())
}

/// Asymptotic series coefficients B_{2n+2} / (2n (2n+1) (2n+2)).
const BARNES_ASYMP: [f64; 5] = [
    -1.0 / 720.0,
    1.0 / 5040.0,
    -1.0 / 10080.0,
    5.0 / (66.0 * 720.0),
    -691.0 / 3603600.0,
];

/// ln G(1 + x) for large x via the asymptotic expansion.
fn ln_barnes_g_asymptotic(x: f64) -> f64 {
    debug_assert!(x >= 19.0);
    let lnx = x.ln();
    let mut series = 0.0;
    let x2 = x * x;
    let mut xp = x2;
    for c in BARNES_ASYMP {
        series += c / xp;
        xp *= x2;
    }
    0.25 * x2 + x * ln_gamma_positive(x + 1.0) - (0.5 * x2 + 0.5 * x + 1.0 / 12.0) * lnx
        - LN_GLAISHER
        + series
}

/// ln G(z) for z > 0: asymptotic expansion plus downward recursion
/// G(z) = G(z+1) / Gamma(z).
fn ln_barnes_g_positive(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let mut shift = 0.0;
    let mut w = z;
    while w < 20.0 {
        shift -= ln_gamma_positive(w);
        w += 1.0;
    }
    ln_barnes_g_asymptotic(w - 1.0) + shift
}

/// The Barnes G-function for z > 0.
///
/// Satisfies G(z+1) = Gamma(z) G(z), G(1) = 1.
pub fn barnes_g(z: f64) -> Result<f64> {
    Ok(ln_barnes_g(z)?.exp())
}

/// ln G(z) for z > 0.
pub fn ln_barnes_g(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!(
            "barnes_g requires z > 0, got {z}"
        )));
    }
    Ok(ln_barnes_g_positive(z))
}

/// (ln |G(z)|, sign of G(z)) for real z off the non-positive integers
/// (where G vanishes). Negative arguments via G(z) = G(z+1) / Gamma(z).
pub fn ln_barnes_g_signed(z: f64) -> Result<(f64, f64)> {
    if z > 0.0 {
        return Ok((ln_barnes_g_positive(z), 1.0));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Domain(format!("barnes G zero at z = {z}")));
    }
    let mut ln_abs = 0.0;
    let mut sign = 1.0;
    let mut w = z;
    while w <= 0.0 {
        let (lg, s) = ln_gamma_signed(w)?;
        ln_abs -= lg;
        sign *= s;
        w += 1.0;
    }
    ln_abs += ln_barnes_g_positive(w);
    Ok((ln_abs, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gamma_trivial_values() {
        assert_relative_eq!(log_gamma(1.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            PI.sqrt().ln(),
            epsilon = 1e-14
        );
        assert_relative_eq!(gamma(5.0).unwrap(), 24.0, max_relative = 1e-14);
    }

    #[test]
    fn gamma_frozen_oracle_values() {
        // 50-digit Stirling-series oracle values, frozen.
        assert_relative_eq!(
            log_gamma(20.5).unwrap(),
            40.831500974530798109776087460766520407694252875,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            log_gamma(0.01).unwrap(),
            4.59947987804202172251394541101,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            log_gamma(170.0).unwrap(),
            701.437263808737085346454736649,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            log_gamma(5.25).unwrap(),
            3.56137591038669693689256109215,
            max_relative = 1e-14
        );
    }

    #[test]
    fn gamma_pole_rejected() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-3.0).is_err());
        assert!(ln_gamma_signed(-2.0).is_err());
    }

    #[test]
    fn gamma_reflection() {
        for k in 1..100 {
            let z = k as f64 / 100.0;
            let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin() / PI;
            assert_relative_eq!(lhs, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_negative_sign() {
        // Gamma(-0.5) = -2 sqrt(pi)
        assert_relative_eq!(
            gamma(-0.5).unwrap(),
            -2.0 * PI.sqrt(),
            max_relative = 1e-13
        );
        // Gamma(-1.5) = 4 sqrt(pi) / 3
        assert_relative_eq!(
            gamma(-1.5).unwrap(),
            4.0 * PI.sqrt() / 3.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn barnes_small_integers() {
        for z in [1.0, 2.0, 3.0] {
            assert_relative_eq!(barnes_g(z).unwrap(), 1.0, max_relative = 1e-12);
        }
        assert_relative_eq!(barnes_g(4.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(barnes_g(5.0).unwrap(), 12.0, max_relative = 1e-12);
    }

    #[test]
    fn barnes_frozen_oracle_value() {
        // High-precision Barnes asymptotic series + downward recursion oracle.
        assert_relative_eq!(
            ln_barnes_g(3.5).unwrap(),
            0.230832521272678641561004909769239116,
            max_relative = 1e-11
        );
    }

    #[test]
    fn barnes_recursion_residual() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let z: f64 = rng.gen_range(0.1..30.0);
            let lhs = barnes_g(z + 1.0).unwrap();
            let rhs = gamma(z).unwrap() * barnes_g(z).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    #[test]
    fn barnes_signed_negative_argument() {
        // G(z) = G(z+1)/Gamma(z) continued below zero; check recursion there too.
        let z = -0.7;
        let (lg1, s1) = ln_barnes_g_signed(z + 1.0).unwrap();
        let (lg0, s0) = ln_barnes_g_signed(z).unwrap();
        let (lgam, sgam) = ln_gamma_signed(z).unwrap();
        assert_relative_eq!(lg1, lg0 + lgam, epsilon = 1e-12);
        assert_eq!(s1, s0 * sgam);
        assert!(ln_barnes_g_signed(-2.0).is_err());
    }
}
