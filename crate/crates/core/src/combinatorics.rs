//! Discrete summation machinery: the R weights attached to particle-hole
//! quantum numbers, the closed-form summation identity together with a
//! brute-force enumeration oracle, and the Gaudin-Mehta integral.

use crate::error::{Error, Result};
use crate::specfun::{ln_barnes_g_signed, ln_gamma_signed, log_gamma};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Strictly increasing particle and hole labels, all >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumTuple {
    pub p: Vec<u64>,
    pub h: Vec<u64>,
}

impl QuantumTuple {
    pub fn new(p: Vec<u64>, h: Vec<u64>) -> Result<Self> {
        for (name, v) in [("p", &p), ("h", &h)] {
            if v.iter().any(|&x| x < 1) {
                return Err(Error::Argument(format!("{name} labels must be >= 1")));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Argument(format!(
                    "{name} labels must be strictly increasing"
                )));
            }
        }
        Ok(QuantumTuple { p, h })
    }
}

/// The weight
/// R(p, h | F) = (sin(pi F)/pi)^{2n'}
///   * prod_{j>k}(p_j-p_k)^2 prod_{j>k}(h_j-h_k)^2 / prod_{j,k}(p_j+h_k-1)^2
///   * prod Gamma^2(p_k+F)/Gamma^2(p_k) * prod Gamma^2(h_k-F)/Gamma^2(h_k),
/// computed in log-space. Always >= 0.
pub fn r_weight(qt: &QuantumTuple, f: f64) -> Result<f64> {
    let np = qt.p.len();
    let nh = qt.h.len();
    for (k, &p) in qt.p.iter().enumerate() {
        if p as f64 + f <= 0.0 {
            return Err(Error::Domain(format!(
                "gamma argument p[{k}] + F = {} is not positive",
                p as f64 + f
            )));
        }
    }
    for (k, &h) in qt.h.iter().enumerate() {
        if h as f64 - f <= 0.0 {
            return Err(Error::Domain(format!(
                "gamma argument h[{k}] - F = {} is not positive",
                h as f64 - f
            )));
        }
    }
    let sin_f = (PI * f).sin();
    let mut ln = 0.0;
    if nh > 0 {
        if sin_f == 0.0 {
            return Ok(0.0);
        }
        ln += 2.0 * nh as f64 * (sin_f.abs() / PI).ln();
    }
    for j in 1..np {
        for k in 0..j {
            ln += 2.0 * ((qt.p[j] - qt.p[k]) as f64).ln();
        }
    }
    for j in 1..nh {
        for k in 0..j {
            ln += 2.0 * ((qt.h[j] - qt.h[k]) as f64).ln();
        }
    }
    for &p in &qt.p {
        for &h in &qt.h {
            ln -= 2.0 * ((p + h - 1) as f64).ln();
        }
    }
    for &p in &qt.p {
        let (lg, _) = ln_gamma_signed(p as f64 + f)?;
        ln += 2.0 * (lg - log_gamma(p as f64)?);
    }
    for &h in &qt.h {
        let (lg, _) = ln_gamma_signed(h as f64 - f)?;
        ln += 2.0 * (lg - log_gamma(h as f64)?);
    }
    Ok(ln.exp())
}

/// Closed form of the weighted sum over all tuples with n - n' = r:
/// G^2(1+r+F)/G^2(1+F) * w^{r(r-1)/2} / (1-w)^{(F+r)^2},
/// principal branch for the complex power. Valid for |w| < 1.
pub fn magic_sum_closed(w: Complex64, f: f64, r: i64) -> Result<Complex64> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "the summation identity requires |w| < 1, got |w| = {}",
            w.norm()
        )));
    }
    let (ln_g_num, _) = ln_barnes_g_signed(1.0 + r as f64 + f)?;
    let (ln_g_den, _) = ln_barnes_g_signed(1.0 + f)?;
    // squared G's: the sign cancels
    let g_ratio = (2.0 * (ln_g_num - ln_g_den)).exp();
    // r(r-1)/2 is a triangular number, never negative
    let tri = (r * (r - 1) / 2) as i32;
    let w_pow = w.powi(tri);
    let e = (f + r as f64) * (f + r as f64);
    let denom = (Complex64::new(1.0, 0.0) - w).powf(e);
    Ok(g_ratio * w_pow / denom)
}

/// Truncated direct evaluation of the left-hand side of the summation
/// identity, together with a geometric estimate of the truncation error.
#[derive(Debug, Clone, Copy)]
pub struct BruteforceSum {
    pub value: Complex64,
    /// Geometric-tail bound built from the last shell's magnitude.
    pub truncation_bound: f64,
}

impl BruteforceSum {
    /// Convergence warning when the reported bound exceeds `tol`.
    pub fn warning(&self, tol: f64) -> Option<String> {
        (self.truncation_bound > tol).then(|| {
            format!(
                "truncation bound {:.3e} exceeds requested tolerance {:.3e}; increase the cutoff",
                self.truncation_bound, tol
            )
        })
    }
}

/// Enumerate strictly increasing tuples of `count` integers >= `min`
/// summing to `target`, feeding each into `f`.
fn for_each_tuple(count: usize, min: u64, target: u64, prefix: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if count == 0 {
        if target == 0 {
            f(prefix);
        }
        return;
    }
    // remaining entries are strictly increasing, so the smallest uses
    // at most target - (sum of the count-1 larger ones) >= ...
    let mut first = min;
    loop {
        // minimal possible total with this choice of first element
        let c = count as u64;
        let min_total = first * c + c * (c - 1) / 2;
        if min_total > target {
            break;
        }
        prefix.push(first);
        for_each_tuple(count - 1, first + 1, target - first, prefix, f);
        prefix.pop();
        first += 1;
    }
}

/// A tuple of labels together with its precomputed log-weight contribution
/// (pairwise Vandermonde factors plus per-element gamma ratios).
struct LabeledConfig {
    labels: Vec<u64>,
    ln: f64,
}

/// Direct enumeration of the summation identity's left-hand side over shells
/// of fixed total weight W = sum(p_j - 1) + sum(h_k), W <= cutoff.
///
/// All transcendental factors are tabulated up front; each enumerated
/// (p, h) pair then costs only table lookups and one `exp`.
pub fn magic_sum_bruteforce(w: Complex64, f: f64, r: i64, cutoff: u32) -> Result<BruteforceSum> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "the summation identity requires |w| < 1, got |w| = {}",
            w.norm()
        )));
    }
    if cutoff == 0 {
        return Err(Error::Argument("cutoff must be positive".into()));
    }
    let cut = cutoff as u64;
    // log tables over every integer that can appear: label differences are
    // <= cutoff, cross denominators p + h - 1 <= 2 cutoff
    let ln_int: Vec<f64> = (0..=2 * cut + 2).map(|k| (k as f64).ln()).collect();
    // per-element gamma ratios 2 ln(Gamma(k +- F)/Gamma(k)); a NaN marks an
    // argument at or beyond a pole, surfaced as an error only if that label
    // is actually reached by the enumeration
    let mut lg_p = vec![f64::NAN; (cut + 2) as usize];
    let mut lg_h = vec![f64::NAN; (cut + 2) as usize];
    for k in 1..=(cut + 1) as usize {
        let kf = k as f64;
        if kf + f > 0.0 {
            lg_p[k] = 2.0 * (ln_gamma_signed(kf + f)?.0 - log_gamma(kf)?);
        }
        if kf - f > 0.0 {
            lg_h[k] = 2.0 * (ln_gamma_signed(kf - f)?.0 - log_gamma(kf)?);
        }
    }
    let sin_f = (PI * f).sin();
    // each hole carries a factor (sin(pi F)/pi)^2
    let ln_sin_sq = if sin_f == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * (sin_f.abs() / PI).ln()
    };
    // tuple sizes compatible with n - n' = r within the weight budget
    let nh_min = (-r).max(0) as u64;
    let mut sizes: Vec<(u64, u64)> = Vec::new();
    for nh in nh_min.. {
        let np = (nh as i64 + r) as u64;
        // minimal total weight for these sizes grows monotonically in nh
        let min_w = np * np.saturating_sub(1) / 2 + nh * (nh + 1) / 2;
        if min_w > cut {
            break;
        }
        sizes.push((np, nh));
    }
    // bucket every configuration by (size, weight), with its log-weight
    let bucket = |count: u64, hole_side: bool| -> Vec<Vec<LabeledConfig>> {
        let mut by_weight: Vec<Vec<LabeledConfig>> = (0..=cut).map(|_| Vec::new()).collect();
        for weight in 0..=cut {
            let min = if hole_side { 1 } else { 0 };
            for_each_tuple(count as usize, min, weight, &mut Vec::new(), &mut |t| {
                let mut ln = 0.0;
                for j in 1..t.len() {
                    for k in 0..j {
                        ln += 2.0 * ln_int[(t[j] - t[k]) as usize];
                    }
                }
                let labels: Vec<u64> = if hole_side {
                    if count > 0 {
                        ln += count as f64 * ln_sin_sq;
                    }
                    for &x in t {
                        ln += lg_h[x as usize];
                    }
                    t.to_vec()
                } else {
                    // particle labels are the shifted enumeration variables
                    for &x in t {
                        ln += lg_p[(x + 1) as usize];
                    }
                    t.iter().map(|&x| x + 1).collect()
                };
                by_weight[weight as usize].push(LabeledConfig { labels, ln });
            });
        }
        by_weight
    };
    let mut p_buckets: std::collections::HashMap<u64, Vec<Vec<LabeledConfig>>> =
        std::collections::HashMap::new();
    let mut h_buckets: std::collections::HashMap<u64, Vec<Vec<LabeledConfig>>> =
        std::collections::HashMap::new();
    for &(np, nh) in &sizes {
        p_buckets.entry(np).or_insert_with(|| bucket(np, false));
        h_buckets.entry(nh).or_insert_with(|| bucket(nh, true));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut last_shell_mag = 0.0_f64;
    for big_w in 0..=cut {
        // shell coefficient: sum of R over all (p, h) with n - n' = r and
        // sum(p_j - 1) + sum(h_k) = W
        let mut coeff = 0.0;
        for &(np, nh) in &sizes {
            let pb = &p_buckets[&np];
            let hb = &h_buckets[&nh];
            for wp in 0..=big_w {
                let wh = big_w - wp;
                for pc in &pb[wp as usize] {
                    for hc in &hb[wh as usize] {
                        let mut ln = pc.ln + hc.ln;
                        for &p in &pc.labels {
                            for &h in &hc.labels {
                                ln -= 2.0 * ln_int[(p + h - 1) as usize];
                            }
                        }
                        if ln.is_nan() {
                            return Err(Error::Domain(
                                "gamma argument at or beyond a pole in the enumeration".into(),
                            ));
                        }
                        coeff += ln.exp();
                    }
                }
            }
        }
        let term = w.powi(big_w as i32) * coeff;
        total += term;
        last_shell_mag = term.norm();
    }
    let q = w.norm();
    Ok(BruteforceSum {
        value: total,
        truncation_bound: last_shell_mag * q / (1.0 - q) + last_shell_mag,
    })
}

/// Closed form of the Gaudin-Mehta integral:
/// (1/n0!) int Delta^2({mu}) prod_k rho0 e^{-s mu_k^2/2} dmu
///   = (sqrt(2 pi) rho0)^{n0} G(1 + n0) / s^{n0^2/2}.
pub fn mehta_closed(n0: u32, s: f64, rho0: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Argument(format!("s must be > 0, got {s}")));
    }
    if !(rho0 > 0.0) {
        return Err(Error::Argument(format!("rho0 must be > 0, got {rho0}")));
    }
    if n0 == 0 {
        return Ok(1.0);
    }
    let n = n0 as f64;
    let (ln_g, _) = ln_barnes_g_signed(1.0 + n)?;
    Ok((n * ((2.0 * PI).sqrt() * rho0).ln() + ln_g - n * n / 2.0 * s.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tuple_validation() {
        assert!(QuantumTuple::new(vec![1, 2, 5], vec![3]).is_ok());
        assert!(QuantumTuple::new(vec![2, 2], vec![]).is_err());
        assert!(QuantumTuple::new(vec![0], vec![]).is_err());
        assert!(QuantumTuple::new(vec![], vec![3, 1]).is_err());
    }

    #[test]
    fn r_weight_empty_is_one() {
        let qt = QuantumTuple::new(vec![], vec![]).unwrap();
        assert_relative_eq!(r_weight(&qt, 0.37).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn r_weight_single_pair_half() {
        // p={1}, h={1}, F=1/2: (1/pi^2) Gamma^2(3/2) Gamma^2(1/2) = 1/4
        let qt = QuantumTuple::new(vec![1], vec![1]).unwrap();
        assert_relative_eq!(r_weight(&qt, 0.5).unwrap(), 0.25, max_relative = 1e-12);
    }

    #[test]
    fn r_weight_frozen_oracle() {
        // p={1,2}, h={1}, F=0.3, term-by-term 50-digit oracle
        let qt = QuantumTuple::new(vec![1, 2], vec![1]).unwrap();
        assert_relative_eq!(
            r_weight(&qt, 0.3).unwrap(),
            0.0306273750689502245780507053000602,
            max_relative = 1e-12
        );
    }

    #[test]
    fn r_weight_pole_guard() {
        let qt = QuantumTuple::new(vec![1], vec![1]).unwrap();
        assert!(r_weight(&qt, -1.0).is_err()); // p+F = 0
        assert!(r_weight(&qt, 1.5).is_err()); // h-F < 0
    }

    #[test]
    fn closed_trivial_cases() {
        for w in [c64(0.3, 0.0), c64(-0.2, 0.5), c64(0.0, 0.9)] {
            assert_relative_eq!(
                magic_sum_closed(w, 0.0, 0).unwrap().norm(),
                1.0,
                epsilon = 1e-12
            );
        }
        let v = magic_sum_closed(c64(0.5, 0.0), 0.0, 1).unwrap();
        assert_relative_eq!(v.re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_frozen_oracle() {
        let v = magic_sum_closed(c64(0.4, 0.2), 0.3, -1).unwrap();
        assert_relative_eq!(v.re, 0.050858848141862570271424053970, max_relative = 1e-11);
        assert_relative_eq!(v.im, 0.036408910271416917228669383750, max_relative = 1e-11);
    }

    #[test]
    fn closed_rejects_large_w() {
        assert!(magic_sum_closed(c64(1.0, 0.0), 0.3, 0).is_err());
        assert!(magic_sum_closed(c64(0.8, 0.8), 0.3, 0).is_err());
    }

    #[test]
    fn bruteforce_integer_f_collapses_holes() {
        // at integer F every configuration with holes is killed by sin(pi F)
        let bs = magic_sum_bruteforce(c64(0.5, 0.0), 0.0, 1, 60).unwrap();
        assert_relative_eq!(bs.value.re, 2.0, epsilon = 1e-12);
        assert!(bs.value.im.abs() < 1e-14);
    }

    #[test]
    fn bruteforce_zero_w() {
        let bs = magic_sum_bruteforce(c64(0.0, 0.0), 0.5, 0, 10).unwrap();
        assert_relative_eq!(bs.value.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bruteforce_matches_closed() {
        for (w, f, r) in [
            (c64(0.3, 0.0), 0.5, 0),
            (c64(0.4, 0.2), 0.3, -1),
            (c64(-0.25, 0.3), -0.45, 2),
            (c64(0.2, -0.4), 0.7, -2),
        ] {
            let closed = magic_sum_closed(w, f, r).unwrap();
            let brute = magic_sum_bruteforce(w, f, r, 40).unwrap();
            let err = (closed - brute.value).norm();
            assert!(
                err <= (3.0 * brute.truncation_bound).max(1e-8),
                "w={w}, F={f}, r={r}: err {err:.3e}, bound {:.3e}",
                brute.truncation_bound
            );
        }
    }

    #[test]
    fn bruteforce_warning_for_small_cutoff() {
        let bs = magic_sum_bruteforce(c64(0.6, 0.0), 0.5, 0, 3).unwrap();
        assert!(bs.warning(1e-10).is_some());
        let bs2 = magic_sum_bruteforce(c64(0.3, 0.0), 0.5, 0, 40).unwrap();
        assert!(bs2.warning(1e-8).is_none());
    }

    #[test]
    fn r_shift_consistency() {
        // closed(w, F+1, r-1) = closed(w, F, r) * w^{1-r} / Gamma^2(1+F)
        let w = c64(0.35, 0.15);
        for (f, r) in [(0.3, 0), (0.3, 2), (-0.2, -1), (0.6, 1)] {
            let lhs = magic_sum_closed(w, f + 1.0, r - 1).unwrap();
            let gamma2 = crate::specfun::gamma(1.0 + f).unwrap().powi(2);
            let rhs = magic_sum_closed(w, f, r).unwrap() * w.powi(1 - r as i32) / gamma2;
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn mehta_examples() {
        assert_relative_eq!(mehta_closed(0, 3.0, 0.2).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            mehta_closed(1, 1.0, 1.0).unwrap(),
            (2.0 * PI).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mehta_closed(2, 2.0, 1.0).unwrap(),
            PI / 2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mehta_scaling_laws() {
        for n0 in [1u32, 2, 3] {
            let base = mehta_closed(n0, 1.3, 0.7).unwrap();
            let scaled_rho = mehta_closed(n0, 1.3, 1.4).unwrap();
            assert_relative_eq!(
                scaled_rho / base,
                2.0_f64.powi(n0 as i32),
                max_relative = 1e-12
            );
            let scaled_s = mehta_closed(n0, 2.6, 0.7).unwrap();
            assert_relative_eq!(
                scaled_s / base,
                2.0_f64.powf(-((n0 * n0) as f64) / 2.0),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn mehta_invalid_args() {
        assert!(mehta_closed(1, 0.0, 1.0).is_err());
        assert!(mehta_closed(1, 1.0, -1.0).is_err());
    }
}
