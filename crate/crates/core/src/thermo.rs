//! Thermodynamic ground-state description of the repulsive 1D Bose gas for
//! given (c, h) or (c, D): Fermi boundary q, dressed density / energy /
//! momentum / charge / phase, and the exact interrelations between them.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, nystrom_extend, solve_fredholm, QuadGrid, SampledFunction};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Coupling constant and chemical potential, both positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(c: f64, h: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Argument(format!("coupling c must be > 0, got {c}")));
        }
        if !(h > 0.0) {
            return Err(Error::Argument(format!(
                "chemical potential h must be > 0, got {h}"
            )));
        }
        Ok(ModelParams { c, h })
    }
}

/// Bare single-particle functions of the model.
pub mod bare {
    /// Bare momentum p0(lambda) = lambda.
    pub fn p0(lambda: f64) -> f64 {
        lambda
    }

    /// Bare two-particle phase, the continuous odd branch of
    /// i log((ic + lambda)/(ic - lambda)).
    pub fn theta(lambda: f64, c: f64) -> f64 {
        2.0 * (lambda / c).atan()
    }

    /// Lorentzian kernel K = theta'.
    pub fn kernel(lambda: f64, c: f64) -> f64 {
        2.0 * c / (lambda * lambda + c * c)
    }

    /// K'.
    pub fn kernel_prime(lambda: f64, c: f64) -> f64 {
        let d = lambda * lambda + c * c;
        -4.0 * c * lambda / (d * d)
    }

    /// K''.
    pub fn kernel_second(lambda: f64, c: f64) -> f64 {
        let d = lambda * lambda + c * c;
        -4.0 * c * (c * c - 3.0 * lambda * lambda) / (d * d * d)
    }

    /// Bare energy eps0(lambda) = lambda^2 - h.
    pub fn eps0(lambda: f64, h: f64) -> f64 {
        lambda * lambda - h
    }
}

/// Maximum residuals of the exact thermodynamic identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Z(lambda) = 1 + phi(lambda, -q) - phi(lambda, q), max over nodes.
    pub z_phi1: f64,
    /// 1/Z(q) = 1 - phi(q, -q) - phi(q, q).
    pub z_phi2_right: f64,
    /// 1/Z(q) = 1 + phi(-q, q) + phi(-q, -q).
    pub z_phi2_left: f64,
    /// max(|eps(q)|, |eps(-q)|).
    pub eps_boundary: f64,
    /// Evenness of rho.
    pub rho_even: f64,
    /// Oddness of p.
    pub p_odd: f64,
    /// |p' - 2 pi rho|, max over nodes.
    pub p_prime_vs_rho: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.z_phi1,
            self.z_phi2_right,
            self.z_phi2_left,
            self.eps_boundary,
            self.rho_even,
            self.p_odd,
            self.p_prime_vs_rho,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Full thermodynamic solution at fixed (c, h).
///
/// Immutable after construction apart from the internal dressed-phase memo,
/// which is synchronized; the state is safe to share across threads.
#[derive(Debug)]
pub struct ThermoState {
    pub params: ModelParams,
    /// Fermi boundary.
    pub q: f64,
    pub grid: Arc<QuadGrid>,
    /// Root density rho(lambda).
    pub rho: SampledFunction,
    /// Dressed energy eps(lambda), eps(+-q) = 0.
    pub eps: SampledFunction,
    /// Dressed momentum p(lambda).
    pub pmom: SampledFunction,
    /// Dressed charge Z(lambda).
    pub zch: SampledFunction,
    /// Average density D = int rho.
    pub density: f64,
    /// Fermi momentum k_F = p(q).
    pub k_f: f64,
    /// Fermi velocity v_F = v(q).
    pub v_f: f64,
    /// Fractional charge Z(q).
    pub z_fermi: f64,
    phi_cache: Mutex<HashMap<u64, Arc<SampledFunction>>>,
}

fn eps_boundary_value(params: ModelParams, q: f64, n_nodes: usize) -> Result<f64> {
    let grid = Arc::new(gauss_legendre(n_nodes, -q, q)?);
    let c = params.c;
    let eps = solve_fredholm(
        |l, m| bare::kernel(l - m, c),
        |l| bare::eps0(l, params.h),
        &grid,
    )?;
    Ok(nystrom_extend(
        &eps,
        |l, m| bare::kernel(l - m, c),
        |l| bare::eps0(l, params.h),
        q,
    ))
}

/// Bisection for the root of a scalar map on a sign-changing bracket.
fn bisect(mut lo: f64, mut hi: f64, mut flo: f64, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= 1e-13 * mid.abs().max(1e-300) {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Build the thermodynamic state for given (c, h).
///
/// q is found as the root of q -> eps_q(q), where eps_q solves the dressed
/// energy equation on [-q, q].
pub fn build_thermo_state(params: ModelParams, n_nodes: usize) -> Result<ThermoState> {
    if n_nodes < 16 {
        return Err(Error::Argument(format!(
            "n_nodes must be >= 16, got {n_nodes}"
        )));
    }
    let sqrt_h = params.h.sqrt();
    let (lo, hi) = (1e-6 * sqrt_h, 10.0 * sqrt_h);
    let f_lo = eps_boundary_value(params, lo, n_nodes)?;
    let f_hi = eps_boundary_value(params, hi, n_nodes)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Config(format!(
            "no sign change of eps_q(q) on bracket [{lo:.3e}, {hi:.3e}] \
             (values {f_lo:.3e}, {f_hi:.3e})"
        )));
    }
    let mut f = |q: f64| eps_boundary_value(params, q, n_nodes);
    let q = bisect(lo, hi, f_lo, &mut f)?;
    ThermoState::assemble(params, q, n_nodes)
}

/// Build the thermodynamic state for given (c, D): q solves int rho = D and
/// h is back-filled from eps(q) = 0.
pub fn build_thermo_state_from_density(c: f64, density: f64, n_nodes: usize) -> Result<ThermoState> {
    if !(c > 0.0) {
        return Err(Error::Argument(format!("coupling c must be > 0, got {c}")));
    }
    if !(density > 0.0) {
        return Err(Error::Argument(format!("density must be > 0, got {density}")));
    }
    if n_nodes < 16 {
        return Err(Error::Argument(format!(
            "n_nodes must be >= 16, got {n_nodes}"
        )));
    }
    // rho >= 1/(2 pi) on [-q, q], so int rho >= q/pi: the density constraint
    // always brackets inside (0, pi D].
    let mut density_of_q = |q: f64| -> Result<f64> {
        let grid = Arc::new(gauss_legendre(n_nodes, -q, q)?);
        let rho = solve_fredholm(
            |l, m| bare::kernel(l - m, c),
            |_| 1.0 / (2.0 * PI),
            &grid,
        )?;
        Ok(rho.integral() - density)
    };
    let (lo, hi) = (1e-9 * density, PI * density * (1.0 + 1e-9));
    let f_lo = density_of_q(lo)?;
    let f_hi = density_of_q(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Config(format!(
            "no q solving the density constraint on bracket [{lo:.3e}, {hi:.3e}]"
        )));
    }
    let q = bisect(lo, hi, f_lo, &mut density_of_q)?;
    // eps = dressed(lambda^2) - h * dressed(1); the boundary condition
    // eps(q) = 0 fixes h = eps_a(q) / Z(q).
    let grid = Arc::new(gauss_legendre(n_nodes, -q, q)?);
    let eps_a = solve_fredholm(|l, m| bare::kernel(l - m, c), |l| l * l, &grid)?;
    let zch = solve_fredholm(|l, m| bare::kernel(l - m, c), |_| 1.0, &grid)?;
    let eps_a_q = nystrom_extend(&eps_a, |l, m| bare::kernel(l - m, c), |l| l * l, q);
    let z_q = nystrom_extend(&zch, |l, m| bare::kernel(l - m, c), |_| 1.0, q);
    let h = eps_a_q / z_q;
    let state = ThermoState::assemble(ModelParams::new(c, h)?, q, n_nodes)?;
    let resid = (state.density - density).abs();
    if resid > 1e-10 * density {
        return Err(Error::Solver(format!(
            "density residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok(state)
}

impl ThermoState {
    fn assemble(params: ModelParams, q: f64, n_nodes: usize) -> Result<ThermoState> {
        let c = params.c;
        let grid = Arc::new(gauss_legendre(n_nodes, -q, q)?);
        let kernel = |l: f64, m: f64| bare::kernel(l - m, c);
        let rho = solve_fredholm(kernel, |_| 1.0 / (2.0 * PI), &grid)?;
        let eps = solve_fredholm(kernel, |l| bare::eps0(l, params.h), &grid)?;
        let zch = solve_fredholm(kernel, |_| 1.0, &grid)?;
        let pvals: Vec<f64> = grid
            .nodes
            .iter()
            .map(|&l| {
                let mut acc = 0.0;
                for ((&m, &w), &r) in grid.nodes.iter().zip(&grid.weights).zip(&rho.values) {
                    acc += w * bare::theta(l - m, c) * r;
                }
                l + acc
            })
            .collect();
        let pmom = SampledFunction::new(Arc::clone(&grid), pvals);
        let density = rho.integral();
        let mut state = ThermoState {
            params,
            q,
            grid,
            rho,
            eps,
            pmom,
            zch,
            density,
            k_f: 0.0,
            v_f: 0.0,
            z_fermi: 0.0,
            phi_cache: Mutex::new(HashMap::new()),
        };
        state.k_f = state.p_at(q);
        state.z_fermi = state.z_at(q);
        state.v_f = state.eps_prime(q) / state.p_prime(q);
        Ok(state)
    }

    fn kernel(&self, x: f64) -> f64 {
        bare::kernel(x, self.params.c)
    }

    /// rho(lambda); outside [-q, q] via the Nystrom extension of the
    /// defining equation.
    pub fn rho_at(&self, lambda: f64) -> f64 {
        if lambda.abs() < self.q {
            self.rho.eval(lambda)
        } else {
            nystrom_extend(&self.rho, |l, m| self.kernel(l - m), |_| 1.0 / (2.0 * PI), lambda)
        }
    }

    /// Dressed energy at any rapidity.
    pub fn eps_at(&self, lambda: f64) -> f64 {
        if lambda.abs() < self.q {
            self.eps.eval(lambda)
        } else {
            nystrom_extend(
                &self.eps,
                |l, m| self.kernel(l - m),
                |l| bare::eps0(l, self.params.h),
                lambda,
            )
        }
    }

    /// Dressed charge at any rapidity.
    pub fn z_at(&self, lambda: f64) -> f64 {
        if lambda.abs() < self.q {
            self.zch.eval(lambda)
        } else {
            nystrom_extend(&self.zch, |l, m| self.kernel(l - m), |_| 1.0, lambda)
        }
    }

    /// Dressed momentum p(lambda) = lambda + int theta(lambda - mu) rho(mu) dmu.
    pub fn p_at(&self, lambda: f64) -> f64 {
        let c = self.params.c;
        let mut acc = 0.0;
        for ((&m, &w), &r) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.rho.values)
        {
            acc += w * bare::theta(lambda - m, c) * r;
        }
        lambda + acc
    }

    /// p'(lambda) = 1 + int K(lambda - mu) rho(mu) dmu = 2 pi rho(lambda).
    pub fn p_prime(&self, lambda: f64) -> f64 {
        let mut acc = 0.0;
        for ((&m, &w), &r) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.rho.values)
        {
            acc += w * self.kernel(lambda - m) * r;
        }
        1.0 + acc
    }

    /// eps'(lambda), differentiating the integral equation analytically.
    pub fn eps_prime(&self, lambda: f64) -> f64 {
        let c = self.params.c;
        let mut acc = 0.0;
        for ((&m, &w), &e) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.eps.values)
        {
            acc += w * bare::kernel_prime(lambda - m, c) * e;
        }
        2.0 * lambda + acc / (2.0 * PI)
    }

    /// p''(lambda).
    pub fn p_second(&self, lambda: f64) -> f64 {
        let c = self.params.c;
        let mut acc = 0.0;
        for ((&m, &w), &r) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.rho.values)
        {
            acc += w * bare::kernel_prime(lambda - m, c) * r;
        }
        acc
    }

    /// eps''(lambda).
    pub fn eps_second(&self, lambda: f64) -> f64 {
        let c = self.params.c;
        let mut acc = 0.0;
        for ((&m, &w), &e) in self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.eps.values)
        {
            acc += w * bare::kernel_second(lambda - m, c) * e;
        }
        2.0 + acc / (2.0 * PI)
    }

    /// Sound velocity v(lambda) = eps'(lambda) / p'(lambda).
    pub fn sound_velocity(&self, lambda: f64) -> f64 {
        self.eps_prime(lambda) / self.p_prime(lambda)
    }

    /// Dressed phase phi(lambda, nu); one Nystrom solve per distinct nu,
    /// memoized.
    pub fn phi(&self, lambda: f64, nu: f64) -> Result<f64> {
        let sf = self.phi_solution(nu)?;
        let c = self.params.c;
        if lambda.abs() < self.q {
            Ok(sf.eval(lambda))
        } else {
            Ok(nystrom_extend(
                &sf,
                |l, m| self.kernel(l - m),
                |l| bare::theta(l - nu, c) / (2.0 * PI),
                lambda,
            ))
        }
    }

    /// The full sampled phi(., nu) on the Fermi zone.
    pub fn phi_solution(&self, nu: f64) -> Result<Arc<SampledFunction>> {
        let key = nu.to_bits();
        if let Some(sf) = self.phi_cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(sf));
        }
        let c = self.params.c;
        let sf = Arc::new(solve_fredholm(
            |l, m| self.kernel(l - m),
            |l| bare::theta(l - nu, c) / (2.0 * PI),
            &self.grid,
        )?);
        self.phi_cache
            .lock()
            .unwrap()
            .insert(key, Arc::clone(&sf));
        Ok(sf)
    }

    /// Thermodynamic counting function xi(lambda) = p(lambda)/(2 pi) + D/2.
    pub fn counting(&self, lambda: f64) -> f64 {
        self.p_at(lambda) / (2.0 * PI) + self.density / 2.0
    }

    /// Inverse of the counting function (monotone; expanding bracket).
    pub fn counting_inverse(&self, xi: f64) -> Result<f64> {
        let mut lo = -self.q;
        let mut hi = self.q;
        let mut grow = self.q.max(1.0);
        while self.counting(lo) > xi {
            lo -= grow;
            grow *= 2.0;
            if !lo.is_finite() {
                return Err(Error::Solver("counting_inverse bracket failed".into()));
            }
        }
        grow = self.q.max(1.0);
        while self.counting(hi) < xi {
            hi += grow;
            grow *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Solver("counting_inverse bracket failed".into()));
            }
        }
        let flo = self.counting(lo) - xi;
        bisect(lo, hi, flo, &mut |l| Ok(self.counting(l) - xi))
    }

    /// Shift function solved from its integral equation, for Delta N and the
    /// macroscopic particle/hole rapidities.
    pub fn shift_function(
        &self,
        delta_n: i32,
        particles: &[f64],
        holes: &[f64],
    ) -> Result<SampledFunction> {
        let c = self.params.c;
        let q = self.q;
        let dn = delta_n as f64;
        let rhs = move |l: f64| {
            let mut v = -dn / 2.0 * (1.0 + bare::theta(l - q, c) / PI);
            for &mp in particles {
                v -= bare::theta(l - mp, c) / (2.0 * PI);
            }
            for &mh in holes {
                v += bare::theta(l - mh, c) / (2.0 * PI);
            }
            v
        };
        solve_fredholm(|l, m| self.kernel(l - m), rhs, &self.grid)
    }

    /// Shift function in closed form, built from the dressed charge and
    /// dressed phase.
    pub fn shift_closed(
        &self,
        lambda: f64,
        delta_n: i32,
        particles: &[f64],
        holes: &[f64],
    ) -> Result<f64> {
        let dn = delta_n as f64;
        let mut v = -dn * (self.z_at(lambda) / 2.0 + self.phi(lambda, self.q)?);
        for &mp in particles {
            v -= self.phi(lambda, mp)?;
        }
        for &mh in holes {
            v += self.phi(lambda, mh)?;
        }
        Ok(v)
    }

    /// Residuals of the exact identities between the dressed quantities.
    pub fn verify_identities(&self) -> Result<IdentityReport> {
        let q = self.q;
        let n = self.grid.len();
        let mut z_phi1 = 0.0_f64;
        for (i, &l) in self.grid.nodes.iter().enumerate() {
            let r = self.zch.values[i] - 1.0 - self.phi(l, -q)? + self.phi(l, q)?;
            z_phi1 = z_phi1.max(r.abs());
        }
        let z_inv = 1.0 / self.z_fermi;
        let z_phi2_right = (z_inv - (1.0 - self.phi(q, -q)? - self.phi(q, q)?)).abs();
        let z_phi2_left = (z_inv - (1.0 + self.phi(-q, q)? + self.phi(-q, -q)?)).abs();
        let eps_boundary = self.eps_at(q).abs().max(self.eps_at(-q).abs());
        let mut rho_even = 0.0_f64;
        let mut p_odd = 0.0_f64;
        for i in 0..n {
            rho_even = rho_even.max((self.rho.values[i] - self.rho.values[n - 1 - i]).abs());
            p_odd = p_odd.max((self.pmom.values[i] + self.pmom.values[n - 1 - i]).abs());
        }
        let mut p_prime_vs_rho = 0.0_f64;
        for (i, &l) in self.grid.nodes.iter().enumerate() {
            p_prime_vs_rho =
                p_prime_vs_rho.max((self.p_prime(l) - 2.0 * PI * self.rho.values[i]).abs());
        }
        Ok(IdentityReport {
            z_phi1,
            z_phi2_right,
            z_phi2_left,
            eps_boundary,
            rho_even,
            p_odd,
            p_prime_vs_rho,
        })
    }

    /// Numerically verify v'(lambda) > 0 on [lo, hi] with a uniform scan.
    ///
    /// The monotonicity of the sound velocity is an assumption of all
    /// exponent formulas; it is checked per state, not taken for granted.
    pub fn verify_velocity_monotone(&self, lo: f64, hi: f64, n_points: usize) -> Result<()> {
        let mut prev_l = lo;
        let mut prev_v = self.sound_velocity(lo);
        for k in 1..n_points {
            let l = lo + (hi - lo) * k as f64 / (n_points - 1) as f64;
            let v = self.sound_velocity(l);
            if v <= prev_v {
                return Err(Error::VelocityNotMonotone {
                    lambda: 0.5 * (prev_l + l),
                    vprime: (v - prev_v) / (l - prev_l),
                });
            }
            prev_l = l;
            prev_v = v;
        }
        Ok(())
    }

    /// Serializable snapshot (versioned).
    pub fn snapshot(&self) -> ThermoSnapshot {
        ThermoSnapshot {
            schema: SCHEMA_VERSION.to_string(),
            params: self.params,
            q: self.q,
            nodes: self.grid.nodes.clone(),
            weights: self.grid.weights.clone(),
            rho: self.rho.values.clone(),
            eps: self.eps.values.clone(),
            pmom: self.pmom.values.clone(),
            zch: self.zch.values.clone(),
            density: self.density,
            k_f: self.k_f,
            v_f: self.v_f,
            z_fermi: self.z_fermi,
        }
    }

    /// Rebuild a state from a snapshot (fresh dressed-phase cache).
    pub fn from_snapshot(s: &ThermoSnapshot) -> Result<ThermoState> {
        if s.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema '{}', expected '{SCHEMA_VERSION}'",
                s.schema
            )));
        }
        let grid = Arc::new(QuadGrid {
            a: -s.q,
            b: s.q,
            nodes: s.nodes.clone(),
            weights: s.weights.clone(),
        });
        Ok(ThermoState {
            params: s.params,
            q: s.q,
            rho: SampledFunction::new(Arc::clone(&grid), s.rho.clone()),
            eps: SampledFunction::new(Arc::clone(&grid), s.eps.clone()),
            pmom: SampledFunction::new(Arc::clone(&grid), s.pmom.clone()),
            zch: SampledFunction::new(Arc::clone(&grid), s.zch.clone()),
            grid,
            density: s.density,
            k_f: s.k_f,
            v_f: s.v_f,
            z_fermi: s.z_fermi,
            phi_cache: Mutex::new(HashMap::new()),
        })
    }
}

pub const SCHEMA_VERSION: &str = "critical-ff/1";

/// JSON-serializable form of [`ThermoState`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThermoSnapshot {
    pub schema: String,
    pub params: ModelParams,
    pub q: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub rho: Vec<f64>,
    pub eps: Vec<f64>,
    pub pmom: Vec<f64>,
    pub zch: Vec<f64>,
    pub density: f64,
    pub k_f: f64,
    pub v_f: f64,
    pub z_fermi: f64,
}
