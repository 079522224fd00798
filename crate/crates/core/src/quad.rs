//! Gauss-Legendre quadrature, sampled-function representation with global
//! barycentric interpolation, and a Nystrom solver for Fredholm equations of
//! the second kind,
//!
//!   f(lambda) - (1/2pi) int_a^b kernel(lambda, mu) f(mu) dmu = rhs(lambda).

use crate::error::{Error, Result};
use crate::linalg::{solve_checked, Matrix};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Condition-estimate threshold for the Nystrom linear system.
pub const COND_LIMIT: f64 = 1e12;

/// Quadrature nodes and weights on an interval [a, b].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadGrid {
    pub a: f64,
    pub b: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a function against the quadrature weights.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrate sampled values (one per node).
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

/// Gauss-Legendre rule with n nodes on [a, b].
///
/// Exact for polynomials up to degree 2n - 1.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadGrid> {
    if n == 0 {
        return Err(Error::Argument("gauss_legendre requires n >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::Argument(format!(
            "gauss_legendre requires a < b, got [{a}, {b}]"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // map [-1, 1] -> [a, b]
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    Ok(QuadGrid { a, b, nodes, weights })
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A function known at the grid nodes, evaluated off-grid by global
/// barycentric interpolation.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub grid: Arc<QuadGrid>,
    pub values: Vec<f64>,
    bary: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Arc<QuadGrid>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len());
        let bary = barycentric_weights(&grid.nodes, grid.a, grid.b);
        SampledFunction { grid, values, bary }
    }

    pub fn from_fn(grid: Arc<QuadGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Barycentric evaluation; node hits return the stored value exactly.
    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &fj), &wj) in self
            .grid
            .nodes
            .iter()
            .zip(&self.values)
            .zip(&self.bary)
        {
            let dx = x - xj;
            if dx == 0.0 {
                return fj;
            }
            let t = wj / dx;
            num += t * fj;
            den += t;
        }
        num / den
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }
}

/// Scaled barycentric weights w_j = prod_k C / (x_j - x_k), with the capacity
/// C = (b - a) / 4 keeping the products in range for n ~ hundreds.
fn barycentric_weights(nodes: &[f64], a: f64, b: f64) -> Vec<f64> {
    let cap = 0.25 * (b - a);
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut w = 1.0;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    w *= cap / (xj - xk);
                }
            }
            w
        })
        .collect()
}

/// Nystrom solution of the second-kind Fredholm equation on the grid.
///
/// The off-node rule of the returned [`SampledFunction`] is barycentric; the
/// Nystrom extension itself is available through [`nystrom_extend`].
pub fn solve_fredholm(
    kernel: impl Fn(f64, f64) -> f64,
    rhs: impl Fn(f64) -> f64,
    grid: &Arc<QuadGrid>,
) -> Result<SampledFunction> {
    let n = grid.len();
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        let xi = grid.nodes[i];
        for j in 0..n {
            let v = -grid.weights[j] * kernel(xi, grid.nodes[j]) / (2.0 * PI);
            a.set(i, j, v + if i == j { 1.0 } else { 0.0 });
        }
    }
    let b: Vec<f64> = grid.nodes.iter().map(|&x| rhs(x)).collect();
    let f = solve_checked(&a, &b, COND_LIMIT)?;
    Ok(SampledFunction::new(Arc::clone(grid), f))
}

/// Nystrom extension of a solved Fredholm equation: evaluates the defining
/// relation at an arbitrary point using the interior solution.
pub fn nystrom_extend(
    solution: &SampledFunction,
    kernel: impl Fn(f64, f64) -> f64,
    rhs: impl Fn(f64) -> f64,
    x: f64,
) -> f64 {
    let g = &solution.grid;
    let mut acc = 0.0;
    for ((&xj, &wj), &fj) in g.nodes.iter().zip(&g.weights).zip(&solution.values) {
        acc += wj * kernel(x, xj) * fj;
    }
    rhs(x) + acc / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_point_rule_is_midpoint() {
        let g = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_relative_eq!(g.nodes[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_classical_values() {
        let g = gauss_legendre(2, -1.0, 1.0).unwrap();
        let r = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(g.nodes[0], -r, epsilon = 1e-14);
        assert_relative_eq!(g.nodes[1], r, epsilon = 1e-14);
        assert_relative_eq!(g.weights[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.weights[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_exactness() {
        let g = gauss_legendre(64, 0.0, 1.0).unwrap();
        assert_relative_eq!(g.integrate(|x| x.powi(5)), 1.0 / 6.0, epsilon = 1e-14);
        // degree 2n-1 exactness at small n
        let g3 = gauss_legendre(3, -1.0, 1.0).unwrap();
        assert_relative_eq!(g3.integrate(|x| x.powi(4)), 2.0 / 5.0, epsilon = 1e-13);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 7, 64, 128, 256] {
            let g = gauss_legendre(n, -2.5, 4.0).unwrap();
            let sum: f64 = g.weights.iter().sum();
            assert_relative_eq!(sum, 6.5, epsilon = 1e-13 * 6.5);
            for w in &g.nodes {
                assert!(*w > -2.5 && *w < 4.0);
            }
            for k in 1..g.len() {
                assert!(g.nodes[k] > g.nodes[k - 1]);
            }
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(gauss_legendre(0, -1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn barycentric_exact_at_nodes_and_for_polynomials() {
        let grid = Arc::new(gauss_legendre(24, -1.0, 2.0).unwrap());
        let f = SampledFunction::from_fn(Arc::clone(&grid), |x| {
            1.0 + x - 0.5 * x.powi(3) + x.powi(7)
        });
        for (&x, &v) in grid.nodes.iter().zip(&f.values) {
            assert_eq!(f.eval(x), v);
        }
        for k in 0..40 {
            let x = -1.0 + 3.0 * k as f64 / 39.0;
            let exact = 1.0 + x - 0.5 * x.powi(3) + x.powi(7);
            assert_relative_eq!(f.eval(x), exact, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn fredholm_identity_operator() {
        let grid = Arc::new(gauss_legendre(32, -1.0, 1.0).unwrap());
        let f = solve_fredholm(|_, _| 0.0, |x| x.cos(), &grid).unwrap();
        for (&x, &v) in grid.nodes.iter().zip(&f.values) {
            assert_relative_eq!(v, x.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn fredholm_huge_coupling_kernel_vanishes() {
        // Lorentzian kernel K(l - m) = 2c / ((l - m)^2 + c^2) with c = 1e6:
        // the solution stays within ~2/c of the rhs.
        let c = 1e6;
        let grid = Arc::new(gauss_legendre(64, -1.0, 1.0).unwrap());
        let f = solve_fredholm(
            |l, m| 2.0 * c / ((l - m).powi(2) + c * c),
            |_| 1.0 / (2.0 * PI),
            &grid,
        )
        .unwrap();
        for &v in &f.values {
            assert_relative_eq!(v, 1.0 / (2.0 * PI), epsilon = 1e-6);
        }
    }

    #[test]
    fn fredholm_rank_one_kernel_analytic() {
        // kernel(l, m) = l m on [0, 1], rhs = l  =>  f(l) = l / (1 - 1/(6 pi)).
        let grid = Arc::new(gauss_legendre(32, 0.0, 1.0).unwrap());
        let f = solve_fredholm(|l, m| l * m, |x| x, &grid).unwrap();
        let scale = 1.0 / (1.0 - 1.0 / (6.0 * PI));
        for (&x, &v) in grid.nodes.iter().zip(&f.values) {
            assert_relative_eq!(v, scale * x, epsilon = 1e-10);
        }
    }

    #[test]
    fn fredholm_collocation_residual() {
        let c = 1.0;
        let grid = Arc::new(gauss_legendre(96, -1.0, 1.0).unwrap());
        let kernel = |l: f64, m: f64| 2.0 * c / ((l - m).powi(2) + c * c);
        let rhs = |_: f64| 1.0 / (2.0 * PI);
        let f = solve_fredholm(kernel, rhs, &grid).unwrap();
        let max_rhs = 1.0 / (2.0 * PI);
        for (i, &xi) in grid.nodes.iter().enumerate() {
            let integral: f64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .zip(&f.values)
                .map(|((&xj, &wj), &fj)| wj * kernel(xi, xj) * fj)
                .sum();
            let resid = f.values[i] - integral / (2.0 * PI) - rhs(xi);
            assert!(resid.abs() <= 1e-12 * max_rhs, "residual {resid}");
        }
    }

    #[test]
    fn nystrom_convergence_on_lorentzian() {
        // Doubling n reduces deviation from a 4n reference by >= 10x.
        let c = 0.25;
        let kernel = |l: f64, m: f64| 2.0 * c / ((l - m).powi(2) + c * c);
        let rhs = |_: f64| 1.0 / (2.0 * PI);
        let solve_n = |n: usize| {
            let g = Arc::new(gauss_legendre(n, -1.0, 1.0).unwrap());
            solve_fredholm(kernel, rhs, &g).unwrap()
        };
        let reference = solve_n(64);
        let dev = |f: &SampledFunction| {
            f.grid
                .nodes
                .iter()
                .zip(&f.values)
                .map(|(&x, &v)| (v - reference.eval(x)).abs())
                .fold(0.0, f64::max)
        };
        let d8 = dev(&solve_n(8));
        let d16 = dev(&solve_n(16));
        assert!(d16 * 10.0 <= d8, "d8 = {d8}, d16 = {d16}");
    }

    #[test]
    fn even_kernel_even_rhs_gives_even_solution() {
        let c = 0.5;
        let grid = Arc::new(gauss_legendre(64, -1.5, 1.5).unwrap());
        let f = solve_fredholm(
            |l, m| 2.0 * c / ((l - m).powi(2) + c * c),
            |_| 1.0 / (2.0 * PI),
            &grid,
        )
        .unwrap();
        let n = grid.len();
        for i in 0..n {
            let asym = (f.values[i] - f.values[n - 1 - i]).abs();
            assert!(asym <= 1e-12, "asymmetry {asym}");
        }
    }

    #[test]
    fn fredholm_singular_system_rejected() {
        // kernel chosen so that I - K W is exactly singular on a 1-node grid:
        // 1 - w k / (2 pi) = 0 with w = 2 on [-1, 1].
        let grid = Arc::new(gauss_legendre(1, -1.0, 1.0).unwrap());
        let res = solve_fredholm(|_, _| PI, |_| 1.0, &grid);
        assert!(res.is_err());
    }
}
