//! Classical Gegenbauer polynomials on `[-1, 1]` with the normalization
//! `G_n(1) = 1`, their Gauss rules, normalization constants, and
//! Christoffel-number bounds.

use crate::special::{gamma, ln_gamma};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gegenbauer index `alpha`, restricted to the open half line
/// `alpha > -1/2` where the weight `(1 - x^2)^(alpha - 1/2)` is integrable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerIndex(f64);

impl GegenbauerIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > -0.5 {
            Ok(Self(alpha))
        } else {
            Err(Error::IndexOutOfRange(alpha))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Gegenbauer-Gauss rule with `n + 1` points: the nodes are the zeros of
/// `G_{n+1}`, stored in ascending order.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub alpha: GegenbauerIndex,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Normalization constants `lambda_0 .. lambda_n`.
    pub lambdas: Vec<f64>,
}

/// Evaluates `[G_0(x), ..., G_n(x)]` by the three-term recurrence.
pub fn eval_series(alpha: GegenbauerIndex, n: usize, x: f64) -> Vec<f64> {
    let a = alpha.value();
    let mut g = Vec::with_capacity(n + 1);
    g.push(1.0);
    if n == 0 {
        return g;
    }
    g.push(x);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 * (kf + a) * x * g[k] - kf * g[k - 1]) / (kf + 2.0 * a);
        g.push(next);
    }
    g
}

/// Evaluates the series together with first derivatives, used by the
/// Newton refinement of the Gauss nodes.
fn eval_series_with_derivative(alpha: GegenbauerIndex, n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let a = alpha.value();
    let mut g = Vec::with_capacity(n + 1);
    let mut d = Vec::with_capacity(n + 1);
    g.push(1.0);
    d.push(0.0);
    if n == 0 {
        return (g, d);
    }
    g.push(x);
    d.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let denom = kf + 2.0 * a;
        let next = (2.0 * (kf + a) * x * g[k] - kf * g[k - 1]) / denom;
        let dnext = (2.0 * (kf + a) * (g[k] + x * d[k]) - kf * d[k - 1]) / denom;
        g.push(next);
        d.push(dnext);
    }
    (g, d)
}

/// Normalization constant `lambda_j`, the weighted L2 norm-squared of
/// `G_j`. Computed through log-Gamma differences so that large `j` does
/// not overflow.
pub fn lambda_norm(alpha: GegenbauerIndex, j: usize) -> f64 {
    let a = alpha.value();
    if j == 0 {
        // lambda_0 = sqrt(pi) Gamma(alpha + 1/2) / Gamma(alpha + 1),
        // the integral of the bare weight over (-1, 1). The generic
        // expression below is 0/0 here when alpha <= 0.
        return SQRT_PI * (ln_gamma(a + 0.5) - ln_gamma(a + 1.0)).exp();
    }
    let jf = j as f64;
    let ln = (2.0 * a - 1.0) * std::f64::consts::LN_2
        + ln_gamma(jf + 1.0)
        + 2.0 * ln_gamma(a + 0.5)
        - (jf + a).ln()
        - ln_gamma(jf + 2.0 * a);
    ln.exp()
}

/// Builds the `n + 1`-point Gegenbauer-Gauss rule.
///
/// Nodes are the eigenvalues of the symmetric Jacobi matrix of the
/// weight (so no root can be missed or duplicated), polished with Newton
/// iterations on the recurrence; symmetry about the origin is restored
/// exactly afterwards.
pub fn gauss_rule(alpha: GegenbauerIndex, n: usize) -> Result<GaussRule> {
    let lambdas: Vec<f64> = (0..=n).map(|j| lambda_norm(alpha, j)).collect();
    if n == 0 {
        // G_1(x) = x, so the single node is the origin.
        return Ok(GaussRule {
            alpha,
            n,
            nodes: vec![0.0],
            weights: vec![lambdas[0]],
            lambdas,
        });
    }

    let a = alpha.value();
    let degree = n + 1;
    // Monic three-term recurrence coefficients beta_k of the weight
    // (1 - x^2)^(alpha - 1/2); the diagonal vanishes by symmetry.
    let beta = |k: usize| -> f64 {
        let kf = k as f64;
        if k == 1 {
            // The generic expression is 0/0 at (k, alpha) = (1, 0).
            1.0 / (2.0 * (a + 1.0))
        } else {
            kf * (kf + 2.0 * a - 1.0) / (4.0 * (kf + a) * (kf + a - 1.0))
        }
    };
    let mut jacobi = nalgebra::DMatrix::<f64>::zeros(degree, degree);
    for k in 1..degree {
        let b = beta(k).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigen().eigenvalues.iter().cloned().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    for (j, x) in nodes.iter_mut().enumerate() {
        let mut step = f64::INFINITY;
        for _ in 0..20 {
            let (g, d) = eval_series_with_derivative(alpha, degree, *x);
            step = g[degree] / d[degree];
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        // `step` may be NaN if the derivative vanished; treat that as
        // non-convergence too.
        if step.abs() > 1e-10 || step.is_nan() || !x.is_finite() {
            return Err(Error::RootConvergence { degree, index: j });
        }
    }

    // Symmetry x_j = -x_{n-j} is analytically exact; restore it to remove
    // refinement drift.
    for j in 0..=(n / 2) {
        let k = n - j;
        if j == k {
            nodes[j] = 0.0;
        } else {
            let s = 0.5 * (nodes[j] - nodes[k]);
            nodes[j] = s;
            nodes[k] = -s;
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let g = eval_series(alpha, n, x);
            let denom: f64 = g.iter().zip(&lambdas).map(|(gk, lk)| gk * gk / lk).sum();
            1.0 / denom
        })
        .collect();
    for j in 0..=(n / 2) {
        let k = n - j;
        let w = 0.5 * (weights[j] + weights[k]);
        weights[j] = w;
        weights[k] = w;
    }

    Ok(GaussRule {
        alpha,
        n,
        nodes,
        weights,
        lambdas,
    })
}

/// Upper bound on the Christoffel numbers of the `n + 1`-point rule:
/// `pi / (n + 1)` for `alpha >= 0` and
/// `Gamma(alpha + 1/2)^2 / (2 n^(1 + 2 alpha))` for `-1/2 < alpha < 0`.
pub fn christoffel_bound(alpha: GegenbauerIndex, n: usize) -> f64 {
    let a = alpha.value();
    if a >= 0.0 {
        std::f64::consts::PI / (n as f64 + 1.0)
    } else {
        let g = gamma(a + 0.5);
        g * g / (2.0 * (n as f64).powf(1.0 + 2.0 * a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn idx(a: f64) -> GegenbauerIndex {
        GegenbauerIndex::new(a).unwrap()
    }

    #[test]
    fn index_rejects_lower_half() {
        assert!(GegenbauerIndex::new(-0.5).is_err());
        assert!(GegenbauerIndex::new(-1.0).is_err());
        assert!(GegenbauerIndex::new(f64::NAN).is_err());
        assert!(GegenbauerIndex::new(-0.49).is_ok());
    }

    #[test]
    fn series_is_one_at_right_endpoint() {
        let g = eval_series(idx(0.7), 5, 1.0);
        for v in g {
            assert_relative_eq!(v, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn chebyshev_case_matches_cosine_closed_form() {
        // alpha = 0 reduces to Chebyshev: G_k(x) = cos(k arccos x).
        let g = eval_series(idx(0.0), 2, 0.5);
        assert_relative_eq!(g[0], 1.0);
        assert_relative_eq!(g[1], 0.5);
        assert_relative_eq!(g[2], -0.5, max_relative = 1e-14);
        for k in 0..=6 {
            let x: f64 = 0.3;
            let series = eval_series(idx(0.0), 6, x);
            assert_relative_eq!(series[k], (k as f64 * x.acos()).cos(), epsilon = 1e-13);
        }
    }

    #[test]
    fn legendre_case_at_origin() {
        let g = eval_series(idx(0.5), 2, 0.0);
        assert_relative_eq!(g[0], 1.0);
        assert_relative_eq!(g[1], 0.0);
        assert_relative_eq!(g[2], -0.5, max_relative = 1e-14);
    }

    #[test]
    fn lambda_chebyshev_values() {
        assert_relative_eq!(lambda_norm(idx(0.0), 0), PI, max_relative = 1e-13);
        assert_relative_eq!(lambda_norm(idx(0.0), 3), PI / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn lambda_legendre_closed_form() {
        // alpha = 1/2 gives lambda_j = 2 / (2j + 1).
        for j in 0..20 {
            assert_relative_eq!(
                lambda_norm(idx(0.5), j),
                2.0 / (2.0 * j as f64 + 1.0),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(lambda_norm(idx(0.5), 4), 2.0 / 9.0, max_relative = 1e-13);
    }

    #[test]
    fn lambda_monotonicity() {
        // Strictly decreasing in j for alpha > 0. For -1/2 < alpha < 0
        // the constants grow like j^(-2 alpha) from j = 1 on (lambda_0,
        // the mass of the weight, is larger than lambda_1).
        for &a in &[0.3, 0.5, 2.0] {
            for j in 0..100 {
                assert!(lambda_norm(idx(a), j + 1) < lambda_norm(idx(a), j));
            }
        }
        for &a in &[-0.45, -0.2, -0.05] {
            assert!(lambda_norm(idx(a), 1) < lambda_norm(idx(a), 0));
            for j in 1..100 {
                assert!(lambda_norm(idx(a), j + 1) > lambda_norm(idx(a), j));
            }
        }
    }

    #[test]
    fn two_point_chebyshev_rule() {
        let r = gauss_rule(idx(0.0), 1).unwrap();
        let c = 1.0 / 2f64.sqrt();
        assert_relative_eq!(r.nodes[0], -c, max_relative = 1e-14);
        assert_relative_eq!(r.nodes[1], c, max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], PI / 2.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights[1], PI / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn two_point_legendre_rule() {
        let r = gauss_rule(idx(0.5), 1).unwrap();
        let c = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -c, max_relative = 1e-13);
        assert_relative_eq!(r.nodes[1], c, max_relative = 1e-13);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights[1], 1.0, max_relative = 1e-13);
    }

    #[test]
    fn degenerate_single_point_rule() {
        let r = gauss_rule(idx(1.3), 0).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_relative_eq!(r.weights[0], lambda_norm(idx(1.3), 0), max_relative = 1e-14);
    }

    #[test]
    fn rule_symmetry_and_weight_sum() {
        let r = gauss_rule(idx(1.3), 7).unwrap();
        let n = r.n;
        for j in 0..=n {
            assert_relative_eq!(r.nodes[j], -r.nodes[n - j], epsilon = 1e-12);
            assert_relative_eq!(r.weights[j], r.weights[n - j], epsilon = 1e-12);
            assert!(r.weights[j] > 0.0);
            assert!(r.nodes[j] > -1.0 && r.nodes[j] < 1.0);
        }
        let sum: f64 = r.weights.iter().sum();
        assert_relative_eq!(sum, r.lambdas[0], max_relative = 1e-10);
    }

    #[test]
    fn nodes_strictly_increasing() {
        for &a in &[-0.45, -0.2, 0.0, 0.5, 2.0, 5.0] {
            let r = gauss_rule(idx(a), 20).unwrap();
            for j in 0..20 {
                assert!(r.nodes[j] < r.nodes[j + 1]);
            }
        }
    }

    /// Independent oracle: the moment integral
    /// `int_{-1}^{1} x^m (1 - x^2)^(alpha - 1/2) dx` in closed Beta form.
    fn moment_oracle(a: f64, m: usize) -> f64 {
        if m % 2 == 1 {
            return 0.0;
        }
        let p = (m as f64 + 1.0) / 2.0;
        let q = a + 0.5;
        (ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)).exp()
    }

    #[test]
    fn gauss_exactness_on_monomials() {
        for &a in &[-0.3, 0.0, 0.5, 1.7] {
            for n in 0..=12usize {
                let r = gauss_rule(idx(a), n).unwrap();
                for m in 0..=(2 * n + 1) {
                    let approx: f64 = r
                        .nodes
                        .iter()
                        .zip(&r.weights)
                        .map(|(x, w)| w * x.powi(m as i32))
                        .sum();
                    let exact = moment_oracle(a, m);
                    if m % 2 == 1 {
                        assert!(approx.abs() < 1e-10, "odd moment not zero: {approx}");
                    } else {
                        assert_relative_eq!(approx, exact, max_relative = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_bound_formulas() {
        assert_relative_eq!(christoffel_bound(idx(1.0), 100), PI / 101.0);
        assert_relative_eq!(christoffel_bound(idx(0.0), 9), PI / 10.0);
        // Gamma(0.25)^2 / 20
        let g = gamma(0.25);
        assert_relative_eq!(
            christoffel_bound(idx(-0.25), 100),
            g * g / 20.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bound_validity_at_n_100() {
        for &a in &[0.0, 0.5, 1.0, 5.0] {
            let r = gauss_rule(idx(a), 100).unwrap();
            let bound = christoffel_bound(idx(a), 100);
            let max_w = r.weights.iter().cloned().fold(0.0, f64::max);
            assert!(max_w <= 1.05 * bound, "alpha={a}: {max_w} > 1.05*{bound}");
        }
        for &a in &[-0.4, -0.3, -0.2] {
            let r = gauss_rule(idx(a), 100).unwrap();
            let bound = christoffel_bound(idx(a), 100);
            let max_w = r.weights.iter().cloned().fold(0.0, f64::max);
            assert!(max_w <= bound, "alpha={a}: {max_w} > {bound}");
        }
    }

    proptest! {
        #[test]
        fn recurrence_residual_is_small(x in -1.0f64..1.0, ai in 0usize..5) {
            let alphas = [-0.45, -0.2, 0.0, 0.5, 2.0];
            let a = alphas[ai];
            let g = eval_series(idx(a), 50, x);
            for k in 1..50usize {
                let kf = k as f64;
                let lhs = (kf + 2.0 * a) * g[k + 1];
                let rhs = 2.0 * (kf + a) * x * g[k] - kf * g[k - 1];
                prop_assert!((lhs - rhs).abs() <= 1e-11);
            }
        }
    }
}
