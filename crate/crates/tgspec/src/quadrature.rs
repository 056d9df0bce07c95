//! Semi-infinite weighted quadrature, quadrature over `[0, t_j]` for each
//! grid node via the exponential change of variables, the associated
//! truncation-error bound, and the benchmark error sweeps.

use crate::special::ln_gamma;
use crate::tgbasis::{self, TGFamily, TGGrid, TGMap};
use crate::{gegenbauer::GegenbauerIndex, Error, Result};

/// The three benchmark integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralId {
    /// `exp(-t)`
    I1,
    /// `1 / (t^2 + 1)`
    I2,
    /// `arctan(t)`
    I3,
}

impl IntegralId {
    pub fn label(&self) -> &'static str {
        match self {
            IntegralId::I1 => "I1",
            IntegralId::I2 => "I2",
            IntegralId::I3 => "I3",
        }
    }

    pub fn integrand(&self) -> fn(f64) -> f64 {
        match self {
            IntegralId::I1 => |t| (-t).exp(),
            IntegralId::I2 => |t| 1.0 / (t * t + 1.0),
            IntegralId::I3 => f64::atan,
        }
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> fn(f64) -> f64 {
        match self {
            IntegralId::I1 => |t| -(-t).exp_m1(),
            IntegralId::I2 => f64::atan,
            IntegralId::I3 => |t| t * t.atan() - 0.5 * (t * t).ln_1p(),
        }
    }
}

/// One row of a quadrature error sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSweepRow {
    pub integral_id: IntegralId,
    pub family: TGFamily,
    pub alpha: f64,
    pub l: f64,
    pub n: usize,
    pub max_abs_error: f64,
    /// `log10(max(max_abs_error, 1e-17))`.
    pub max_log_error: f64,
}

/// Floor below which logarithmic errors saturate (round-off plateau).
pub const LOG_ERROR_FLOOR: f64 = 1e-17;

/// Quadrature of `f * w` over `[0, inf)`: the plain Gauss sum of nodal
/// samples. Exact to round-off when `f` lies in the TG span up to degree
/// `2n + 1`.
pub fn integrate_weighted(grid: &TGGrid, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&t, &w) in grid.t_nodes.iter().zip(&grid.rule.weights) {
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { t });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Quadrature of `f` over `[0, t_j]` via the substitution `t = t_j e^{-z}`.
pub fn integrate_to_node(grid: &TGGrid, f: impl Fn(f64) -> f64, j: usize) -> Result<f64> {
    let tj = grid.t_nodes[j];
    let mut acc = 0.0;
    for (&ek, &pk) in grid.e.iter().zip(&grid.p) {
        let t = tj * ek;
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { t });
        }
        acc += pk * v;
    }
    Ok(tj * acc)
}

/// Quadrature of `f` over `[0, t_j]` for every node at once.
pub fn integrate_to_all_nodes(grid: &TGGrid, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    (0..=grid.n()).map(|j| integrate_to_node(grid, &f, j)).collect()
}

/// Truncation-error bound for the node-`j` quadrature:
/// `prefactor(n, alpha) * t_j * deriv_bound`, where `deriv_bound` is a
/// caller-supplied bound on the `(2n + 2)`-th derivative of the
/// transformed integrand over `(-1, 1)`.
pub fn truncation_bound(grid: &TGGrid, j: usize, deriv_bound: f64) -> f64 {
    if deriv_bound == 0.0 {
        return 0.0;
    }
    let n = grid.n() as f64;
    let a = grid.alpha().value();
    let ln_pre = std::f64::consts::PI.ln()
        + (-4.0 * n - 2.0 * a - 1.0) * std::f64::consts::LN_2
        + (n + a + 1.0).ln()
        + ln_gamma(n + 2.0 * a + 1.0)
        - ln_gamma(2.0 * n + 3.0)
        - 2.0 * ln_gamma(n + a + 2.0);
    ln_pre.exp() * grid.t_nodes[j] * deriv_bound
}

/// Runs one benchmark integral at the given parameters and reports the
/// maximum absolute error over all node intervals.
pub fn benchmark_error(
    integral_id: IntegralId,
    family: TGFamily,
    alpha: f64,
    l: f64,
    n: usize,
) -> Result<QuadratureSweepRow> {
    let map = TGMap::new(family, l)?;
    let grid = tgbasis::build_grid(map, GegenbauerIndex::new(alpha)?, n)?;
    let approx = integrate_to_all_nodes(&grid, integral_id.integrand())?;
    let exact = grid
        .t_nodes
        .iter()
        .map(|&t| (integral_id.antiderivative())(t));
    let max_abs_error = approx
        .iter()
        .zip(exact)
        .map(|(q, e)| (q - e).abs())
        .fold(0.0, f64::max);
    Ok(QuadratureSweepRow {
        integral_id,
        family,
        alpha,
        l,
        n,
        max_abs_error,
        max_log_error: max_abs_error.max(LOG_ERROR_FLOOR).log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tgbasis::{build_grid, tg_eval_series};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn idx(a: f64) -> GegenbauerIndex {
        GegenbauerIndex::new(a).unwrap()
    }

    fn grid(family: TGFamily, a: f64, l: f64, n: usize) -> TGGrid {
        build_grid(TGMap::new(family, l).unwrap(), idx(a), n).unwrap()
    }

    #[test]
    fn constant_integrates_to_lambda_zero() {
        for g in [
            grid(TGFamily::Rational, 0.0, 0.5, 3),
            grid(TGFamily::Exponential, 0.0, 7.0, 10),
        ] {
            assert_relative_eq!(integrate_weighted(&g, |_| 1.0).unwrap(), PI, max_relative = 1e-12);
        }
    }

    #[test]
    fn basis_orthogonality_through_quadrature() {
        let g = grid(TGFamily::Exponential, 0.8, 2.0, 6);
        let map = g.map;
        let a = g.alpha();
        let g1 = integrate_weighted(&g, |t| tg_eval_series(map, a, 1, t)[1]).unwrap();
        assert!(g1.abs() < 1e-12);
        let g1sq = integrate_weighted(&g, |t| {
            let v = tg_eval_series(map, a, 1, t)[1];
            v * v
        })
        .unwrap();
        assert_relative_eq!(g1sq, g.rule.lambdas[1], max_relative = 1e-10);
    }

    #[test]
    fn exactness_for_basis_products() {
        // Products of basis functions with total degree <= 2n + 1.
        let g = grid(TGFamily::Rational, 0.3, 1.5, 5);
        let map = g.map;
        let a = g.alpha();
        for m in 0..=5usize {
            for k in 0..=5usize {
                let got = integrate_weighted(&g, |t| {
                    let s = tg_eval_series(map, a, 5, t);
                    s[m] * s[k]
                })
                .unwrap();
                let expect = if m == k { g.rule.lambdas[k] } else { 0.0 };
                assert_relative_eq!(got, expect, max_relative = 1e-10, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn node_integrals_match_antiderivatives() {
        // At a contracted scale every node interval is resolved to
        // round-off by n = 20.
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 20);
        let exp_int = integrate_to_all_nodes(&g, |t| (-t).exp()).unwrap();
        let atan_int = integrate_to_all_nodes(&g, |t| 1.0 / (1.0 + t * t)).unwrap();
        for j in 0..=20 {
            let t = g.t_nodes[j];
            assert!((exp_int[j] - (1.0 - (-t).exp())).abs() < 1e-12, "node {j}");
            // The complex poles of 1/(1+t^2) at +/-i cap the rate for the
            // largest node interval slightly above round-off.
            assert!((atan_int[j] - t.atan()).abs() < 1e-10, "node {j}");
        }
        // At a stretched scale the largest node interval maps the
        // integrand onto a steep profile, so accuracy there is limited;
        // small nodes stay sharp.
        let g = grid(TGFamily::Exponential, 0.5, 15.0, 20);
        let exp_int = integrate_to_all_nodes(&g, |t| (-t).exp()).unwrap();
        for j in 0..=20 {
            let t = g.t_nodes[j];
            let tol = if t < 1.0 { 1e-10 } else { 1e-2 };
            assert!((exp_int[j] - (1.0 - (-t).exp())).abs() < tol, "node {j}");
        }
        // Zero integrand gives exact zeros.
        for v in integrate_to_all_nodes(&g, |_| 0.0).unwrap() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn node_integrals_of_one_and_t() {
        let g = grid(TGFamily::Exponential, 0.5, 15.0, 20);
        let ones = integrate_to_all_nodes(&g, |_| 1.0).unwrap();
        let lin = integrate_to_all_nodes(&g, |t| t).unwrap();
        for j in 0..=20 {
            let t = g.t_nodes[j];
            assert_relative_eq!(ones[j], t, max_relative = 1e-6);
            assert_relative_eq!(lin[j], t * t / 2.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn all_nodes_is_bitwise_per_node() {
        let g = grid(TGFamily::Rational, -0.2, 3.0, 9);
        let f = |t: f64| (1.0 + t).ln() / (1.0 + t * t);
        let all = integrate_to_all_nodes(&g, f).unwrap();
        for j in 0..=9 {
            assert_eq!(all[j], integrate_to_node(&g, f, j).unwrap());
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 4);
        let err = integrate_weighted(&g, |t| if t > 0.5 { f64::NAN } else { 1.0 });
        assert!(matches!(err, Err(Error::NonFiniteIntegrand { .. })));
    }

    #[test]
    fn truncation_prefactor_closed_forms() {
        // n = 0, alpha = 1/2: prefactor is 1/3.
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 0);
        let t0 = g.t_nodes[0];
        assert_relative_eq!(truncation_bound(&g, 0, 2.0), 2.0 * t0 / 3.0, max_relative = 1e-12);
        assert_eq!(truncation_bound(&g, 0, 0.0), 0.0);
        // n = 0, alpha = 0: prefactor is pi/4.
        let g = grid(TGFamily::Rational, 0.0, 1.0, 0);
        let t0 = g.t_nodes[0];
        assert_relative_eq!(truncation_bound(&g, 0, 1.0), PI * t0 / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn benchmark_convergence_at_half() {
        // Contracted scale: spectral accuracy down to round-off by n = 20.
        let coarse = benchmark_error(IntegralId::I1, TGFamily::Exponential, 0.5, 1.0, 2).unwrap();
        let fine = benchmark_error(IntegralId::I1, TGFamily::Exponential, 0.5, 1.0, 20).unwrap();
        assert!(fine.max_abs_error <= 1e-12);
        assert!(coarse.max_log_error - fine.max_log_error >= 8.0);
    }

    #[test]
    fn benchmark_decay_at_stretched_scale() {
        // At L = 15 the error is dominated by the largest node interval,
        // which limits the achievable decay to a few decades by n = 20.
        let e2 = benchmark_error(IntegralId::I1, TGFamily::Exponential, 0.5, 15.0, 2)
            .unwrap()
            .max_log_error;
        let e20 = benchmark_error(IntegralId::I1, TGFamily::Exponential, 0.5, 15.0, 20)
            .unwrap()
            .max_log_error;
        assert!(e2 - e20 >= 2.5);
        assert!(e20 <= -3.0);
    }

    #[test]
    fn benchmark_monotone_decay_for_i3() {
        let mut prev = f64::INFINITY;
        let e2 = benchmark_error(IntegralId::I3, TGFamily::Exponential, 0.5, 15.0, 2)
            .unwrap()
            .max_log_error;
        let e20 = benchmark_error(IntegralId::I3, TGFamily::Exponential, 0.5, 15.0, 20)
            .unwrap()
            .max_log_error;
        assert!(e2 - e20 >= 3.0);
        for n in 2..=20 {
            let row = benchmark_error(IntegralId::I3, TGFamily::Exponential, 0.5, 15.0, n).unwrap();
            // Allow round-off level wiggle once on the plateau.
            assert!(row.max_log_error <= prev + 0.5, "n={n}");
            prev = row.max_log_error;
        }
    }

    #[test]
    fn extreme_small_scale_is_well_posed() {
        let row = benchmark_error(IntegralId::I2, TGFamily::Rational, 0.0, 1e-10, 2).unwrap();
        assert!(row.max_abs_error.is_finite() && row.max_abs_error >= 0.0);
        assert!(row.max_log_error >= -17.0);
    }

    #[test]
    fn small_scale_beats_unit_scale() {
        for id in [IntegralId::I1, IntegralId::I2, IntegralId::I3] {
            for family in [TGFamily::Rational, TGFamily::Exponential] {
                let tiny = benchmark_error(id, family, -0.2, 1e-10, 20).unwrap();
                let unit = benchmark_error(id, family, -0.2, 1.0, 20).unwrap();
                assert!(
                    tiny.max_abs_error <= unit.max_abs_error,
                    "{} {family:?}",
                    id.label()
                );
            }
        }
    }

    #[test]
    fn determinism() {
        let a = benchmark_error(IntegralId::I2, TGFamily::Rational, 0.4, 3.0, 15).unwrap();
        let b = benchmark_error(IntegralId::I2, TGFamily::Rational, 0.4, 3.0, 15).unwrap();
        assert_eq!(a.max_abs_error.to_bits(), b.max_abs_error.to_bits());
    }
}
