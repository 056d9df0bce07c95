//! Discrete TG transform between nodal samples and modal coefficients,
//! interpolant evaluation, and interpolation stability diagnostics.

use crate::special::gamma;
use crate::tgbasis::{tg_eval_series, TGGrid};
use crate::{Error, Result};

/// Interpolant through the grid nodes, stored as modal coefficients.
#[derive(Debug, Clone)]
pub struct TGInterpolant {
    pub grid: TGGrid,
    pub coeffs: Vec<f64>,
}

impl TGInterpolant {
    /// Evaluates the modal expansion at `t`.
    pub fn evaluate(&self, t: f64) -> f64 {
        let n = self.grid.n();
        let basis = tg_eval_series(self.grid.map, self.grid.alpha(), n, t);
        self.coeffs.iter().zip(&basis).map(|(c, g)| c * g).sum()
    }
}

/// Stability diagnostics for a sample vector on a grid.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// `sqrt(sum samples_j^2 w_j)`, the discrete weighted L2 norm of the
    /// interpolant.
    pub discrete_l2w_norm: f64,
    /// Max of `|samples_j|`, a nodal proxy for the sup norm.
    pub sup_norm: f64,
    pub ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
}

/// Computes the modal coefficients of the interpolant through the given
/// nodal samples.
///
/// The denominator is the discrete norm of each basis function rather
/// than the analytic normalization constant, so the interpolation
/// condition holds even when round-off makes the two differ at the top
/// degree.
pub fn forward_transform(grid: &TGGrid, samples: &[f64]) -> Result<TGInterpolant> {
    let n = grid.n();
    if samples.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} samples, got {}",
            n + 1,
            samples.len()
        )));
    }
    let basis: Vec<Vec<f64>> = grid
        .t_nodes
        .iter()
        .map(|&t| tg_eval_series(grid.map, grid.alpha(), n, t))
        .collect();
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..=n {
            let g = basis[j][k];
            let w = grid.rule.weights[j];
            num += samples[j] * g * w;
            den += g * g * w;
        }
        coeffs.push(num / den);
    }
    Ok(TGInterpolant {
        grid: grid.clone(),
        coeffs,
    })
}

/// Discrete-norm stability check against the interpolation stability
/// bounds: `sqrt(pi)` for `alpha >= 0`, and
/// `Gamma(alpha + 1/2) / (sqrt(2) n^(1/2 + alpha))` for negative indices.
pub fn stability_report(grid: &TGGrid, samples: &[f64]) -> StabilityReport {
    let norm_sq: f64 = samples
        .iter()
        .zip(&grid.rule.weights)
        .map(|(s, w)| s * s * w)
        .sum();
    let discrete_l2w_norm = norm_sq.sqrt();
    let sup_norm = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let a = grid.alpha().value();
    let n = grid.n() as f64;
    let bound = if a >= 0.0 {
        std::f64::consts::PI.sqrt()
    } else {
        gamma(a + 0.5) / (2f64.sqrt() * n.powf(0.5 + a))
    };
    let ratio = if sup_norm > 0.0 {
        discrete_l2w_norm / sup_norm
    } else {
        0.0
    };
    StabilityReport {
        discrete_l2w_norm,
        sup_norm,
        ratio,
        bound,
        within_bound: discrete_l2w_norm <= bound * sup_norm * 1.01,
    }
}
