//! Mappings between the semi-infinite domain `[0, inf)` and `(-1, 1)`,
//! the transformed Gegenbauer (TG) basis functions they induce, and the
//! mapped Gauss grid with its integration vector.
//!
//! The rational map `(t - L)/(t + L)` gives the RG family; the
//! exponential map `1 - 2 exp(-t/L)` gives the EG family.

use crate::gegenbauer::{self, GaussRule, GegenbauerIndex};
use crate::{Error, Result};

use std::f64::consts::LN_2;

/// The two TG families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TGFamily {
    /// Rational Gegenbauer, algebraic map `(t - L)/(t + L)`.
    Rational,
    /// Exponential Gegenbauer, map `1 - 2 exp(-t/L)`.
    Exponential,
}

/// A domain mapping: family plus the positive scaling parameter `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGMap {
    pub family: TGFamily,
    l: f64,
}

impl TGMap {
    pub fn new(family: TGFamily, l: f64) -> Result<Self> {
        if l.is_finite() && l > 0.0 {
            Ok(Self { family, l })
        } else {
            Err(Error::DimensionMismatch(format!(
                "mapping scale must be positive, got {l}"
            )))
        }
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.l
    }
}

/// Mapped Gauss grid on `[0, inf)`: the images of the Gegenbauer-Gauss
/// nodes, their exponentials, and the integration vector used by the
/// node-interval quadratures.
#[derive(Debug, Clone)]
pub struct TGGrid {
    pub map: TGMap,
    pub rule: GaussRule,
    /// Mapped nodes `t_j`, strictly increasing.
    pub t_nodes: Vec<f64>,
    /// `E_j = exp(-t_j)`; may underflow to zero for very large nodes.
    pub e: Vec<f64>,
    /// Integration vector `P_k = w_k exp(-t_k) / w_tg(t_k)`.
    pub p: Vec<f64>,
}

impl TGGrid {
    #[inline]
    pub fn n(&self) -> usize {
        self.rule.n
    }

    #[inline]
    pub fn alpha(&self) -> GegenbauerIndex {
        self.rule.alpha
    }

    /// Quadrature weights divided by the TG weight function at the nodes,
    /// i.e. the row vector that turns nodal samples into the quadrature
    /// of an unweighted integrand over `[0, inf)`.
    pub fn plain_weights(&self) -> Vec<f64> {
        // w_j / w_tg(t_j) = w_j * exp(ln(e^{-t}/w_tg) + t)
        self.rule
            .weights
            .iter()
            .zip(&self.t_nodes)
            .map(|(&w, &t)| w * (ln_exp_weight_ratio(self.map, self.alpha().value(), t) + t).exp())
            .collect()
    }
}

/// `T(t)`: maps `[0, inf)` onto `[-1, 1)`.
pub fn forward_map(map: TGMap, t: f64) -> f64 {
    let l = map.l;
    match map.family {
        TGFamily::Rational => (t - l) / (t + l),
        TGFamily::Exponential => 1.0 - 2.0 * (-t / l).exp(),
    }
}

/// `T^{-1}(x)`: maps `[-1, 1)` back onto `[0, inf)`. `x = 1` is the image
/// of infinity and is rejected.
pub fn inverse_map(map: TGMap, x: f64) -> Result<f64> {
    if x >= 1.0 {
        return Err(Error::MapSingular);
    }
    let l = map.l;
    Ok(match map.family {
        TGFamily::Rational => l * (1.0 + x) / (1.0 - x),
        // ln(2/(1-x)) evaluated as ln 2 - ln1p(-x) to avoid cancellation
        // for x near zero.
        TGFamily::Exponential => l * (LN_2 - (-x).ln_1p()),
    })
}

/// `T'(t) > 0`.
pub fn map_derivative(map: TGMap, t: f64) -> f64 {
    let l = map.l;
    match map.family {
        TGFamily::Rational => 2.0 * l / ((t + l) * (t + l)),
        TGFamily::Exponential => 2.0 * (-t / l).exp() / l,
    }
}

/// Evaluates the TG basis `[C_0(t), ..., C_n(t)]`, defined as the
/// Gegenbauer series composed with the forward map.
pub fn tg_eval_series(map: TGMap, alpha: GegenbauerIndex, n: usize, t: f64) -> Vec<f64> {
    gegenbauer::eval_series(alpha, n, forward_map(map, t))
}

/// TG weight function `w(t)`. Singular at `t = 0` when `alpha < 1/2`.
pub fn tg_weight(map: TGMap, alpha: GegenbauerIndex, t: f64) -> Result<f64> {
    let a = alpha.value();
    if t <= 0.0 && a < 0.5 {
        return Err(Error::WeightSingular);
    }
    let l = map.l;
    Ok(match map.family {
        TGFamily::Rational => {
            4f64.powf(a) * l.powf(a + 0.5) * t.powf(a - 0.5) / (t + l).powf(2.0 * a + 1.0)
        }
        TGFamily::Exponential => {
            let u = (-t / l).exp();
            2.0 / l * u * (4.0 * u * (1.0 - u)).powf(a - 0.5)
        }
    })
}

/// Log of `exp(-t) / w(t)`, the per-node factor of the integration
/// vector. Kept in log space so that large rational-map nodes underflow
/// gracefully instead of producing 0/0.
fn ln_exp_weight_ratio(map: TGMap, a: f64, t: f64) -> f64 {
    let l = map.l;
    match map.family {
        TGFamily::Rational => {
            -t + (2.0 * a + 1.0) * (t + l).ln()
                - a * (4f64).ln()
                - (a + 0.5) * l.ln()
                - (a - 0.5) * t.ln()
        }
        TGFamily::Exponential => {
            // e^{-t}/w = (L/2) e^{-t} e^{t/L} [4 u (1-u)]^{1/2 - a},
            // u = e^{-t/L}; ln(1-u) = ln(-expm1(-t/L)).
            let s = t / l;
            let ln_one_minus_u = (-s).exp_m1().neg_ln();
            (l / 2.0).ln() - t + s + (0.5 - a) * ((4f64).ln() - s + ln_one_minus_u)
        }
    }
}

trait NegLn {
    fn neg_ln(self) -> f64;
}

impl NegLn for f64 {
    #[inline]
    fn neg_ln(self) -> f64 {
        (-self).ln()
    }
}

/// Builds the mapped grid for the given map, index, and mesh size.
pub fn build_grid(map: TGMap, alpha: GegenbauerIndex, n: usize) -> Result<TGGrid> {
    let rule = gegenbauer::gauss_rule(alpha, n)?;
    let a = alpha.value();
    let mut t_nodes = Vec::with_capacity(n + 1);
    for &x in &rule.nodes {
        t_nodes.push(inverse_map(map, x)?);
    }
    let e: Vec<f64> = t_nodes.iter().map(|&t| (-t).exp()).collect();
    let p: Vec<f64> = rule
        .weights
        .iter()
        .zip(&t_nodes)
        .map(|(&w, &t)| w * ln_exp_weight_ratio(map, a, t).exp())
        .collect();
    Ok(TGGrid {
        map,
        rule,
        t_nodes,
        e,
        p,
    })
}
