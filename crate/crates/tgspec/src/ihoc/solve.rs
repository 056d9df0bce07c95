//! Direct KKT solve of the assembled QP and recovery of trajectories,
//! cost, feasibility errors, and the output-feedback gain.

use super::assemble::{ISAssembly, QPSystem, Transcription};
use super::IHOCProblem;
use crate::interpolation::forward_transform;
use crate::tgbasis::{tg_eval_series, TGGrid};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Primal/dual solution of the KKT stationarity system.
#[derive(Debug, Clone)]
pub struct KKTSolution {
    pub solution: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// `||KKT [z; mu] - rhs||_inf / max(1, ||rhs||_inf)` against the
    /// unregularized system.
    pub kkt_residual: f64,
}

/// Least-squares output-feedback gain together with the relative residual
/// of the (generally overdetermined) gain system.
#[derive(Debug, Clone)]
pub struct GainEstimate {
    pub k: DMatrix<f64>,
    pub residual: f64,
}

/// Everything recovered from a QP solution.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// State modal coefficients, `n_x x (l_x + 1)`.
    pub coeffs_a: DMatrix<f64>,
    /// Control modal coefficients, `n_u x (l_u + 1)`.
    pub coeffs_b: DMatrix<f64>,
    pub j_n: f64,
    /// `None` when the output trajectory matrix is rank deficient (e.g.
    /// the zero solution), in which case no gain is identifiable.
    pub k_star: Option<GainEstimate>,
    /// Per-node maximum absolute dynamics-equation residual.
    pub feasibility: Vec<f64>,
    pub kkt_residual: f64,
    /// Largest violation of the state equality constraint at the nodes.
    pub d_constraint_max: f64,
}

/// One sampled point of the recovered trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

/// Solves `[H Aeq^T; Aeq 0] [z; mu] = [0; beq]` by dense LU, retrying
/// with Tikhonov regularization of the `H` block if the factorization
/// fails or leaves a large residual.
pub fn solve_kkt(qp: &QPSystem) -> Result<KKTSolution> {
    let d = qp.h.nrows();
    let m = qp.aeq.nrows();
    let dim = d + m;
    let mut kkt = DMatrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (d, d)).copy_from(&qp.h);
    kkt.view_mut((0, d), (d, m)).copy_from(&qp.aeq.transpose());
    kkt.view_mut((d, 0), (m, d)).copy_from(&qp.aeq);
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(d, m).copy_from(&qp.beq);
    let rhs_scale = qp.beq.amax().max(1.0);

    let residual_of = |sol: &DVector<f64>| (&kkt * sol - &rhs).amax() / rhs_scale;

    let mut best: Option<(DVector<f64>, f64)> = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .map(|sol| {
            let r = residual_of(&sol);
            (sol, r)
        })
        .filter(|(_, r)| r.is_finite());
    if best.as_ref().is_none_or(|(_, r)| *r > 1e-8) {
        let eps = 1e-10 * qp.h.amax().max(1.0);
        let mut reg = kkt.clone();
        for i in 0..d {
            reg[(i, i)] += eps;
        }
        if let Some(sol) = reg.lu().solve(&rhs) {
            let r = residual_of(&sol);
            if r.is_finite() && best.as_ref().is_none_or(|(_, br)| r < *br) {
                best = Some((sol, r));
            }
        }
    }
    let (sol, kkt_residual) = best.ok_or(Error::SingularSystem)?;
    let z = sol.rows(0, d).into_owned();
    let constraint_residual = (&qp.aeq * &z - &qp.beq).amax();
    if constraint_residual > 1e-6 * rhs_scale {
        return Err(Error::InfeasibleConstraints(constraint_residual));
    }
    Ok(KKTSolution {
        solution: z,
        multipliers: sol.rows(d, m).into_owned(),
        kkt_residual,
    })
}

/// Minimum-norm least-squares solution of `K Y*^T = -U*^T`.
pub fn feedback_gain(y_star: &DMatrix<f64>, u_star: &DMatrix<f64>) -> Result<GainEstimate> {
    let n_y = y_star.ncols();
    let svd = y_star.clone().svd(true, true);
    let s_max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * s_max)
        .count();
    if s_max == 0.0 || rank < n_y {
        return Err(Error::RankDeficientOutputs);
    }
    let pinv = svd
        .pseudo_inverse(1e-10 * s_max)
        .map_err(|_| Error::RankDeficientOutputs)?;
    let k_t = pinv * (-u_star); // n_y x n_u
    let u_scale = u_star.amax().max(1.0);
    let residual = (y_star * &k_t + u_star).amax() / u_scale;
    Ok(GainEstimate {
        k: k_t.transpose(),
        residual,
    })
}

/// Unpacks a QP solution into modal coefficients and derives the cost,
/// the per-node dynamics residuals, the state-constraint violation, and
/// the output-feedback gain.
pub fn recover(
    problem: &IHOCProblem,
    grid: &TGGrid,
    qp: &QPSystem,
    kkt: &KKTSolution,
) -> Result<SolveReport> {
    let n = grid.n();
    let np = n + 1;
    let (n_x, n_u) = (problem.n_x(), problem.n_u());
    let z = &kkt.solution;

    let (coeffs_a, coeffs_b) = match qp.transcription {
        Transcription::Modal { l_x, l_u } => {
            let off_b = (l_x + 1) * n_x;
            let mut a = DMatrix::zeros(n_x, l_x + 1);
            for r in 0..n_x {
                for m in 0..=l_x {
                    a[(r, m)] = z[r * (l_x + 1) + m];
                }
            }
            let mut b = DMatrix::zeros(n_u, l_u + 1);
            for s in 0..n_u {
                for m in 0..=l_u {
                    b[(s, m)] = z[off_b + s * (l_u + 1) + m];
                }
            }
            (a, b)
        }
        Transcription::Nodal => {
            // Nodal values carry the same information as the degree-n
            // interpolant; transform each component to modal form.
            let off_u = n_x * np;
            let mut a = DMatrix::zeros(n_x, np);
            for r in 0..n_x {
                let samples: Vec<f64> = (0..np).map(|j| z[r * np + j]).collect();
                let interp = forward_transform(grid, &samples)?;
                for m in 0..np {
                    a[(r, m)] = interp.coeffs[m];
                }
            }
            let mut b = DMatrix::zeros(n_u, np);
            for s in 0..n_u {
                let samples: Vec<f64> = (0..np).map(|j| z[off_u + s * np + j]).collect();
                let interp = forward_transform(grid, &samples)?;
                for m in 0..np {
                    b[(s, m)] = interp.coeffs[m];
                }
            }
            (a, b)
        }
    };
    let l_x = coeffs_a.ncols() - 1;
    let l_u = coeffs_b.ncols() - 1;

    let asm = ISAssembly::new(grid, l_x, l_u);
    let x_nodes = &asm.g_at_t * coeffs_a.transpose(); // (n+1) x n_x
    let u_nodes = &asm.g_at_t_control * coeffs_b.transpose(); // (n+1) x n_u
    let w = grid.plain_weights();

    let mut j_n = 0.0;
    for j in 0..np {
        let xj = x_nodes.row(j).transpose();
        let uj = u_nodes.row(j).transpose();
        j_n += 0.5 * w[j] * ((&problem.q * &xj).dot(&xj) + (&problem.r * &uj).dot(&uj));
    }

    // Dynamics residual per node: the modal restatement of the collocated
    // integral equations, with the initial state as its modal value.
    let (s_x, s_u) = asm.eta_sums();
    let mut x0_modal: DVector<f64> = DVector::zeros(n_x);
    for r in 0..n_x {
        for m in 0..=l_x {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            x0_modal[r] += sign * coeffs_a[(r, m)];
        }
    }
    let mut feasibility = vec![0.0f64; np];
    for j in 0..np {
        let t = grid.t_nodes[j];
        for r in 0..n_x {
            let mut rhs = x0_modal[r];
            for r2 in 0..n_x {
                let a = problem.a[(r, r2)];
                if a != 0.0 {
                    let mut quad = 0.0;
                    for m in 0..=l_x {
                        quad += s_x[(j, m)] * coeffs_a[(r2, m)];
                    }
                    rhs += a * t * quad;
                }
            }
            for s in 0..n_u {
                let b = problem.b[(r, s)];
                if b != 0.0 {
                    let mut quad = 0.0;
                    for m in 0..=l_u {
                        quad += s_u[(j, m)] * coeffs_b[(s, m)];
                    }
                    rhs += b * t * quad;
                }
            }
            feasibility[j] = feasibility[j].max((rhs - x_nodes[(j, r)]).abs());
        }
    }

    let d_constraint_max = if problem.c1() > 0 {
        (&x_nodes * &problem.d).amax()
    } else {
        0.0
    };

    let y_nodes = &x_nodes * problem.c.transpose();
    let k_star = match feedback_gain(&y_nodes, &u_nodes) {
        Ok(g) => Some(g),
        Err(Error::RankDeficientOutputs) => None,
        Err(e) => return Err(e),
    };

    Ok(SolveReport {
        coeffs_a,
        coeffs_b,
        j_n,
        k_star,
        feasibility,
        kkt_residual: kkt.kkt_residual,
        d_constraint_max,
    })
}

/// Samples the recovered trajectories at `m >= 2` equally spaced times in
/// `[0, t_n]`, with the outputs `y = C x` evaluated pointwise.
pub fn sample_trajectory(
    report: &SolveReport,
    grid: &TGGrid,
    problem: &IHOCProblem,
    m: usize,
) -> Vec<TrajectoryRow> {
    assert!(m >= 2, "need at least the two endpoint samples");
    let t_end = grid.t_nodes[grid.n()];
    let l_x = report.coeffs_a.ncols() - 1;
    let l_u = report.coeffs_b.ncols() - 1;
    let l_max = l_x.max(l_u);
    (0..m)
        .map(|i| {
            let t = t_end * i as f64 / (m - 1) as f64;
            let basis = tg_eval_series(grid.map, grid.alpha(), l_max, t);
            let x: Vec<f64> = (0..problem.n_x())
                .map(|r| (0..=l_x).map(|k| report.coeffs_a[(r, k)] * basis[k]).sum())
                .collect();
            let u: Vec<f64> = (0..problem.n_u())
                .map(|s| (0..=l_u).map(|k| report.coeffs_b[(s, k)] * basis[k]).sum())
                .collect();
            let y: Vec<f64> = (0..problem.n_y())
                .map(|i| (0..problem.n_x()).map(|r| problem.c[(i, r)] * x[r]).sum())
                .collect();
            TrajectoryRow { t, x, u, y }
        })
        .collect()
}
