//! Assembly of the IS and IPS transcriptions into an equality-constrained
//! quadratic program.

use super::IHOCProblem;
use crate::tgbasis::{tg_eval_series, TGGrid};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Largest mesh size accepted by the nodal (IPS) transcription, whose
/// constraint matrix has O(n^4) entries.
pub const IPS_MESH_LIMIT: usize = 60;

/// Which unknowns the QP variable vector holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transcription {
    /// Modal coefficients: states `a_{r,0..l_x}` stacked per state, then
    /// controls `b_{s,0..l_u}` stacked per control.
    Modal { l_x: usize, l_u: usize },
    /// Nodal values: states at the collocation nodes (per state), controls
    /// at the nodes (per control), then states and controls at the
    /// auxiliary grid (per component, flat index `k (n+1) + j`).
    Nodal,
}

/// Equality-constrained quadratic program `min 1/2 z^T H z` subject to
/// `Aeq z = beq`.
#[derive(Debug, Clone)]
pub struct QPSystem {
    pub h: DMatrix<f64>,
    pub aeq: DMatrix<f64>,
    pub beq: DVector<f64>,
    pub transcription: Transcription,
}

/// Shared basis evaluations for the modal transcription: basis values at
/// the collocation nodes and at the auxiliary grid
/// `eta_{(k,j)} = E_k t_j` (flat row index `k (n+1) + j`).
#[derive(Debug, Clone)]
pub struct ISAssembly {
    pub grid: TGGrid,
    pub l_x: usize,
    pub l_u: usize,
    /// `(n+1) x (l_x+1)` state-basis values at the nodes.
    pub g_at_t: DMatrix<f64>,
    /// `(n+1) x (l_u+1)` control-basis values at the nodes.
    pub g_at_t_control: DMatrix<f64>,
    /// `(n+1)^2 x (l_x+1)` state-basis values at the auxiliary points.
    pub g_at_eta_x: DMatrix<f64>,
    /// `(n+1)^2 x (l_u+1)` control-basis values at the auxiliary points.
    pub g_at_eta_u: DMatrix<f64>,
}

impl ISAssembly {
    pub fn new(grid: &TGGrid, l_x: usize, l_u: usize) -> Self {
        let n = grid.n();
        let np = n + 1;
        let l_max = l_x.max(l_u);
        let mut g_at_t = DMatrix::zeros(np, l_x + 1);
        let mut g_at_t_control = DMatrix::zeros(np, l_u + 1);
        for j in 0..np {
            let vals = tg_eval_series(grid.map, grid.alpha(), l_max, grid.t_nodes[j]);
            for m in 0..=l_x {
                g_at_t[(j, m)] = vals[m];
            }
            for m in 0..=l_u {
                g_at_t_control[(j, m)] = vals[m];
            }
        }
        let mut g_at_eta_x = DMatrix::zeros(np * np, l_x + 1);
        let mut g_at_eta_u = DMatrix::zeros(np * np, l_u + 1);
        for k in 0..np {
            for j in 0..np {
                let eta = grid.e[k] * grid.t_nodes[j];
                let row = k * np + j;
                let vals = tg_eval_series(grid.map, grid.alpha(), l_max, eta);
                for m in 0..=l_x {
                    g_at_eta_x[(row, m)] = vals[m];
                }
                for m in 0..=l_u {
                    g_at_eta_u[(row, m)] = vals[m];
                }
            }
        }
        Self {
            grid: grid.clone(),
            l_x,
            l_u,
            g_at_t,
            g_at_t_control,
            g_at_eta_x,
            g_at_eta_u,
        }
    }

    /// Contracts the auxiliary-grid basis values with the integration
    /// vector: `s[(j, m)] = sum_k P_k G_m(E_k t_j)`, so that the
    /// quadrature of the degree-`m` basis function over `[0, t_j]` is
    /// `t_j s[(j, m)]`. Returned for the state and control degrees.
    pub fn eta_sums(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let np = self.grid.n() + 1;
        let mut s_x = DMatrix::zeros(np, self.l_x + 1);
        let mut s_u = DMatrix::zeros(np, self.l_u + 1);
        for k in 0..np {
            let p = self.grid.p[k];
            for j in 0..np {
                let row = k * np + j;
                for m in 0..=self.l_x {
                    s_x[(j, m)] += p * self.g_at_eta_x[(row, m)];
                }
                for m in 0..=self.l_u {
                    s_u[(j, m)] += p * self.g_at_eta_u[(row, m)];
                }
            }
        }
        (s_x, s_u)
    }
}

/// Builds the modal (IS) transcription.
///
/// Variable layout: `a_{r,m}` at `r (l_x+1) + m`, then `b_{s,m}` at
/// `n_x (l_x+1) + s (l_u+1) + m`. Constraint rows: `(n+1) n_x` dynamics
/// rows (the initial state replaced by its modal value at `t = 0`),
/// `(n+1) c_1` state-constraint rows, then `n_x` initial-condition rows
/// `sum_m (-1)^m a_{r,m} = x0_r`; only the last block has a nonzero
/// right-hand side.
pub fn assemble_is(
    problem: &IHOCProblem,
    grid: &TGGrid,
    l_x: usize,
    l_u: usize,
) -> Result<QPSystem> {
    let n = grid.n();
    let np = n + 1;
    let (n_x, n_u, c1) = (problem.n_x(), problem.n_u(), problem.c1());
    let asm = ISAssembly::new(grid, l_x, l_u);
    let w = grid.plain_weights();

    // Objective: J = 1/2 sum_j W_j (x^T Q x + u^T R u)(t_j) becomes
    // 1/2 z^T blkdiag(Q (x) M_x, R (x) M_u) z with M = G^T diag(W) G.
    let mut m_x: DMatrix<f64> = DMatrix::zeros(l_x + 1, l_x + 1);
    let mut m_u: DMatrix<f64> = DMatrix::zeros(l_u + 1, l_u + 1);
    for j in 0..np {
        for m in 0..=l_x {
            for m2 in 0..=l_x {
                m_x[(m, m2)] += w[j] * asm.g_at_t[(j, m)] * asm.g_at_t[(j, m2)];
            }
        }
        for m in 0..=l_u {
            for m2 in 0..=l_u {
                m_u[(m, m2)] += w[j] * asm.g_at_t_control[(j, m)] * asm.g_at_t_control[(j, m2)];
            }
        }
    }
    let d = (l_x + 1) * n_x + (l_u + 1) * n_u;
    let off_b = (l_x + 1) * n_x;
    let mut h = DMatrix::zeros(d, d);
    for r in 0..n_x {
        for r2 in 0..n_x {
            let q = problem.q[(r, r2)];
            if q != 0.0 {
                for m in 0..=l_x {
                    for m2 in 0..=l_x {
                        h[(r * (l_x + 1) + m, r2 * (l_x + 1) + m2)] += q * m_x[(m, m2)];
                    }
                }
            }
        }
    }
    for s in 0..n_u {
        for s2 in 0..n_u {
            let r = problem.r[(s, s2)];
            if r != 0.0 {
                for m in 0..=l_u {
                    for m2 in 0..=l_u {
                        h[(off_b + s * (l_u + 1) + m, off_b + s2 * (l_u + 1) + m2)] +=
                            r * m_u[(m, m2)];
                    }
                }
            }
        }
    }

    let (s_x, s_u) = asm.eta_sums();
    let m_rows = np * (n_x + c1) + n_x;
    let mut aeq = DMatrix::zeros(m_rows, d);
    let mut beq = DVector::zeros(m_rows);

    // Dynamics rows: x_r(t_j) - sum_{r'} A[r,r'] t_j (P-quadrature of
    // x_{r'}) - sum_s B[r,s] t_j (P-quadrature of u_s) - x_r(0) = 0,
    // all terms expressed through the modal coefficients.
    for r in 0..n_x {
        for j in 0..np {
            let row = r * np + j;
            let t = grid.t_nodes[j];
            for m in 0..=l_x {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                aeq[(row, r * (l_x + 1) + m)] += asm.g_at_t[(j, m)] - sign;
            }
            for r2 in 0..n_x {
                let a = problem.a[(r, r2)];
                if a != 0.0 {
                    for m in 0..=l_x {
                        aeq[(row, r2 * (l_x + 1) + m)] -= a * t * s_x[(j, m)];
                    }
                }
            }
            for s in 0..n_u {
                let b = problem.b[(r, s)];
                if b != 0.0 {
                    for m in 0..=l_u {
                        aeq[(row, off_b + s * (l_u + 1) + m)] -= b * t * s_u[(j, m)];
                    }
                }
            }
        }
    }
    // State-constraint rows: (x(t_j))^T D = 0.
    let d_off = np * n_x;
    for c in 0..c1 {
        for j in 0..np {
            let row = d_off + c * np + j;
            for r in 0..n_x {
                let dv = problem.d[(r, c)];
                if dv != 0.0 {
                    for m in 0..=l_x {
                        aeq[(row, r * (l_x + 1) + m)] += dv * asm.g_at_t[(j, m)];
                    }
                }
            }
        }
    }
    // Initial-condition rows pinning the modal value at t = 0, where
    // every basis function equals (-1)^m.
    let ic_off = np * (n_x + c1);
    for r in 0..n_x {
        let row = ic_off + r;
        for m in 0..=l_x {
            aeq[(row, r * (l_x + 1) + m)] = if m % 2 == 0 { 1.0 } else { -1.0 };
        }
        beq[row] = problem.x0[r];
    }

    Ok(QPSystem {
        h,
        aeq,
        beq,
        transcription: Transcription::Modal { l_x, l_u },
    })
}

/// Builds the nodal (IPS) transcription with
/// `(n+1)(n+2)(n_x + n_u)` unknowns: values at the collocation nodes plus
/// values at the auxiliary grid, the latter tied to the former by
/// degree-`n` interpolation consistency rows.
pub fn assemble_ips(problem: &IHOCProblem, grid: &TGGrid) -> Result<QPSystem> {
    let n = grid.n();
    if n > IPS_MESH_LIMIT {
        return Err(Error::MeshTooLarge(n, IPS_MESH_LIMIT));
    }
    let np = n + 1;
    let np2 = np * np;
    let (n_x, n_u, c1) = (problem.n_x(), problem.n_u(), problem.c1());
    let d = (np + np2) * (n_x + n_u);
    let off_u = n_x * np;
    let off_xe = (n_x + n_u) * np;
    let off_ue = off_xe + n_x * np2;
    let w = grid.plain_weights();

    let mut h = DMatrix::zeros(d, d);
    for r in 0..n_x {
        for r2 in 0..n_x {
            let q = problem.q[(r, r2)];
            if q != 0.0 {
                for j in 0..np {
                    h[(r * np + j, r2 * np + j)] += q * w[j];
                }
            }
        }
    }
    for s in 0..n_u {
        for s2 in 0..n_u {
            let rv = problem.r[(s, s2)];
            if rv != 0.0 {
                for j in 0..np {
                    h[(off_u + s * np + j, off_u + s2 * np + j)] += rv * w[j];
                }
            }
        }
    }

    // Degree-n interpolation operator from node samples to the auxiliary
    // points, via the discrete transform with its discrete denominators.
    let asm = ISAssembly::new(grid, n, n);
    let mut tmat = DMatrix::zeros(np, np);
    for m in 0..np {
        let mut den = 0.0;
        for j in 0..np {
            den += asm.g_at_t[(j, m)] * asm.g_at_t[(j, m)] * grid.rule.weights[j];
        }
        for j in 0..np {
            tmat[(m, j)] = asm.g_at_t[(j, m)] * grid.rule.weights[j] / den;
        }
    }
    let interp = &asm.g_at_eta_x * &tmat; // (n+1)^2 x (n+1)

    let m_rows = np * (n_x + c1) + np2 * (n_x + n_u);
    let mut aeq = DMatrix::zeros(m_rows, d);
    let mut beq = DVector::zeros(m_rows);

    // Dynamics rows: x_r(t_j) - sum A t_j P-quadrature over the auxiliary
    // values = x0_r; here the initial state stays on the right-hand side.
    for r in 0..n_x {
        for j in 0..np {
            let row = r * np + j;
            let t = grid.t_nodes[j];
            aeq[(row, r * np + j)] += 1.0;
            for r2 in 0..n_x {
                let a = problem.a[(r, r2)];
                if a != 0.0 {
                    for k in 0..np {
                        aeq[(row, off_xe + r2 * np2 + k * np + j)] -= a * t * grid.p[k];
                    }
                }
            }
            for s in 0..n_u {
                let b = problem.b[(r, s)];
                if b != 0.0 {
                    for k in 0..np {
                        aeq[(row, off_ue + s * np2 + k * np + j)] -= b * t * grid.p[k];
                    }
                }
            }
            beq[row] = problem.x0[r];
        }
    }
    let d_off = np * n_x;
    for c in 0..c1 {
        for j in 0..np {
            let row = d_off + c * np + j;
            for r in 0..n_x {
                let dv = problem.d[(r, c)];
                if dv != 0.0 {
                    aeq[(row, r * np + j)] += dv;
                }
            }
        }
    }
    // Consistency rows: each auxiliary value equals the degree-n
    // interpolant of the node values of the same component.
    let c_off = np * (n_x + c1);
    for r in 0..n_x {
        for q in 0..np2 {
            let row = c_off + r * np2 + q;
            aeq[(row, off_xe + r * np2 + q)] = 1.0;
            for j in 0..np {
                aeq[(row, r * np + j)] -= interp[(q, j)];
            }
        }
    }
    for s in 0..n_u {
        for q in 0..np2 {
            let row = c_off + n_x * np2 + s * np2 + q;
            aeq[(row, off_ue + s * np2 + q)] = 1.0;
            for j in 0..np {
                aeq[(row, off_u + s * np + j)] -= interp[(q, j)];
            }
        }
    }

    Ok(QPSystem {
        h,
        aeq,
        beq,
        transcription: Transcription::Nodal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gegenbauer::GegenbauerIndex;
    use crate::ihoc::{make_benchmark_problem, BenchmarkId};
    use crate::tgbasis::{build_grid, TGFamily, TGMap};
    use approx::assert_relative_eq;

    fn grid(family: TGFamily, a: f64, l: f64, n: usize) -> TGGrid {
        build_grid(
            TGMap::new(family, l).unwrap(),
            GegenbauerIndex::new(a).unwrap(),
            n,
        )
        .unwrap()
    }

    #[test]
    fn is_dimensions_for_dcs() {
        let p = make_benchmark_problem(BenchmarkId::Dcs);
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 20);
        let qp = assemble_is(&p, &g, 21, 21).unwrap();
        assert_eq!(qp.h.nrows(), 198);
        assert_eq!(qp.aeq.nrows(), 131);
        assert_eq!(qp.aeq.ncols(), 198);
        assert_eq!(qp.beq.len(), 131);
    }

    #[test]
    fn is_h_symmetric_psd_and_beq_sparsity() {
        let p = make_benchmark_problem(BenchmarkId::F16);
        let g = grid(TGFamily::Exponential, 0.5, 15.0, 10);
        let qp = assemble_is(&p, &g, 11, 11).unwrap();
        let scale = qp.h.amax();
        assert_relative_eq!(qp.h.clone(), qp.h.transpose(), epsilon = 1e-12 * scale);
        let min_eig = qp
            .h
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-10 * scale);
        // Only the trailing initial-condition rows carry data.
        let m = qp.beq.len();
        for i in 0..m - 7 {
            assert_eq!(qp.beq[i], 0.0);
        }
        assert_eq!(qp.beq[m - 7], 0.5);
    }

    #[test]
    fn is_initial_condition_rows_alternate() {
        let p = make_benchmark_problem(BenchmarkId::Dcs);
        let g = grid(TGFamily::Exponential, 0.0, 1.0, 4);
        let qp = assemble_is(&p, &g, 5, 5).unwrap();
        let ic_row = 5 * (5 + 1); // (n+1)(n_x + c_1)
        for m in 0..=5usize {
            let expect = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(qp.aeq[(ic_row, m)], expect);
        }
        assert_eq!(qp.beq[ic_row], 200.0);
    }

    #[test]
    fn ips_dimensions_for_dcs() {
        let p = make_benchmark_problem(BenchmarkId::Dcs);
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 5);
        let qp = assemble_ips(&p, &g).unwrap();
        assert_eq!(qp.h.nrows(), 378);
        assert_eq!(qp.aeq.nrows(), 6 * 6 + 36 * 9);
        assert_eq!(qp.transcription, Transcription::Nodal);
    }

    #[test]
    fn ips_rejects_large_meshes() {
        let p = make_benchmark_problem(BenchmarkId::Dcs);
        let g = grid(TGFamily::Exponential, 0.5, 1.0, 61);
        assert!(matches!(
            assemble_ips(&p, &g),
            Err(Error::MeshTooLarge(61, IPS_MESH_LIMIT))
        ));
    }

    #[test]
    fn assembly_basis_rows_match_series() {
        let g = grid(TGFamily::Rational, 0.3, 2.0, 6);
        let asm = ISAssembly::new(&g, 7, 4);
        for j in 0..=6 {
            let vals = tg_eval_series(g.map, g.alpha(), 7, g.t_nodes[j]);
            for m in 0..=7 {
                assert_eq!(asm.g_at_t[(j, m)], vals[m]);
            }
        }
        // Auxiliary points all lie strictly inside (0, max node).
        let t_max = g.t_nodes[6];
        for k in 0..=6 {
            for j in 0..=6 {
                let eta = g.e[k] * g.t_nodes[j];
                assert!(eta > 0.0 && eta < t_max);
            }
        }
    }

    #[test]
    fn eta_sums_integrate_the_basis() {
        // t_j * s[(j, m)] approximates the integral of the basis function
        // over [0, t_j]; check degree 0 (integrand 1) exactly.
        let g = grid(TGFamily::Exponential, 0.5, 2.0, 12);
        let asm = ISAssembly::new(&g, 12, 12);
        let (s_x, _) = asm.eta_sums();
        for j in 0..=12 {
            assert_relative_eq!(
                g.t_nodes[j] * s_x[(j, 0)],
                g.t_nodes[j],
                max_relative = 1e-8
            );
        }
    }
}
