//! Infinite-horizon linear-quadratic regulation with state equality
//! constraints and output feedback, discretized by TG collocation.
//!
//! The problem data is the linear system `x' = A x + B u`, `y = C x`,
//! the state equality constraint `D^T x = 0`, and the quadratic cost
//! `J = 1/2 int (x^T Q x + u^T R u) dt` over `[0, inf)`. Two
//! transcriptions are provided: the integral spectral (IS) form with
//! modal coefficients as unknowns, and the integral pseudospectral (IPS)
//! form with nodal values as unknowns. Both reduce to an
//! equality-constrained convex quadratic program solved by a direct KKT
//! factorization.

mod assemble;
mod solve;

pub use assemble::{assemble_ips, assemble_is, ISAssembly, QPSystem, Transcription};
pub use solve::{
    feedback_gain, recover, sample_trajectory, solve_kkt, GainEstimate, KKTSolution, SolveReport,
    TrajectoryRow,
};

use crate::tgbasis::TGFamily;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Problem data for the constrained output-feedback regulator.
#[derive(Debug, Clone)]
pub struct IHOCProblem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// State equality constraint directions, `n_x x c_1`. May have zero
    /// columns, in which case no constraint is imposed.
    pub d: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub x0: DVector<f64>,
}

impl IHOCProblem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        x0: DVector<f64>,
    ) -> Result<Self> {
        let n_x = a.nrows();
        if a.ncols() != n_x {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        if b.nrows() != n_x {
            return Err(Error::DimensionMismatch("B row count must match A".into()));
        }
        if c.ncols() != n_x {
            return Err(Error::DimensionMismatch("C column count must match A".into()));
        }
        if d.nrows() != n_x {
            return Err(Error::DimensionMismatch("D row count must match A".into()));
        }
        if q.nrows() != n_x || q.ncols() != n_x {
            return Err(Error::DimensionMismatch("Q must be n_x x n_x".into()));
        }
        let n_u = b.ncols();
        if r.nrows() != n_u || r.ncols() != n_u {
            return Err(Error::DimensionMismatch("R must be n_u x n_u".into()));
        }
        if x0.len() != n_x {
            return Err(Error::DimensionMismatch("x0 length must match A".into()));
        }
        check_psd(&q, "Q")?;
        check_psd(&r, "R")?;
        Ok(Self { a, b, c, d, q, r, x0 })
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }

    #[inline]
    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }

    #[inline]
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    #[inline]
    pub fn c1(&self) -> usize {
        self.d.ncols()
    }

    /// Same problem with a different initial state.
    pub fn with_initial_state(mut self, x0: DVector<f64>) -> Result<Self> {
        if x0.len() != self.n_x() {
            return Err(Error::DimensionMismatch("x0 length must match A".into()));
        }
        self.x0 = x0;
        Ok(self)
    }
}

fn check_psd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::DimensionMismatch(format!("{name} is not symmetric")));
            }
        }
    }
    let eig = m.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(Error::DimensionMismatch(format!(
            "{name} is not positive semi-definite (min eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// Built-in benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkId {
    /// Divert control system: one pressure state and four nozzle-area
    /// states whose changes must sum to zero.
    Dcs,
    /// F-16 lateral dynamics with an aileron-rudder interconnect.
    F16,
}

impl std::str::FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dcs" => Ok(BenchmarkId::Dcs),
            "f16" => Ok(BenchmarkId::F16),
            other => Err(Error::UnknownProblem(other.into())),
        }
    }
}

/// Returns the benchmark problem matrices and default initial state.
pub fn make_benchmark_problem(id: BenchmarkId) -> IHOCProblem {
    match id {
        BenchmarkId::Dcs => {
            let mut a = DMatrix::zeros(5, 5);
            a[(0, 0)] = -964.8;
            for j in 1..5 {
                a[(0, j)] = -33985.7;
                a[(j, j)] = -400.0;
            }
            let mut b = DMatrix::zeros(5, 4);
            for j in 0..4 {
                b[(j + 1, j)] = 400.0;
            }
            let c = DMatrix::from_row_slice(1, 5, &[1.0, 0.0, 0.0, 0.0, 0.0]);
            let d = DMatrix::from_column_slice(5, 1, &[0.0, 1.0, 1.0, 1.0, 1.0]);
            let q = DMatrix::identity(5, 5);
            let r = DMatrix::identity(4, 4);
            let x0 = DVector::from_column_slice(&[200.0, 10.0, -10.0, 5.0, -5.0]);
            IHOCProblem::new(a, b, c, d, q, r, x0).expect("benchmark data is consistent")
        }
        BenchmarkId::F16 => {
            let a = DMatrix::from_row_slice(
                7,
                7,
                &[
                    -0.3220, 0.0640, 0.0364, -0.9917, 0.0003, 0.0008, 0.0, //
                    0.0, 0.0, 1.0, 0.0037, 0.0, 0.0, 0.0, //
                    -30.6492, 0.0, -3.6784, 0.6646, -0.7333, 0.1315, 0.0, //
                    8.5396, 0.0, -0.0254, -0.4764, -0.0319, -0.0620, 0.0, //
                    0.0, 0.0, 0.0, 0.0, -20.2, 0.0, 0.0, //
                    0.0, 0.0, 0.0, 0.0, 0.0, -20.2, 0.0, //
                    0.0, 0.0, 0.0, 57.2958, 0.0, 0.0, -1.0,
                ],
            );
            let mut b = DMatrix::zeros(7, 2);
            b[(4, 0)] = 20.2;
            b[(5, 1)] = 20.2;
            let c = DMatrix::from_row_slice(
                4,
                7,
                &[
                    0.0, 0.0, 0.0, 57.2958, 0.0, 0.0, -1.0, //
                    0.0, 0.0, 57.2958, 0.0, 0.0, 0.0, 0.0, //
                    57.2958, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
                    0.0, 57.2958, 0.0, 0.0, 0.0, 0.0, 0.0,
                ],
            );
            let d = DMatrix::from_column_slice(7, 1, &[0.0, 0.0, 0.0, 0.0, 12.0, -1.0, 0.0]);
            let q = DMatrix::from_diagonal(&DVector::from_column_slice(&[
                50.0, 100.0, 100.0, 50.0, 0.0, 0.0, 1.0,
            ]));
            let r = DMatrix::identity(2, 2) * 0.1;
            let mut x0 = DVector::zeros(7);
            x0[0] = 0.5;
            IHOCProblem::new(a, b, c, d, q, r, x0).expect("benchmark data is consistent")
        }
    }
}

/// Mesh-refinement regime for parameter advice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdviceRegime {
    /// Stretching map (`L > 1`), node spread pushed outward.
    Stretching,
    /// Contracting map (`L < 1`), nodes clustered toward the origin.
    Contracting,
}

/// Recommended Gegenbauer index and mapping-scale range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterAdvice {
    pub alpha: f64,
    pub l_range: (f64, f64),
}

/// Recommends `(alpha, L)` for the given family, regime, and mesh size.
///
/// Stretching maps favor the Legendre-like index 1/2 with a
/// family-dependent scale window; contracting maps favor index 0 for
/// large meshes, while small meshes tolerate any admissible index (a
/// mildly negative one is suggested).
pub fn advise_parameters(family: TGFamily, regime: AdviceRegime, n: usize) -> ParameterAdvice {
    match regime {
        AdviceRegime::Stretching => ParameterAdvice {
            alpha: 0.5,
            l_range: match family {
                TGFamily::Rational => (15.0, 25.0),
                TGFamily::Exponential => (10.0, 20.0),
            },
        },
        AdviceRegime::Contracting => {
            if n > 40 {
                ParameterAdvice {
                    alpha: 0.0,
                    l_range: (0.0, 1.0),
                }
            } else {
                ParameterAdvice {
                    alpha: -0.2,
                    l_range: (0.0, 1.0),
                }
            }
        }
    }
}
