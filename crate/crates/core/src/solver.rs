//! Generalized Newton iteration for `A x^{p-1} + B |x|^{q-1} = b`.
//!
//! With `F(x) = A x^{p-1} + B|x|^{q-1} - b` and the generalized Jacobian
//!
//! ```text
//! V(x) = (p-1) A x^{p-2} + (q-1) B|x|^{q-2} D(x),   D(x) = diag(sign(x))
//! ```
//!
//! each step solves `V(x_k) d = F(x_k)` by pivoted LU and sets
//! `x_{k+1} = x_k - d`. No line search or regularization is applied.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_singular_value, LuFactorization};
use crate::tensor::DenseTensor;
use crate::vector::{norm2, Matrix, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct TaveProblem {
    a: DenseTensor,
    b: DenseTensor,
    rhs: Vector,
}

impl TaveProblem {
    /// Builds a problem, semi-symmetrizing both tensors.
    pub fn new(a: DenseTensor, b: DenseTensor, rhs: Vector) -> Result<Self> {
        Self::check(&a, &b, &rhs)?;
        Ok(TaveProblem {
            a: a.semi_symmetrize()?,
            b: b.semi_symmetrize()?,
            rhs,
        })
    }

    /// Builds a problem from tensors taken as they are. `V(x)` is only the
    /// generalized Jacobian of `F` when both tensors are semi-symmetric.
    pub fn new_unsymmetrized(a: DenseTensor, b: DenseTensor, rhs: Vector) -> Result<Self> {
        Self::check(&a, &b, &rhs)?;
        Ok(TaveProblem { a, b, rhs })
    }

    fn check(a: &DenseTensor, b: &DenseTensor, rhs: &Vector) -> Result<()> {
        for (t, context) in [(a, "coefficient tensor A"), (b, "absolute-value tensor B")] {
            if t.order() < 2 {
                return Err(Error::Order {
                    context,
                    requirement: ">= 2",
                    order: t.order(),
                });
            }
        }
        if a.dim() != b.dim() {
            return Err(Error::mismatch("problem tensors A and B", a.dim(), b.dim()));
        }
        if a.dim() != rhs.dim() {
            return Err(Error::mismatch("tensor A and right-hand side", a.dim(), rhs.dim()));
        }
        Ok(())
    }

    pub fn a(&self) -> &DenseTensor {
        &self.a
    }

    pub fn b(&self) -> &DenseTensor {
        &self.b
    }

    pub fn rhs(&self) -> &Vector {
        &self.rhs
    }

    pub fn p(&self) -> usize {
        self.a.order()
    }

    pub fn q(&self) -> usize {
        self.b.order()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::mismatch("problem and point", self.dim(), x.len()));
        }
        Ok(())
    }

    /// `F(x) = A x^{p-1} + B|x|^{q-1} - b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vector> {
        self.check_point(x)?;
        let ax = self.a.contract_to_vector(x)?;
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let bx = self.b.contract_to_vector(&abs)?;
        Ok(Vector::from_vec_unchecked(
            ax.iter()
                .zip(bx.iter())
                .zip(self.rhs.iter())
                .map(|((a, b), r)| a + b - r)
                .collect(),
        ))
    }

    /// `V(x) = (p-1) A x^{p-2} + (q-1) B|x|^{q-2} D(x)`.
    pub fn generalized_jacobian(&self, x: &[f64]) -> Result<Matrix> {
        Ok(self.linearize(x)?.jacobian)
    }

    /// Everything one Newton step needs, computed with one contraction pass
    /// per tensor.
    pub fn linearize(&self, x: &[f64]) -> Result<Linearization> {
        self.check_point(x)?;
        let p = self.p() as f64;
        let q = self.q() as f64;
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let signs: Vec<f64> = x.iter().map(|&v| sign(v)).collect();
        let (ax_mat, ax_vec) = self.a.contract_pair(x)?;
        let (bx_mat, bx_vec) = self.b.contract_pair(&abs)?;
        let residual: Vec<f64> = ax_vec
            .iter()
            .zip(&bx_vec)
            .zip(self.rhs.iter())
            .map(|((a, b), r)| a + b - r)
            .collect();
        let jacobian = ax_mat
            .scaled(p - 1.0)
            .add(&bx_mat.mul_diag_right(&signs)?.scaled(q - 1.0))?;
        Ok(Linearization {
            x: x.to_vec(),
            ax_vec,
            bx_vec,
            residual,
            jacobian,
            ax_mat,
            bx_mat,
            signs,
        })
    }

    /// Whether `V(x)` is certified invertible through the singular values
    /// of `(B|x|^{q-2})^{-1} A x^{p-2}`.
    pub fn check_invertibility_condition(&self, x: &[f64], pivot_threshold: f64) -> Result<InvertibilityReport> {
        self.check_point(x)?;
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let bx = self.b.contract_to_matrix(&abs)?;
        let ax = self.a.contract_to_matrix(x)?;
        let Ok(lu) = LuFactorization::factor(&bx, pivot_threshold) else {
            return Ok(InvertibilityReport {
                b_part_invertible: false,
                min_singular_value_ratio: None,
                exceeds_one: false,
                jacobian_certified: false,
            });
        };
        let g = lu.inverse().mul_mat(&ax)?;
        let sigma = min_singular_value(&g);
        // V = (q-1) B|x|^{q-2} [((p-1)/(q-1)) G + D], so the orders scale sigma.
        let scale = (self.p() as f64 - 1.0) / (self.q() as f64 - 1.0);
        Ok(InvertibilityReport {
            b_part_invertible: true,
            min_singular_value_ratio: Some(sigma),
            exceeds_one: sigma > 1.0,
            jacobian_certified: scale * sigma > 1.0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub b_part_invertible: bool,
    /// Smallest singular value of `(B|x|^{q-2})^{-1} A x^{p-2}`.
    pub min_singular_value_ratio: Option<f64>,
    pub exceeds_one: bool,
    /// `exceeds_one` corrected for unequal orders; equal to it when `p == q`.
    pub jacobian_certified: bool,
}

/// Quantities of one Newton step at a point `x`.
#[derive(Clone, Debug)]
pub struct Linearization {
    pub x: Vec<f64>,
    /// `A x^{p-1}`
    pub ax_vec: Vec<f64>,
    /// `B|x|^{q-1}`
    pub bx_vec: Vec<f64>,
    /// `F(x)`
    pub residual: Vec<f64>,
    /// `V(x)`
    pub jacobian: Matrix,
    /// `A x^{p-2}`
    pub ax_mat: Matrix,
    /// `B|x|^{q-2}`
    pub bx_mat: Matrix,
    pub signs: Vec<f64>,
}

impl Linearization {
    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }

    pub fn factor(&self, pivot_threshold: f64) -> Result<LuFactorization> {
        LuFactorization::factor(&self.jacobian, pivot_threshold)
    }

    /// `x - V^{-1} F(x)`.
    pub fn step(&self, lu: &LuFactorization) -> Vec<f64> {
        let d = lu.solve(&self.residual).expect("dimension fixed at linearization");
        self.x.iter().zip(d).map(|(x, d)| x - d).collect()
    }

    /// `V^{-1} [(p-2) A x^{p-1} + (q-2) B|x|^{q-1} + b]`, the same step
    /// written without the residual.
    pub fn step_rewritten(&self, lu: &LuFactorization, problem: &TaveProblem) -> Vec<f64> {
        let p = problem.p() as f64;
        let q = problem.q() as f64;
        let rhs: Vec<f64> = self
            .ax_vec
            .iter()
            .zip(&self.bx_vec)
            .zip(problem.rhs().iter())
            .map(|((a, b), r)| (p - 2.0) * a + (q - 2.0) * b + r)
            .collect();
        lu.solve(&rhs).expect("dimension fixed at linearization")
    }
}

/// `sign(0) = 0`.
pub fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `D(x) = diag(sign(x))`.
pub fn sign_diag(x: &[f64]) -> Matrix {
    Matrix::diagonal(&x.iter().map(|&v| sign(v)).collect::<Vec<_>>())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Start point; all ones when absent.
    pub x0: Option<Vector>,
    pub pivot_threshold: f64,
    /// Iterates with a larger Euclidean norm stop the run as diverged.
    pub divergence_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-5,
            max_iter: 2000,
            x0: None,
            pivot_threshold: 1e-12,
            divergence_cap: 1e12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.pivot_threshold >= 0.0) {
            return Err(Error::InvalidConfig("pivot_threshold must be nonnegative".into()));
        }
        if !(self.divergence_cap > 0.0) {
            return Err(Error::InvalidConfig("divergence_cap must be positive".into()));
        }
        Ok(())
    }

    fn start(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.x0 {
            Some(x0) if x0.dim() != dim => Err(Error::mismatch("problem and start point", dim, x0.dim())),
            Some(x0) => Ok(x0.as_slice().to_vec()),
            None => Ok(vec![1.0; dim]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    SingularJacobian,
    Diverged,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIterations => "MaxIterations",
            SolveStatus::SingularJacobian => "SingularJacobian",
            SolveStatus::Diverged => "Diverged",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x_final: Vector,
    pub iterations: usize,
    /// `||F(x_k)||` for `k = 0..=iterations`.
    pub residual_history: Vec<f64>,
    pub elapsed_seconds: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history holds at least x0")
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// One step `x - V(x)^{-1} F(x)`.
pub fn newton_step(problem: &TaveProblem, x: &[f64], cfg: &SolverConfig) -> Result<Vector> {
    let lin = problem.linearize(x)?;
    let lu = lin.factor(cfg.pivot_threshold)?;
    Ok(Vector::from_vec_unchecked(lin.step(&lu)))
}

/// One step in the form `V(x)^{-1}[(p-2) A x^{p-1} + (q-2) B|x|^{q-1} + b]`.
pub fn newton_step_rewritten(problem: &TaveProblem, x: &[f64], cfg: &SolverConfig) -> Result<Vector> {
    let lin = problem.linearize(x)?;
    let lu = lin.factor(cfg.pivot_threshold)?;
    Ok(Vector::from_vec_unchecked(lin.step_rewritten(&lu, problem)))
}

/// The equal-order step
/// `((p-2)/(p-1)) x + (1/(p-1)) [A x^{p-2} + B|x|^{p-2} D(x)]^{-1} b`.
pub fn newton_step_equal_orders(problem: &TaveProblem, x: &[f64], cfg: &SolverConfig) -> Result<Vector> {
    if problem.p() != problem.q() {
        return Err(Error::Order {
            context: "equal-order Newton step (order of B must match A)",
            requirement: "== p",
            order: problem.q(),
        });
    }
    let lin = problem.linearize(x)?;
    let k = lin.ax_mat.add(&lin.bx_mat.mul_diag_right(&lin.signs)?)?;
    let lu = LuFactorization::factor(&k, cfg.pivot_threshold)?;
    let p = problem.p() as f64;
    let w = lu.solve(problem.rhs())?;
    Ok(Vector::from_vec_unchecked(
        x.iter()
            .zip(w)
            .map(|(xi, wi)| (p - 2.0) / (p - 1.0) * xi + wi / (p - 1.0))
            .collect(),
    ))
}

/// Runs the generalized Newton iteration from `cfg.x0`.
///
/// Input errors (bad config, start point of the wrong size) are returned as
/// `Err`; numerical failures end up in [`SolveReport::status`].
pub fn solve(problem: &TaveProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut x = cfg.start(problem.dim())?;
    let mut history = Vec::new();
    let mut k = 0;
    let status = loop {
        let lin = problem.linearize(&x)?;
        let r = lin.residual_norm();
        history.push(r);
        if !r.is_finite() {
            break SolveStatus::Diverged;
        }
        if r <= cfg.tol {
            break SolveStatus::Converged;
        }
        if norm2(&x) > cfg.divergence_cap {
            break SolveStatus::Diverged;
        }
        if k == cfg.max_iter {
            break SolveStatus::MaxIterations;
        }
        let Ok(lu) = lin.factor(cfg.pivot_threshold) else {
            break SolveStatus::SingularJacobian;
        };
        x = lin.step(&lu);
        k += 1;
        if x.iter().any(|v| !v.is_finite()) {
            history.push(f64::NAN);
            break SolveStatus::Diverged;
        }
    };
    Ok(SolveReport {
        status,
        x_final: Vector::from_vec_unchecked(x),
        iterations: k,
        residual_history: history,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}
