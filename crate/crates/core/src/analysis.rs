//! Checkable existence conditions, solution bounds, and sampling
//! falsifiers for structured tensor classes.
//!
//! The falsifiers search for a counterexample to a universally quantified
//! property. Finding one refutes the property; not finding one proves
//! nothing, and [`Verdict::NotFalsified`] carries that meaning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::linalg::LuFactorization;
use crate::rng;
use crate::tensor::DenseTensor;
use crate::vector::{dot, norm2, Vector};

const PIVOT_THRESHOLD: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Left-inverse existence test
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem35Check {
    /// Even and equal orders.
    pub applicable: bool,
    pub reason: Option<String>,
    pub majorization_invertible: bool,
    pub row_diagonal: bool,
    pub left_inverse_exists: bool,
    /// `||M(A)^{-1} · B||_inf`, present when the left inverse exists.
    pub g_inf_norm: Option<f64>,
    pub holds: bool,
}

/// Tests `||M(A)^{-1} · B||_inf < 1` for a row-diagonal `A` with
/// invertible majorization matrix. When it holds (and the orders are equal
/// and even) the equation has a solution for every right-hand side.
pub fn theorem35_check(a: &DenseTensor, b: &DenseTensor, row_tol: f64) -> Result<Theorem35Check> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch("existence check tensors", a.dim(), b.dim()));
    }
    let reason = if a.order() != b.order() {
        Some(format!("orders differ (p = {}, q = {})", a.order(), b.order()))
    } else if !a.order().is_multiple_of(2) {
        Some(format!("order p = {} is odd", a.order()))
    } else {
        None
    };
    let m = a.majorization_matrix()?;
    let row_diagonal = a.is_row_diagonal(row_tol);
    let lu = LuFactorization::factor(&m, PIVOT_THRESHOLD).ok();
    let left_inverse_exists = row_diagonal && lu.is_some();
    let g_inf_norm = match (&lu, left_inverse_exists) {
        (Some(lu), true) => {
            let inv = DenseTensor::from_matrix(&lu.inverse())?;
            Some(inv.shao_product(b)?.inf_norm())
        }
        _ => None,
    };
    let applicable = reason.is_none();
    Ok(Theorem35Check {
        applicable,
        reason,
        majorization_invertible: lu.is_some(),
        row_diagonal,
        left_inverse_exists,
        g_inf_norm,
        holds: applicable && g_inf_norm.is_some_and(|g| g < 1.0),
    })
}

// ---------------------------------------------------------------------------
// Sphere descent
// ---------------------------------------------------------------------------

trait SphereObjective {
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }
}

/// Projects onto the unit sphere, or onto its nonnegative part.
fn retract(y: &mut [f64], nonneg: bool) -> bool {
    if nonneg {
        y.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    let n = norm2(y);
    if !(n > 1e-300) {
        return false;
    }
    y.iter_mut().for_each(|v| *v /= n);
    true
}

/// Projected gradient with backtracking on the (nonnegative) unit sphere.
fn sphere_descent(obj: &impl SphereObjective, mut x: Vec<f64>, nonneg: bool, max_steps: usize) -> (Vec<f64>, f64) {
    retract(&mut x, nonneg);
    let (mut fx, mut g) = obj.value_grad(&x);
    let mut step = 1.0 / (norm2(&g) + 1e-12);
    for _ in 0..max_steps {
        let radial = dot(&x, &g);
        let rg: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let mut accepted = false;
        for _ in 0..60 {
            let mut y: Vec<f64> = x.iter().zip(&rg).map(|(xi, gi)| xi - step * gi).collect();
            if !retract(&mut y, nonneg) {
                step *= 0.5;
                continue;
            }
            let moved: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
            let fy = obj.value(&y);
            if fy <= fx - 1e-4 * moved / step {
                if moved < 1e-30 {
                    return (x, fx);
                }
                x = y;
                (fx, g) = obj.value_grad(&x);
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || fx <= 0.0 {
            break;
        }
    }
    (x, fx)
}

/// `||(A + t I) x^{p-1} + B|x|^{p-1}||^2` on the sphere, for a fixed shift
/// `t` or with `t >= 0` chosen optimally at each point.
struct ShiftedResidual<'a> {
    a: &'a DenseTensor,
    b: Option<&'a DenseTensor>,
    shift: Shift,
}

#[derive(Clone, Copy)]
enum Shift {
    Fixed(f64),
    Optimal,
}

impl ShiftedResidual<'_> {
    /// Residual vector, the shift used, and the Jacobian of the unshifted map.
    fn evaluate(&self, x: &[f64]) -> (Vec<f64>, f64, crate::vector::Matrix) {
        let p = self.a.order();
        let (mut jac, mut r) = self.a.contract_pair(x).expect("dimension checked by caller");
        if let Some(b) = self.b {
            let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            let signs: Vec<f64> = x.iter().map(|&v| crate::solver::sign(v)).collect();
            let (bm, bv) = b.contract_pair(&abs).expect("dimension checked by caller");
            r.iter_mut().zip(&bv).for_each(|(ri, bi)| *ri += bi);
            jac = jac.add(&bm.mul_diag_right(&signs).expect("square")).expect("square");
        }
        let u: Vec<f64> = x.iter().map(|v| v.powi(p as i32 - 1)).collect();
        let t = match self.shift {
            Shift::Fixed(t) => t,
            Shift::Optimal => {
                let uu = dot(&u, &u);
                if uu > 0.0 {
                    (-dot(&u, &r) / uu).max(0.0)
                } else {
                    0.0
                }
            }
        };
        r.iter_mut().zip(&u).for_each(|(ri, ui)| *ri += t * ui);
        for (i, xi) in x.iter().enumerate() {
            let d = jac.get(i, i) + t * xi.powi(p as i32 - 2);
            jac.set(i, i, d);
        }
        (r, t, jac)
    }
}

impl SphereObjective for ShiftedResidual<'_> {
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let p = self.a.order() as f64;
        let (r, _, jac) = self.evaluate(x);
        let grad = jac.transpose().mul_slice(&r).into_iter().map(|v| 2.0 * (p - 1.0) * v).collect();
        (dot(&r, &r), grad)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let (r, _, _) = self.evaluate(x);
        dot(&r, &r)
    }
}

/// `A x^p` with `A` fully symmetric; gradient `p A x^{p-1}`.
struct FormValue<'a>(&'a DenseTensor);

impl SphereObjective for FormValue<'_> {
    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let p = self.0.order() as f64;
        let y = self.0.contract_to_vector(x).expect("dimension checked by caller");
        (dot(&y, x), y.iter().map(|v| p * v).collect())
    }
}

// ---------------------------------------------------------------------------
// lambda(A) = min_{||x|| = 1} ||A x^{p-1}||^2
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMethod {
    Grid,
    Multistart,
}

/// An estimate of `lambda(A)`.
///
/// Both methods evaluate the objective at actual sphere points, so `value`
/// is never below the true minimum: it is an upper estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub argmin: Vector,
    pub method: LambdaMethod,
}

#[derive(Clone, Debug)]
pub struct LambdaOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_steps: usize,
    pub execution: Execution,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            restarts: 32,
            seed: 0,
            max_steps: 500,
            execution: Execution::default(),
        }
    }
}

pub fn estimate_lambda(a: &DenseTensor, budget: usize, seed: u64) -> Result<LambdaEstimate> {
    estimate_lambda_with(
        a,
        &LambdaOptions {
            restarts: budget,
            seed,
            ..LambdaOptions::default()
        },
    )
}

/// Multistart projected gradient on `||A x^{p-1}||^2`. Restart `k` starts
/// from a sphere point drawn from stream `(seed, k)`, so the result does not
/// depend on scheduling.
pub fn estimate_lambda_with(a: &DenseTensor, opts: &LambdaOptions) -> Result<LambdaEstimate> {
    if opts.restarts < 1 {
        return Err(Error::InvalidConfig("lambda estimation needs a budget of at least 1 restart".into()));
    }
    let sym = a.semi_symmetrize()?;
    let obj = ShiftedResidual {
        a: &sym,
        b: None,
        shift: Shift::Fixed(0.0),
    };
    let n = a.dim();
    let runs = map_indexed(opts.restarts, opts.execution, |k| {
        let mut r = rng::stream(opts.seed, k as u64);
        let x0 = rng::unit_sphere(&mut r, n);
        sphere_descent(&obj, x0, false, opts.max_steps)
    });
    let (x, value) = best_of(runs);
    Ok(LambdaEstimate {
        value,
        argmin: Vector::from_vec_unchecked(x),
        method: LambdaMethod::Multistart,
    })
}

/// Minimum of `||A x^{p-1}||^2` over a deterministic point set on the
/// sphere: `±1` for `n = 1`, `points` equally spaced angles for `n = 2`,
/// a Fibonacci lattice of `points` points for `n = 3`.
pub fn lambda_grid(a: &DenseTensor, points: usize) -> Result<LambdaEstimate> {
    if a.order() < 2 {
        return Err(Error::Order {
            context: "lambda grid",
            requirement: ">= 2",
            order: a.order(),
        });
    }
    let grid = sphere_grid(a.dim(), points)?;
    let mut best = (f64::INFINITY, Vec::new());
    for x in grid {
        let y = a.contract_to_vector(&x)?;
        let v = dot(&y, &y);
        if v < best.0 {
            best = (v, x);
        }
    }
    Ok(LambdaEstimate {
        value: best.0,
        argmin: Vector::from_vec_unchecked(best.1),
        method: LambdaMethod::Grid,
    })
}

pub fn sphere_grid(n: usize, points: usize) -> Result<Vec<Vec<f64>>> {
    match n {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..points)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / points as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            Ok((0..points)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / points as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect())
        }
        _ => Err(Error::InvalidConfig(format!(
            "sphere grid supports dimension 1 to 3, got {n}"
        ))),
    }
}

fn best_of(runs: Vec<(Vec<f64>, f64)>) -> (Vec<f64>, f64) {
    runs.into_iter()
        .fold(None, |best: Option<(Vec<f64>, f64)>, cur| match best {
            Some(b) if b.1 <= cur.1 || cur.1.is_nan() => Some(b),
            _ => Some(cur),
        })
        .expect("at least one run")
}

// ---------------------------------------------------------------------------
// Solution norm bounds for p == q
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionBounds {
    /// Bound on `||x||` over `{x : ||F(x)|| <= sigma}`; absent unless
    /// `lambda > 0` and `||B||_F < sqrt(lambda)`.
    pub upper: Option<f64>,
    /// Bound `||x|| >= (||b|| / (||A||_F + ||B||_F))^{1/(p-1)}` for exact
    /// solutions; 0 when both tensors vanish.
    pub lower: f64,
}

pub fn solution_bounds(a: &DenseTensor, b: &DenseTensor, rhs: &Vector, sigma: f64, lambda: f64) -> Result<SolutionBounds> {
    if a.order() != b.order() {
        return Err(Error::Order {
            context: "solution bounds (order of B must equal order of A)",
            requirement: "== p",
            order: b.order(),
        });
    }
    if a.dim() != b.dim() || a.dim() != rhs.dim() {
        return Err(Error::mismatch("solution bounds", a.dim(), if a.dim() != b.dim() { b.dim() } else { rhs.dim() }));
    }
    let e = 1.0 / (a.order() as f64 - 1.0);
    let bf = b.frob_norm();
    let bn = rhs.norm();
    let upper = (lambda > 0.0 && bf < lambda.sqrt())
        .then(|| (sigma + bn).powf(e) / (lambda.powf(e / 2.0) - bf.powf(e)));
    let denom = a.frob_norm() + bf;
    let lower = if denom > 0.0 { (bn / denom).powf(e) } else { 0.0 };
    Ok(SolutionBounds { upper, lower })
}

// ---------------------------------------------------------------------------
// Falsifiers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureProperty {
    StrictlyCopositive,
    PTensor,
    HPlus,
    WHPlus,
    Nonsingular,
    Assumption31,
}

impl StructureProperty {
    pub const ALL: [StructureProperty; 6] = [
        StructureProperty::StrictlyCopositive,
        StructureProperty::PTensor,
        StructureProperty::HPlus,
        StructureProperty::WHPlus,
        StructureProperty::Nonsingular,
        StructureProperty::Assumption31,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureProperty::StrictlyCopositive => "strictly-copositive",
            StructureProperty::PTensor => "p-tensor",
            StructureProperty::HPlus => "h-plus",
            StructureProperty::WHPlus => "wh-plus",
            StructureProperty::Nonsingular => "nonsingular",
            StructureProperty::Assumption31 => "assumption31",
        }
    }

    /// Properties whose violation is an equation `G(x, t) = 0`, measured by
    /// a residual norm at unit-norm `x`.
    fn is_equation(self) -> bool {
        !matches!(self, StructureProperty::StrictlyCopositive | StructureProperty::PTensor)
    }

    fn nonnegative_domain(self) -> bool {
        matches!(self, StructureProperty::StrictlyCopositive | StructureProperty::WHPlus)
    }

    fn uses_shift(self) -> bool {
        matches!(
            self,
            StructureProperty::HPlus | StructureProperty::WHPlus | StructureProperty::Assumption31
        )
    }
}

impl fmt::Display for StructureProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureProperty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '+')
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Ok(match key.as_str() {
            "copositive" | "strictlycopositive" => StructureProperty::StrictlyCopositive,
            "p" | "ptensor" => StructureProperty::PTensor,
            "h+" | "hplus" => StructureProperty::HPlus,
            "wh+" | "whplus" => StructureProperty::WHPlus,
            "nonsingular" => StructureProperty::Nonsingular,
            "assumption31" | "assumption" => StructureProperty::Assumption31,
            _ => {
                return Err(Error::Unknown {
                    kind: "property",
                    name: s.to_string(),
                })
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Falsified,
    /// No counterexample found within the budget. Not a certificate.
    NotFalsified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vector,
    pub t: Option<f64>,
    /// The violation measure at `(x, t)`, see [`violation_value`].
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifierVerdict {
    pub property: StructureProperty,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub samples_used: usize,
    /// The best violation measure seen, falsified or not.
    pub best_value: f64,
    pub certificate: bool,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct FalsifierOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub execution: Execution,
    pub max_steps: usize,
}

impl Default for FalsifierOptions {
    fn default() -> Self {
        FalsifierOptions {
            samples: 2000,
            seed: 0,
            tol: 1e-8,
            execution: Execution::default(),
            max_steps: 300,
        }
    }
}

/// Shift grid for the H+-type searches: 0 followed by 24 log-spaced values
/// from 1e-3 to 1e3.
pub fn shift_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..24).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 23.0)))
        .collect()
}

/// The quantity whose sign or size decides a violation at `(x, t)`:
///
/// * strictly copositive: `A x^p` (violated when `<= -tol`, `x >= 0`)
/// * P-tensor: `max_i x_i (A x^{p-1})_i` (violated when `<= -tol`)
/// * nonsingular: `||A x^{p-1}||` at `x / ||x||` (violated when `<= tol`)
/// * H+ / WH+: `||(A + t I) x^{p-1}||` at `x / ||x||`
/// * assumption31: `||(A + t I) x^{p-1} + B|x|^{p-1}||` at `x / ||x||`
pub fn violation_value(
    a: &DenseTensor,
    b: Option<&DenseTensor>,
    property: StructureProperty,
    x: &[f64],
    t: Option<f64>,
) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::mismatch("falsifier witness", a.dim(), x.len()));
    }
    let nx = norm2(x);
    if !(nx > 0.0) {
        return Err(Error::Domain("witness must be nonzero".into()));
    }
    let u: Vec<f64> = x.iter().map(|v| v / nx).collect();
    Ok(match property {
        StructureProperty::StrictlyCopositive => a.form_value(x)?,
        StructureProperty::PTensor => {
            let y = a.contract_to_vector(x)?;
            x.iter().zip(y.iter()).map(|(xi, yi)| xi * yi).fold(f64::NEG_INFINITY, f64::max)
        }
        StructureProperty::Nonsingular => a.contract_to_vector(&u)?.norm(),
        StructureProperty::HPlus | StructureProperty::WHPlus | StructureProperty::Assumption31 => {
            let t = t.unwrap_or(0.0);
            let b = if property == StructureProperty::Assumption31 {
                Some(b.ok_or_else(|| Error::InvalidConfig("assumption31 needs the tensor B".into()))?)
            } else {
                None
            };
            let obj = ShiftedResidual {
                a,
                b,
                shift: Shift::Fixed(t),
            };
            obj.value(&u).sqrt()
        }
    })
}

/// Whether a witness violates `property` beyond `tol`, including its
/// domain constraints (`x >= 0` where required, `t >= 0`).
pub fn is_violation(
    a: &DenseTensor,
    b: Option<&DenseTensor>,
    property: StructureProperty,
    x: &[f64],
    t: Option<f64>,
    tol: f64,
) -> Result<bool> {
    if property.nonnegative_domain() && x.iter().any(|v| *v < 0.0) {
        return Ok(false);
    }
    if t.is_some_and(|t| t < 0.0) {
        return Ok(false);
    }
    let v = violation_value(a, b, property, x, t)?;
    Ok(if property.is_equation() { v <= tol } else { v <= -tol })
}

/// Random search for a counterexample to `property`.
///
/// Inequality properties sample the simplex (copositivity) or the sphere
/// (P-tensor), after trying the coordinate directions, and polish the best
/// copositivity candidates by descent. Equation properties run projected
/// gradient descent on the squared residual from `samples` random starts;
/// H+-type starts cycle through [`shift_grid`] for a fixed-shift phase and
/// are then polished with the optimal shift.
pub fn falsify_structure(
    a: &DenseTensor,
    b: Option<&DenseTensor>,
    property: StructureProperty,
    opts: &FalsifierOptions,
) -> Result<FalsifierVerdict> {
    if opts.samples < 1 {
        return Err(Error::InvalidConfig("falsifier needs at least one sample".into()));
    }
    if a.order() < 2 {
        return Err(Error::Order {
            context: "falsifier",
            requirement: ">= 2",
            order: a.order(),
        });
    }
    if property == StructureProperty::Assumption31 {
        let bt = b.ok_or_else(|| Error::InvalidConfig("assumption31 needs the tensor B".into()))?;
        if bt.order() != a.order() || bt.dim() != a.dim() {
            return Err(Error::Shape(format!(
                "assumption31 needs B with the order and dim of A ({}, {}), got ({}, {})",
                a.order(),
                a.dim(),
                bt.order(),
                bt.dim()
            )));
        }
    }
    let n = a.dim();
    let candidates: Vec<(Vec<f64>, Option<f64>, f64)> = match property {
        StructureProperty::StrictlyCopositive => {
            let sym = a.symmetrize();
            let mut pts: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            let mut r = rng::stream(opts.seed, 0);
            while pts.len() < opts.samples {
                pts.push(rng::simplex(&mut r, n));
            }
            let mut scored: Vec<(Vec<f64>, Option<f64>, f64)> = pts
                .into_iter()
                .map(|x| {
                    let v = sym.form_value(&x).expect("dim matches");
                    (x, None, v)
                })
                .collect();
            let mut order: Vec<usize> = (0..scored.len()).collect();
            order.sort_by(|&i, &j| scored[i].2.total_cmp(&scored[j].2));
            let polish: Vec<Vec<f64>> = order.iter().take(4).map(|&i| scored[i].0.clone()).collect();
            let polished = map_indexed(polish.len(), opts.execution, |k| {
                let (x, _) = sphere_descent(&FormValue(&sym), polish[k].clone(), true, opts.max_steps);
                let v = sym.form_value(&x).expect("dim matches");
                (x, None, v)
            });
            scored.extend(polished);
            scored
        }
        StructureProperty::PTensor => {
            let mut pts: Vec<Vec<f64>> = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    pts.push((0..n).map(|j| if i == j { s } else { 0.0 }).collect());
                }
            }
            let mut r = rng::stream(opts.seed, 0);
            while pts.len() < opts.samples.max(2 * n) {
                pts.push(rng::unit_sphere(&mut r, n));
            }
            pts.into_iter()
                .map(|x| {
                    let v = violation_value(a, b, property, &x, None).expect("dim matches");
                    (x, None, v)
                })
                .collect()
        }
        _ => {
            let sym_a = a.semi_symmetrize()?;
            let sym_b = match (property, b) {
                (StructureProperty::Assumption31, Some(b)) => Some(b.semi_symmetrize()?),
                _ => None,
            };
            let grid = shift_grid();
            let nonneg = property.nonnegative_domain();
            map_indexed(opts.samples, opts.execution, |k| {
                let mut r = rng::stream(opts.seed, k as u64);
                let mut x0 = rng::unit_sphere(&mut r, n);
                if nonneg {
                    x0.iter_mut().for_each(|v| *v = v.abs());
                }
                if !property.uses_shift() {
                    let obj = ShiftedResidual {
                        a: &sym_a,
                        b: None,
                        shift: Shift::Fixed(0.0),
                    };
                    let (x, f) = sphere_descent(&obj, x0, false, opts.max_steps);
                    return (x, None, f.max(0.0).sqrt());
                }
                let fixed = ShiftedResidual {
                    a: &sym_a,
                    b: sym_b.as_ref(),
                    shift: Shift::Fixed(grid[k % grid.len()]),
                };
                let (x1, _) = sphere_descent(&fixed, x0, nonneg, opts.max_steps);
                let free = ShiftedResidual {
                    shift: Shift::Optimal,
                    ..fixed
                };
                let (x2, _) = sphere_descent(&free, x1, nonneg, opts.max_steps);
                let (_, t, _) = free.evaluate(&x2);
                let v = violation_value(a, b, property, &x2, Some(t)).expect("dim matches");
                (x2, Some(t), v)
            })
        }
    };

    let samples_used = candidates.len();
    let mut best: Option<(Vec<f64>, Option<f64>, f64)> = None;
    for c in candidates {
        if c.2.is_nan() {
            continue;
        }
        if best.as_ref().is_none_or(|bst| c.2 < bst.2) {
            best = Some(c);
        }
    }
    let (x, t, value) = best.ok_or_else(|| Error::Domain("every falsifier sample was non-finite".into()))?;
    let falsified = is_violation(a, b, property, &x, t, opts.tol)?;
    let witness_value = violation_value(a, b, property, &x, t)?;
    Ok(FalsifierVerdict {
        property,
        verdict: if falsified { Verdict::Falsified } else { Verdict::NotFalsified },
        witness: falsified.then(|| Witness {
            x: Vector::from_vec_unchecked(x),
            t,
            value: witness_value,
        }),
        samples_used,
        best_value: value,
        certificate: false,
        note: if falsified {
            format!("witness violates {property} beyond tol {:e}", opts.tol)
        } else {
            format!(
                "no violation of {property} found in {samples_used} samples; this is not a proof that the property holds"
            )
        },
    })
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ConditionOptions {
    pub lambda_restarts: usize,
    pub seed: u64,
    /// Residual level of the bounded set; the solver tolerance by default.
    pub sigma: f64,
    pub row_tol: f64,
    pub grid_points: usize,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            lambda_restarts: 32,
            seed: 0,
            sigma: 1e-5,
            row_tol: 0.0,
            grid_points: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub theorem35: Theorem35Check,
    pub left_inverse_exists: bool,
    pub g_inf_norm: Option<f64>,
    pub theorem35_holds: bool,
    pub lambda_a: f64,
    pub lambda_method: LambdaMethod,
    pub lambda_argmin: Vector,
    /// Grid value used as a cross-check for `n <= 3`.
    pub lambda_grid: Option<f64>,
    pub upper_bound: Option<f64>,
    pub lower_bound: Option<f64>,
    /// True when lambda comes from local search only (`n > 3`), in which
    /// case the upper bound may be invalid.
    pub bounds_heuristic: bool,
}

pub fn condition_report(
    a: &DenseTensor,
    b: &DenseTensor,
    rhs: Option<&Vector>,
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    let th = theorem35_check(a, b, opts.row_tol)?;
    let mut lambda = estimate_lambda_with(
        a,
        &LambdaOptions {
            restarts: opts.lambda_restarts,
            seed: opts.seed,
            ..LambdaOptions::default()
        },
    )?;
    let mut lambda_grid_value = None;
    if a.dim() <= 3 {
        let g = lambda_grid(a, opts.grid_points)?;
        lambda_grid_value = Some(g.value);
        if g.value < lambda.value {
            lambda = g;
        }
    }
    let (upper_bound, lower_bound) = match rhs {
        Some(rhs) if a.order() == b.order() => {
            let sb = solution_bounds(a, b, rhs, opts.sigma, lambda.value)?;
            (sb.upper, Some(sb.lower))
        }
        _ => (None, None),
    };
    Ok(ConditionReport {
        left_inverse_exists: th.left_inverse_exists,
        g_inf_norm: th.g_inf_norm,
        theorem35_holds: th.holds,
        theorem35: th,
        lambda_a: lambda.value,
        lambda_method: lambda.method,
        lambda_argmin: lambda.argmin,
        lambda_grid: lambda_grid_value,
        upper_bound,
        lower_bound,
        bounds_heuristic: a.dim() > 3,
    })
}
