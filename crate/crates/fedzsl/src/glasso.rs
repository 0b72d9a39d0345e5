//! Sparse inverse covariance estimation for the class-similarity target.
//!
//! The distillation target is the regularized covariance `Σ = Θ̂⁻¹`, where
//! `Θ̂` minimizes the ℓ1-penalized negative log-likelihood
//!
//! ```text
//! tr(S·Θ) − log det(Θ) + δ·‖Θ‖₁
//! ```
//!
//! over positive definite matrices. `S` is the sample covariance of the
//! row-normalized attribute table with classes as variables and attribute
//! dimensions as observations.
//!
//! The solver is a primal block coordinate descent: one row/column of `Θ` at
//! a time, each an ℓ1 subproblem solved by cyclic coordinate descent. Every
//! block step minimizes the objective restricted to that row/column, so the
//! objective is non-increasing across sweeps. The working covariance
//! `W = Θ⁻¹` is maintained by rank-one updates; termination is on the max
//! absolute change of `W` between sweeps.

use ndarray::{Array1, Array2, ArrayView2};

use crate::data::AttributeTable;
use crate::error::{Error, Result};
use crate::linalg::{max_asymmetry, Cholesky};

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GlassoConfig {
    /// ℓ1 penalty δ.
    pub delta: f64,
    /// Sweep termination threshold on the working covariance change.
    pub tol: f64,
    /// Maximum number of sweeps.
    pub max_iter: usize,
    /// Penalize the diagonal of Θ as well as the off-diagonals.
    pub penalize_diagonal: bool,
}

impl Default for GlassoConfig {
    fn default() -> Self {
        Self { delta: 0.01, tol: 1e-7, max_iter: 200, penalize_diagonal: true }
    }
}

/// Result of one Graphical Lasso solve.
#[derive(Debug, Clone)]
pub struct GlassoSolution {
    /// Estimated precision matrix Θ̂.
    pub theta: Array2<f64>,
    /// Sweeps used.
    pub iterations: usize,
    /// Final KKT residual (subgradient violation, see [`kkt_residual_with`]).
    pub residual: f64,
    /// Whether the working-covariance change fell below `tol`.
    pub converged: bool,
    /// Objective value after each sweep.
    pub objective_trace: Vec<f64>,
}

/// Normalized covariance estimate: inputs, precision and its inverse.
#[derive(Debug, Clone)]
pub struct SimilarityEstimate {
    /// Sample covariance of the normalized attributes.
    pub s: Array2<f64>,
    /// Estimated precision Θ̂.
    pub theta: Array2<f64>,
    /// Σ = Θ̂⁻¹, the class-similarity matrix.
    pub sigma: Array2<f64>,
    /// Penalty the estimate was produced with.
    pub delta: f64,
    /// Solver sweeps used.
    pub iterations: usize,
    /// Final KKT residual.
    pub residual: f64,
}

impl SimilarityEstimate {
    /// Row `j` of Σ: similarity of class `j` to every class, the
    /// distillation target source for samples of class `j`.
    pub fn similarity_row(&self, class: usize) -> ndarray::ArrayView1<'_, f64> {
        self.sigma.row(class)
    }
}

/// Z-score each class row across its attribute dimensions (population
/// variance, so the normalized rows have exactly zero mean and unit
/// variance). A constant row has no direction and is rejected.
pub fn normalize_attributes(table: &AttributeTable) -> Result<AttributeTable> {
    if table.d_a() < 2 {
        return Err(Error::InvalidArgument(
            "normalization needs at least 2 attribute dimensions".into(),
        ));
    }
    let d = table.d_a() as f64;
    let mut out = table.matrix().clone();
    for (j, mut row) in out.rows_mut().into_iter().enumerate() {
        let mean = row.sum() / d;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d;
        if var == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "class {} has zero attribute variance",
                j
            )));
        }
        let sd = var.sqrt();
        row.mapv_inplace(|v| (v - mean) / sd);
    }
    AttributeTable::new(out)
}

/// Sample covariance over classes: `S_jk = (1/d_a) Σ_c a_j[c]·a_k[c]`.
/// With z-scored rows the diagonal is exactly 1.
pub fn sample_covariance(table: &AttributeTable) -> Array2<f64> {
    let a = table.matrix();
    let mut s = a.dot(&a.t());
    s.mapv_inplace(|v| v / table.d_a() as f64);
    // symmetrize against dot round-off
    let n = s.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// The penalized negative log-likelihood the solver minimizes.
pub fn glasso_objective(
    s: ArrayView2<'_, f64>,
    theta: ArrayView2<'_, f64>,
    delta: f64,
    penalize_diagonal: bool,
) -> Result<f64> {
    let log_det = Cholesky::new(theta)?.log_det();
    let trace: f64 = (0..s.nrows())
        .map(|i| s.row(i).dot(&theta.column(i)))
        .sum();
    let mut penalty = 0.0;
    for i in 0..theta.nrows() {
        for j in 0..theta.ncols() {
            if i != j || penalize_diagonal {
                penalty += theta[(i, j)].abs();
            }
        }
    }
    Ok(trace - log_det + delta * penalty)
}

/// Solve the Graphical Lasso for `Θ̂`.
///
/// Non-convergence within `max_iter` sweeps is reported through the
/// `converged` flag, not as an error; the best iterate and its residual are
/// returned either way.
pub fn graphical_lasso(s: ArrayView2<'_, f64>, config: &GlassoConfig) -> Result<GlassoSolution> {
    let n = s.nrows();
    if n == 0 {
        return Err(Error::Empty("covariance matrix".into()));
    }
    if s.ncols() != n {
        return Err(Error::Dimension(format!("covariance must be square, got {}x{}", n, s.ncols())));
    }
    if max_asymmetry(s) > 1e-10 {
        return Err(Error::InvalidArgument("covariance matrix is not symmetric".into()));
    }
    if config.delta < 0.0 {
        return Err(Error::InvalidArgument("delta must be ≥ 0".into()));
    }
    if config.delta == 0.0 {
        // unpenalized MLE needs a nonsingular S
        Cholesky::new(s).map_err(|_| {
            Error::Numerical("delta = 0 requires a nonsingular covariance".into())
        })?;
    }
    let delta = config.delta;
    let diag_delta = if config.penalize_diagonal { delta } else { 0.0 };

    // Θ₀ = diag(1/(S_jj + δ)), W₀ = Θ₀⁻¹.
    let mut theta = Array2::<f64>::zeros((n, n));
    let mut w = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let pivot = s[(j, j)] + diag_delta;
        if pivot <= 0.0 {
            return Err(Error::Numerical(format!(
                "nonpositive diagonal S[{j},{j}] + δ = {pivot}"
            )));
        }
        theta[(j, j)] = 1.0 / pivot;
        w[(j, j)] = pivot;
    }

    let mut objective_trace =
        vec![glasso_objective(s, theta.view(), delta, config.penalize_diagonal)?];
    let mut converged = false;
    let mut iterations = 0;

    let inner_tol = (config.tol * 0.1).max(f64::EPSILON);
    let mut u = Array1::<f64>::zeros(n.saturating_sub(1));
    let mut p = Array2::<f64>::zeros((n.saturating_sub(1), n.saturating_sub(1)));

    for sweep in 0..config.max_iter {
        iterations = sweep + 1;
        let w_before = w.clone();
        for col in 0..n {
            if n == 1 {
                break; // the initialization is already the scalar optimum
            }
            update_column(s, &mut theta, &mut w, &mut u, &mut p, col, delta, diag_delta, inner_tol);
        }
        let objective = glasso_objective(s, theta.view(), delta, config.penalize_diagonal)?;
        debug_assert!(
            objective <= objective_trace.last().unwrap() + 1e-9,
            "objective increased: {} -> {}",
            objective_trace.last().unwrap(),
            objective
        );
        objective_trace.push(objective);
        let change = w
            .iter()
            .zip(w_before.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if change < config.tol {
            converged = true;
            break;
        }
    }

    let residual = kkt_residual_with(s, theta.view(), delta, config.penalize_diagonal)?;
    Ok(GlassoSolution { theta, iterations, residual, converged, objective_trace })
}

/// One primal block update of row/column `col`.
///
/// With `Θ11` the remainder and `P = Θ11⁻¹` (recovered from the working
/// covariance), the restricted objective over the off-diagonal block `u`
/// and pivot is minimized exactly: the Schur complement is pinned at
/// `1/(s22 + δ_diag)` and `u` solves an ℓ1 problem by cyclic coordinate
/// descent.
#[allow(clippy::too_many_arguments)]
fn update_column(
    s: ArrayView2<'_, f64>,
    theta: &mut Array2<f64>,
    w: &mut Array2<f64>,
    u: &mut Array1<f64>,
    p: &mut Array2<f64>,
    col: usize,
    delta: f64,
    diag_delta: f64,
    inner_tol: f64,
) {
    let n = s.nrows();
    let m = n - 1;
    let others: Vec<usize> = (0..n).filter(|&i| i != col).collect();

    // P = Θ11⁻¹ = W11 − w12·w12ᵀ / w22
    let w22 = w[(col, col)];
    for (ri, &i) in others.iter().enumerate() {
        for (rj, &j) in others.iter().enumerate() {
            p[(ri, rj)] = w[(i, j)] - w[(i, col)] * w[(j, col)] / w22;
        }
        u[ri] = theta[(i, col)];
    }

    let c = s[(col, col)] + diag_delta;
    // lasso: minimize c·uᵀPu + 2·s12ᵀu + 2δ‖u‖₁
    let mut pu = Array1::<f64>::zeros(m);
    for i in 0..m {
        pu[i] = p.row(i).dot(&u.view());
    }
    for _ in 0..10_000 {
        let mut max_change = 0.0f64;
        for i in 0..m {
            let old = u[i];
            let r = pu[i] - p[(i, i)] * old;
            let z = -(s[(others[i], col)] + c * r);
            let new = soft_threshold(z, delta) / (c * p[(i, i)]);
            if new != old {
                let d = new - old;
                for k in 0..m {
                    pu[k] += p[(k, i)] * d;
                }
                u[i] = new;
                max_change = max_change.max(d.abs());
            }
        }
        if max_change < inner_tol {
            break;
        }
    }

    // recompute q = P·u once to shed drift accumulated in pu
    let mut q = Array1::<f64>::zeros(m);
    for i in 0..m {
        q[i] = p.row(i).dot(&u.view());
    }
    let t = 1.0 / c; // Schur complement at the block optimum
    let theta22 = t + u.dot(&q);

    for (ri, &i) in others.iter().enumerate() {
        theta[(i, col)] = u[ri];
        theta[(col, i)] = u[ri];
    }
    theta[(col, col)] = theta22;

    // W blocks from the block inverse: w22 = c, w12 = −c·q, W11 = P + c·qqᵀ
    w[(col, col)] = c;
    for (ri, &i) in others.iter().enumerate() {
        let v = -c * q[ri];
        w[(i, col)] = v;
        w[(col, i)] = v;
    }
    for (ri, &i) in others.iter().enumerate() {
        for (rj, &j) in others.iter().enumerate() {
            w[(i, j)] = p[(ri, rj)] + c * q[ri] * q[rj];
        }
    }
}

fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Maximum subgradient violation of the penalized objective, with the
/// diagonal penalized as the objective is written.
///
/// For `Θ_jk ≠ 0` the stationarity condition is
/// `(Θ⁻¹ − S)_jk = δ·sign(Θ_jk)`; for `Θ_jk = 0` it is
/// `|(Θ⁻¹ − S)_jk| ≤ δ`. The returned scalar is the largest violation over
/// all entries.
pub fn kkt_residual(s: ArrayView2<'_, f64>, theta: ArrayView2<'_, f64>, delta: f64) -> Result<f64> {
    kkt_residual_with(s, theta, delta, true)
}

/// As [`kkt_residual`], with the diagonal-penalty convention explicit.
pub fn kkt_residual_with(
    s: ArrayView2<'_, f64>,
    theta: ArrayView2<'_, f64>,
    delta: f64,
    penalize_diagonal: bool,
) -> Result<f64> {
    let inv = Cholesky::new(theta)?.inverse();
    let n = s.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let g = inv[(i, j)] - s[(i, j)];
            let d = if i != j || penalize_diagonal { delta } else { 0.0 };
            let violation = if theta[(i, j)] != 0.0 {
                (g - d * theta[(i, j)].signum()).abs()
            } else {
                (g.abs() - d).max(0.0)
            };
            worst = worst.max(violation);
        }
    }
    Ok(worst)
}

/// Full pipeline: normalize the attribute table, form the class covariance,
/// solve for Θ̂ and invert it into the similarity matrix Σ.
pub fn estimate_similarity(table: &AttributeTable, config: &GlassoConfig) -> Result<SimilarityEstimate> {
    let normalized = normalize_attributes(table)?;
    let s = sample_covariance(&normalized);
    let solution = graphical_lasso(s.view(), config)?;
    let sigma = Cholesky::new(solution.theta.view())?.inverse();
    Ok(SimilarityEstimate {
        s,
        theta: solution.theta,
        sigma,
        delta: config.delta,
        iterations: solution.iterations,
        residual: solution.residual,
    })
}
