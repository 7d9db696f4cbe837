//! Restricted linear SVM over the responses of the selected weak learners.
//!
//! The primal is `min ½(‖w‖² + b²) + C Σ ξᵢ` subject to
//! `yᵢ(wᵀΦ(xᵢ) + b) ≥ 1 − ξᵢ`, solved in the dual by coordinate descent.
//! The bias is an extra constant feature, so it is regularized and the dual
//! is box-constrained only (`0 ≤ α ≤ C`, no `yᵀα = 0`). Objectives and the
//! KKT reconstruction `w = Σᵢ yᵢαᵢΦ(xᵢ)` include that bias coordinate.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed;

/// `J × m` responses: row `j` is learner `j` evaluated on every sample, so
/// column `i` is `Φ(xᵢ)`. The kernel `HᵀH` is never formed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResponseMatrix {
    rows: Vec<Vec<f64>>,
    m: usize,
}

impl ResponseMatrix {
    pub fn new(m: usize) -> Self {
        Self {
            rows: Vec::new(),
            m,
        }
    }

    pub fn from_rows(m: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut h = Self::new(m);
        for r in rows {
            h.push_row(r)?;
        }
        Ok(h)
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response row"));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn n_learners(&self) -> usize {
        self.rows.len()
    }

    pub fn n_samples(&self) -> usize {
        self.m
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn contains_row(&self, row: &[f64]) -> bool {
        self.rows.iter().any(|r| r.as_slice() == row)
    }

    /// `Σⱼ wⱼ Hⱼᵢ + b` for every sample, accumulated over `j` in order.
    pub fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.m];
        for (wj, row) in w.iter().zip(&self.rows) {
            for (a, h) in acc.iter_mut().zip(row) {
                *a += wj * h;
            }
        }
        acc.into_iter().map(|a| a + b).collect()
    }

    /// Sample-major copy with a trailing constant 1 per sample (bias feature).
    fn augmented_samples(&self) -> Vec<f64> {
        let width = self.n_learners() + 1;
        let mut out = vec![1.0; self.m * width];
        for (j, row) in self.rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                out[i * width + j] = v;
            }
        }
        out
    }

    /// `Σᵢ cᵢ Hⱼᵢ` for every row `j`, i.e. `H c`.
    pub fn times(&self, c: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(c).map(|(h, v)| h * v).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasMode {
    /// Bias as an extra constant-one feature.
    #[default]
    Augmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub bias_mode: BiasMode,
    /// Seeds the per-pass coordinate permutation.
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            tol: 1e-6,
            max_passes: 10_000,
            bias_mode: BiasMode::Augmented,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidArgument("max_passes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution {
    pub alpha: Vec<f64>,
    pub w: Vec<f64>,
    pub b: f64,
    pub xi: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub converged: bool,
    pub passes: usize,
    /// Largest projected-gradient magnitude seen in the final pass.
    pub max_violation: f64,
}

pub(crate) fn check_signed_labels(y: &[f64], m: usize) -> Result<()> {
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument(format!(
            "signed label {bad} not in {{-1, +1}}"
        )));
    }
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == m {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Dual coordinate descent on the restricted problem.
///
/// Each pass visits the coordinates in a fresh random order and takes the
/// exact clipped Newton step on `αᵢ`. The run stops once a whole pass sees no
/// projected gradient above `cfg.tol`; hitting `max_passes` returns the last
/// iterate with `converged = false`. A warm start is clipped into `[0, C]`.
pub fn solve_restricted(
    h: &ResponseMatrix,
    y: &[f64],
    cfg: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<SvmSolution> {
    cfg.validate()?;
    let m = h.n_samples();
    let j = h.n_learners();
    if j == 0 {
        return Err(Error::InvalidArgument(
            "restricted problem has no columns".into(),
        ));
    }
    check_signed_labels(y, m)?;
    let c = cfg.c;

    let mut alpha = match warm_start {
        Some(a) if a.len() != m => {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: a.len(),
            })
        }
        Some(a) => a
            .iter()
            .map(|v| if v.is_finite() { v.clamp(0.0, c) } else { 0.0 })
            .collect(),
        None => vec![0.0; m],
    };

    let width = j + 1;
    let x = h.augmented_samples();
    let sample = |i: usize| &x[i * width..(i + 1) * width];
    let qd: Vec<f64> = (0..m).map(|i| dot(sample(i), sample(i))).collect();

    let mut w = vec![0.0; width];
    for i in 0..m {
        if alpha[i] != 0.0 {
            axpy(alpha[i] * y[i], sample(i), &mut w);
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = seed::rng(cfg.seed);
    let mut converged = false;
    let mut passes = 0;
    let mut max_violation = f64::INFINITY;

    while passes < cfg.max_passes {
        passes += 1;
        order.shuffle(&mut rng);
        max_violation = 0.0;
        for &i in &order {
            let xi = sample(i);
            let g = y[i] * dot(&w, xi) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * y[i];
                if delta != 0.0 {
                    axpy(delta, xi, &mut w);
                }
            }
        }
        if max_violation <= cfg.tol {
            converged = true;
            break;
        }
    }

    // Rebuild w from α so the KKT condition holds to rounding, not to the
    // drift accumulated by the incremental updates.
    let (w, b) = kkt_weights(h, y, &alpha);
    let xi = slacks(h, y, &w, b);
    let primal_obj = primal_value(&w, b, &xi, c);
    let dual_obj = dual_objective(&alpha, h, y)?;
    Ok(SvmSolution {
        alpha,
        w,
        b,
        xi,
        primal_obj,
        dual_obj,
        converged,
        passes,
        max_violation,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(s: f64, x: &[f64], acc: &mut [f64]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += s * v;
    }
}

/// `wⱼ = Σᵢ yᵢαᵢHⱼᵢ` and `b = Σᵢ yᵢαᵢ`.
pub fn kkt_weights(h: &ResponseMatrix, y: &[f64], alpha: &[f64]) -> (Vec<f64>, f64) {
    let ya: Vec<f64> = y.iter().zip(alpha).map(|(a, b)| a * b).collect();
    (h.times(&ya), ya.iter().sum())
}

/// Largest deviation from `w = Σᵢ yᵢαᵢΦ(xᵢ)` over all coordinates, bias included.
pub fn kkt_residual(h: &ResponseMatrix, y: &[f64], sol: &SvmSolution) -> f64 {
    let (w, b) = kkt_weights(h, y, &sol.alpha);
    w.iter()
        .zip(&sol.w)
        .map(|(a, b)| (a - b).abs())
        .fold((b - sol.b).abs(), f64::max)
}

fn slacks(h: &ResponseMatrix, y: &[f64], w: &[f64], b: f64) -> Vec<f64> {
    h.margins(w, b)
        .iter()
        .zip(y)
        .map(|(f, yi)| (1.0 - yi * f).max(0.0))
        .collect()
}

fn primal_value(w: &[f64], b: f64, xi: &[f64], c: f64) -> f64 {
    0.5 * (dot(w, w) + b * b) + c * xi.iter().sum::<f64>()
}

/// `½(‖w‖² + b²) + C Σᵢ max(0, 1 − yᵢ(wᵀΦ(xᵢ) + b))`, recomputed from scratch.
pub fn primal_objective(h: &ResponseMatrix, y: &[f64], w: &[f64], b: f64, c: f64) -> Result<f64> {
    if w.len() != h.n_learners() {
        return Err(Error::DimensionMismatch {
            expected: h.n_learners(),
            got: w.len(),
        });
    }
    if y.len() != h.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: h.n_samples(),
            got: y.len(),
        });
    }
    Ok(primal_value(w, b, &slacks(h, y, w, b), c))
}

/// `1ᵀα − ½ αᵀ(K ∘ yyᵀ)α` with the augmented kernel `K = HᵀH + 11ᵀ`,
/// evaluated as `1ᵀα − ½‖Σᵢ yᵢαᵢ[Φ(xᵢ); 1]‖²`.
pub fn dual_objective(alpha: &[f64], h: &ResponseMatrix, y: &[f64]) -> Result<f64> {
    let m = h.n_samples();
    for len in [alpha.len(), y.len()] {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: len,
            });
        }
    }
    let (w, b) = kkt_weights(h, y, alpha);
    Ok(alpha.iter().sum::<f64>() - 0.5 * (dot(&w, &w) + b * b))
}

/// `½ Σⱼ (Σᵢ yᵢαᵢ hⱼ(xᵢ))²` over the candidate columns: the size of the
/// duality gap left by columns outside the working set.
pub fn unselected_gap_term(alpha: &[f64], y: &[f64], candidates: &[Vec<f64>]) -> Result<f64> {
    let m = alpha.len();
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: y.len(),
        });
    }
    let mut total = 0.0;
    for col in candidates {
        if col.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: col.len(),
            });
        }
        let s: f64 = (0..m).map(|i| y[i] * alpha[i] * col[i]).sum();
        total += 0.5 * s * s;
    }
    Ok(total)
}
