//! Binary column-generation ensemble training (CGEns).
//!
//! Each iteration prices the weak learner with the largest `|Σᵢ yᵢαᵢh(xᵢ)|`,
//! appends its response row and re-solves the restricted SVM from the
//! previous `α`. Training stops when the best score drops below `ε` or the
//! ensemble reaches `j_max` learners.

use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryView, Dataset};
use crate::error::{Error, Result};
use crate::linsvm::{self, ResponseMatrix, SolverConfig, SvmSolution};
use crate::seed;
use crate::weak::{self, Family, PoolConfig, Pricing, WeakLearner};

/// `F(x) = Σⱼ wⱼ hⱼ(x) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub learners: Vec<WeakLearner>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl EnsembleModel {
    pub fn new(learners: Vec<WeakLearner>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if learners.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: learners.len(),
                got: weights.len(),
            });
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("ensemble weights"));
        }
        Ok(Self {
            learners,
            weights,
            bias,
        })
    }

    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        self.learners.iter().try_for_each(|h| h.check_dim(d))
    }

    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let mut acc = 0.0;
        for (w, h) in self.weights.iter().zip(&self.learners) {
            acc += w * h.response(x);
        }
        Ok(acc + self.bias)
    }

    /// `(margin, label)` with the label in `{−1, +1}` and `sgn(0) = +1`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let f = self.margin(x)?;
        Ok((f, weak::sign(f)))
    }

    /// Margins for every sample, summed over learners in the same order as
    /// [`EnsembleModel::margin`].
    pub fn margins(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data.n_features())?;
        let mut acc = vec![0.0; data.n_samples()];
        for (w, h) in self.weights.iter().zip(&self.learners) {
            for (a, r) in acc.iter_mut().zip(weak::response_column(h, data)?) {
                *a += w * r;
            }
        }
        Ok(acc.into_iter().map(|a| a + self.bias).collect())
    }

    pub fn predict_batch(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.margins(data)?.into_iter().map(weak::sign).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub c: f64,
    pub epsilon: f64,
    pub j_max: usize,
    pub pool: PoolConfig,
    /// Initial value of every `αᵢ`; `None` means `C/2`.
    pub alpha_init: Option<f64>,
    /// Inner solver tolerance. Tighter than the standalone solver default
    /// so that the primal objective stays monotone across iterations.
    pub tol: f64,
    pub max_passes: usize,
    /// Standardize features before training; `None` picks by family.
    pub standardize: Option<bool>,
}

impl TrainConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            epsilon: 1e-3,
            j_max: 500,
            pool: PoolConfig::default(),
            alpha_init: None,
            tol: 1e-8,
            max_passes: 10_000,
            standardize: None,
        }
    }

    pub fn with_family(mut self, family: Family) -> Self {
        self.pool.family = family;
        self
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha_init.unwrap_or(self.c / 2.0)
    }

    pub fn solver(&self, stream: u64) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_passes: self.max_passes,
            seed: seed::derive(self.pool.seed ^ 0x5356_4d00, stream),
            ..SolverConfig::new(self.c)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver(0).validate()?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.j_max == 0 {
            return Err(Error::InvalidArgument("j_max must be positive".into()));
        }
        let a = self.alpha0();
        if !(a > 0.0 && a < self.c) {
            return Err(Error::InvalidArgument(format!(
                "alpha_init must lie in (0, C), got {a}"
            )));
        }
        self.pool.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub learner: String,
    /// Signed `Σᵢ yᵢαᵢh(xᵢ)` of the learner added in this iteration.
    pub selection_score: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `½(best unselected score)²` under this iteration's `α`: the largest
    /// single-column gap term left. Filled in by the next pricing step.
    pub unselected_gap_sample: f64,
    pub train_error: f64,
    pub solver_passes: usize,
    pub solver_converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    /// Best pricing score below `ε`.
    Epsilon,
    /// `j_max` learners reached.
    JMax,
    /// Pricing returned a column already in the working set.
    Duplicate,
    /// No candidate outside the working set remains.
    Exhausted,
}

/// State after an iteration, handed to [`train_observed`] callbacks.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub responses: &'a ResponseMatrix,
    pub labels: &'a [f64],
    pub solution: &'a SvmSolution,
    pub learners: &'a [WeakLearner],
}

#[derive(Debug, Clone)]
pub struct BinaryFit {
    pub model: EnsembleModel,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    /// Final dual variables.
    pub alpha: Vec<f64>,
}

pub fn train(data: &BinaryView, cfg: &TrainConfig) -> Result<BinaryFit> {
    train_observed(data, cfg, |_| {})
}

/// [`train`] with a callback after every completed iteration.
pub fn train_observed(
    data: &BinaryView,
    cfg: &TrainConfig,
    mut observe: impl FnMut(&IterationView),
) -> Result<BinaryFit> {
    cfg.validate()?;
    let ds = data.data();
    let y = data.signed_labels();
    let m = ds.n_samples();
    linsvm::check_signed_labels(y, m)?;

    let mut pricing = Pricing::new(&cfg.pool, ds)?;
    let mut alpha = vec![cfg.alpha0(); m];
    let mut h = ResponseMatrix::new(m);
    let mut learners: Vec<WeakLearner> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut bias = 0.0;
    let mut trace: Vec<IterationRecord> = Vec::new();

    let termination = loop {
        let j = learners.len();
        let u: Vec<f64> = y.iter().zip(&alpha).map(|(a, b)| a * b).collect();
        let priced = match pricing.price(&[&u], j as u64) {
            Err(Error::Exhausted) => {
                if let Some(last) = trace.last_mut() {
                    last.unselected_gap_sample = 0.0;
                }
                break Termination::Exhausted;
            }
            p => p?,
        };
        if let Some(last) = trace.last_mut() {
            last.unselected_gap_sample = 0.5 * priced.score * priced.score;
        }
        if j >= cfg.j_max {
            break Termination::JMax;
        }
        if priced.score.abs() < cfg.epsilon {
            break Termination::Epsilon;
        }
        if learners.contains(&priced.learner) || h.contains_row(&priced.column) {
            break Termination::Duplicate;
        }

        pricing.exclude(&priced.column);
        h.push_row(priced.column)?;
        learners.push(priced.learner);
        let sol = linsvm::solve_restricted(&h, y, &cfg.solver(j as u64), Some(&alpha))?;

        let margins = h.margins(&sol.w, sol.b);
        let wrong = margins
            .iter()
            .zip(y)
            .filter(|(f, t)| weak::sign(**f) != **t)
            .count();
        trace.push(IterationRecord {
            iteration: j + 1,
            learner: learners[j].summary(),
            selection_score: priced.score,
            primal_obj: sol.primal_obj,
            dual_obj: sol.dual_obj,
            unselected_gap_sample: 0.0,
            train_error: wrong as f64 / m as f64,
            solver_passes: sol.passes,
            solver_converged: sol.converged,
        });
        observe(&IterationView {
            iteration: j + 1,
            responses: &h,
            labels: y,
            solution: &sol,
            learners: &learners,
        });
        alpha = sol.alpha;
        weights = sol.w;
        bias = sol.b;
    };

    if learners.is_empty() {
        // No column was added: predict the majority class.
        bias = weak::sign(y.iter().sum());
    }
    Ok(BinaryFit {
        model: EnsembleModel::new(learners, weights, bias)?,
        trace,
        termination,
        alpha,
    })
}

/// How often each feature index is used by the stumps of `models`.
pub fn feature_frequency(models: &[EnsembleModel], d: usize) -> Result<Vec<usize>> {
    weak::stump_feature_counts(models.iter().flat_map(|m| &m.learners), d)
}
