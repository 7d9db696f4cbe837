//! Weak-learner families and the pricing (base learning) subproblem.
//!
//! Every learner maps a feature vector to a response in `[-1, 1]`. Pricing
//! finds the learner maximizing `|Σᵢ uᵢ h(xᵢ)|` for a signed weight vector
//! `u` (`yᵢαᵢ` in the binary trainer, a column of `U` in the multi-class one).
//! Signs use `sgn(0) = +1`.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// `sgn` with the `sgn(0) = +1` convention.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `polarity · sgn(x[feature] − threshold)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

/// `sgn(θᵀx − κ)` with `‖θ‖₂ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronLearner {
    pub direction: Vec<f64>,
    pub offset: f64,
}

/// `cos(θᵀx − κ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLearner {
    pub frequency: Vec<f64>,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeakLearner {
    Stump(DecisionStump),
    Perceptron(PerceptronLearner),
    Fourier(FourierLearner),
}

/// Accumulates `θᵀx` left to right. The batch path in [`project_all`] uses the
/// same operation order, so single and batch responses agree bitwise.
fn project(theta: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (t, v) in theta.iter().zip(x) {
        acc += t * v;
    }
    acc
}

fn project_all(theta: &[f64], data: &Dataset) -> Vec<f64> {
    let mut acc = vec![0.0; data.n_samples()];
    for (k, t) in theta.iter().enumerate() {
        for (a, v) in acc.iter_mut().zip(data.column(k)) {
            *a += t * v;
        }
    }
    acc
}

impl DecisionStump {
    #[inline]
    pub fn response_value(&self, v: f64) -> f64 {
        f64::from(self.polarity) * sign(v - self.threshold)
    }
}

impl WeakLearner {
    pub fn family(&self) -> Family {
        match self {
            WeakLearner::Stump(_) => Family::Stump,
            WeakLearner::Perceptron(_) => Family::Perceptron,
            WeakLearner::Fourier(_) => Family::Fourier,
        }
    }

    /// Checks that the learner can be evaluated on `d`-dimensional inputs.
    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            WeakLearner::Stump(s) if s.feature >= d => Err(Error::DimensionMismatch {
                expected: s.feature + 1,
                got: d,
            }),
            WeakLearner::Perceptron(PerceptronLearner { direction: t, .. })
            | WeakLearner::Fourier(FourierLearner { frequency: t, .. })
                if t.len() != d =>
            {
                Err(Error::DimensionMismatch {
                    expected: t.len(),
                    got: d,
                })
            }
            _ => Ok(()),
        }
    }

    /// Response on one sample. Callers guarantee the dimension (see
    /// [`WeakLearner::check_dim`]).
    pub fn response(&self, x: &[f64]) -> f64 {
        match self {
            WeakLearner::Stump(s) => s.response_value(x[s.feature]),
            WeakLearner::Perceptron(p) => sign(project(&p.direction, x) - p.offset),
            WeakLearner::Fourier(f) => (project(&f.frequency, x) - f.phase).cos(),
        }
    }

    /// The learner computing `−h`, when the family represents it exactly.
    ///
    /// Stumps flip polarity and Fourier features shift the phase by π.
    /// Perceptrons return `None`: `sgn(0) = +1` breaks exact negation on the
    /// decision boundary.
    pub fn negated(&self) -> Option<WeakLearner> {
        match self {
            WeakLearner::Stump(s) => Some(WeakLearner::Stump(DecisionStump {
                polarity: -s.polarity,
                ..s.clone()
            })),
            WeakLearner::Fourier(f) => Some(WeakLearner::Fourier(FourierLearner {
                frequency: f.frequency.clone(),
                phase: f.phase - PI,
            })),
            WeakLearner::Perceptron(_) => None,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            WeakLearner::Stump(s) => {
                format!("stump(f={},t={},p={})", s.feature, s.threshold, s.polarity)
            }
            WeakLearner::Perceptron(p) => format!("perceptron(kappa={})", p.offset),
            WeakLearner::Fourier(f) => format!("fourier(kappa={})", f.phase),
        }
    }
}

/// Per-feature counts of the stumps in `learners`; other families are an
/// error.
pub fn stump_feature_counts<'a>(
    learners: impl IntoIterator<Item = &'a WeakLearner>,
    d: usize,
) -> Result<Vec<usize>> {
    let mut counts = vec![0; d];
    for h in learners {
        match h {
            WeakLearner::Stump(s) if s.feature < d => counts[s.feature] += 1,
            WeakLearner::Stump(s) => {
                return Err(Error::DimensionMismatch {
                    expected: s.feature + 1,
                    got: d,
                })
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "feature frequency needs stumps, found {}",
                    other.family().name()
                )))
            }
        }
    }
    Ok(counts)
}

/// Responses of `h` on every sample of `data`.
pub fn response_column(h: &WeakLearner, data: &Dataset) -> Result<Vec<f64>> {
    h.check_dim(data.n_features())?;
    Ok(match h {
        WeakLearner::Stump(s) => data
            .column(s.feature)
            .iter()
            .map(|&v| s.response_value(v))
            .collect(),
        WeakLearner::Perceptron(p) => project_all(&p.direction, data)
            .into_iter()
            .map(|z| sign(z - p.offset))
            .collect(),
        WeakLearner::Fourier(f) => project_all(&f.frequency, data)
            .into_iter()
            .map(|z| (z - f.phase).cos())
            .collect(),
    })
}

/// `Σᵢ uᵢ hᵢ`, summed in index order.
pub fn weighted_score(u: &[f64], column: &[f64]) -> f64 {
    u.iter().zip(column).map(|(a, b)| a * b).sum()
}

fn check_weights(u: &[f64], m: usize) -> Result<()> {
    if u.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: u.len(),
        });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weak-learner weights"));
    }
    Ok(())
}

// ─── Families and pools ─────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Stump,
    Perceptron,
    Fourier,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Stump => "stump",
            Family::Perceptron => "perceptron",
            Family::Fourier => "fourier",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stump" => Ok(Family::Stump),
            "perceptron" => Ok(Family::Perceptron),
            "fourier" => Ok(Family::Fourier),
            _ => Err(Error::InvalidArgument(format!(
                "unknown weak-learner family {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub family: Family,
    pub pool_size: usize,
    /// Gaussian bandwidth for Fourier frequencies (`θ ~ N(0, σ⁻² I)`).
    pub sigma: f64,
    pub seed: u64,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            family: Family::Stump,
            pool_size: 2000,
            sigma: 1.0,
            seed: 0,
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 {
            return Err(Error::InvalidArgument("pool size must be positive".into()));
        }
        if self.family == Family::Fourier && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "fourier bandwidth must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws `pool_size` candidate learners.
///
/// - perceptron: `θ` uniform on the unit sphere, `κ` uniform on the range of
///   the training projections `θᵀxᵢ`;
/// - fourier: `θⱼ ~ N(0, 1/σ²)`, `κ ~ U[0, 2π)`;
/// - stump: uniform feature, threshold uniform on that feature's range,
///   polarity +1 (exhaustive search in [`StumpSearch`] is the usual route).
pub fn sample_pool(config: &PoolConfig, data: &Dataset) -> Result<Vec<WeakLearner>> {
    config.validate()?;
    let d = data.n_features();
    let mut rng = seed::rng(config.seed);
    let mut pool = Vec::with_capacity(config.pool_size);
    match config.family {
        Family::Perceptron => {
            for _ in 0..config.pool_size {
                let direction = loop {
                    let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
                    }
                };
                let proj = project_all(&direction, data);
                let (lo, hi) = min_max(&proj);
                let offset = if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                };
                pool.push(WeakLearner::Perceptron(PerceptronLearner {
                    direction,
                    offset,
                }));
            }
        }
        Family::Fourier => {
            let normal = Normal::new(0.0, 1.0 / config.sigma)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            for _ in 0..config.pool_size {
                let frequency = (0..d).map(|_| normal.sample(&mut rng)).collect();
                let phase = rng.random_range(0.0..TAU);
                pool.push(WeakLearner::Fourier(FourierLearner { frequency, phase }));
            }
        }
        Family::Stump => {
            for _ in 0..config.pool_size {
                let feature = rng.random_range(0..d);
                let (lo, hi) = min_max(data.column(feature));
                let threshold = if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                };
                pool.push(WeakLearner::Stump(DecisionStump {
                    feature,
                    threshold,
                    polarity: 1,
                }));
            }
        }
    }
    Ok(pool)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Scores every pool member against `u` and returns the one with the
/// largest `|score|` (lowest index on ties) together with its signed score.
pub fn select_from_pool(
    pool: &[WeakLearner],
    u: &[f64],
    data: &Dataset,
) -> Result<(WeakLearner, f64)> {
    let columns = pool_columns(pool, data)?;
    let (idx, score) = argmax_abs(u, &columns)?;
    Ok((pool[idx].clone(), score))
}

/// Response columns for every pool member, in pool order.
pub fn pool_columns(pool: &[WeakLearner], data: &Dataset) -> Result<Vec<Vec<f64>>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    pool.par_iter().map(|h| response_column(h, data)).collect()
}

fn argmax_abs(u: &[f64], columns: &[Vec<f64>]) -> Result<(usize, f64)> {
    if columns.is_empty() {
        return Err(Error::EmptyPool);
    }
    check_weights(u, columns[0].len())?;
    let scores: Vec<f64> = columns.par_iter().map(|c| weighted_score(u, c)).collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.abs() > scores[best].abs() {
            best = i;
        }
    }
    Ok((best, scores[best]))
}

// ─── Exhaustive stump search ────────────────────────────────────────

/// Exhaustive decision-stump pricing with per-feature sort orders cached.
///
/// Candidate thresholds per feature are one sentinel below the minimum plus
/// the midpoints between consecutive distinct values; this finite set holds
/// an exact maximizer. Scores come from prefix sums in `O(m)` per feature;
/// near-best candidates are then rescored by direct summation so the winner
/// and its score are exact.
pub struct StumpSearch<'a> {
    data: &'a Dataset,
    order: Vec<Vec<u32>>,
    /// `(feature, rank)` keys that are skipped; see [`StumpSearch::exclude`].
    excluded: HashSet<(usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    rank: usize,
    threshold: f64,
    approx: f64,
}

const MAX_RESCORED: usize = 4096;

impl<'a> StumpSearch<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        let order = (0..data.n_features())
            .into_par_iter()
            .map(|j| {
                let col = data.column(j);
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Self {
            data,
            order,
            excluded: HashSet::new(),
        }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    /// Skips the sentinel threshold of every feature (the constant column).
    pub fn exclude_constant(&mut self) {
        for j in 0..self.data.n_features() {
            self.excluded.insert((j, 0));
        }
    }

    /// Skips every candidate whose response column equals `column` or its
    /// negation, on any feature. `column` must be a ±1 vector.
    pub fn exclude(&mut self, column: &[f64]) {
        let m = self.data.n_samples();
        let positive: Vec<bool> = column.iter().map(|&v| v > 0.0).collect();
        let k = positive.iter().filter(|&&p| p).count();
        if k == 0 || k == m {
            self.exclude_constant();
            return;
        }
        for j in 0..self.data.n_features() {
            let col = self.data.column(j);
            let order = &self.order[j];
            // A candidate's +1 set is an upper set {x ≥ t} of the sorted order;
            // the column matches if that set is `positive` or its complement.
            for want in [true, false] {
                let size = if want { k } else { m - k };
                let split = m - size;
                let upper_matches = order[split..].iter().all(|&i| positive[i as usize] == want);
                let separated = col[order[split - 1] as usize] < col[order[split] as usize];
                if upper_matches && separated {
                    let rank = 1
                        + (0..split - 1)
                            .filter(|&w| col[order[w] as usize] < col[order[w + 1] as usize])
                            .count();
                    self.excluded.insert((j, rank));
                }
            }
        }
    }

    /// Visits every candidate of feature `j` as `(rank, threshold, Σ_{x<t} u)`.
    fn scan(&self, j: usize, u: &[f64], mut visit: impl FnMut(usize, f64, f64)) {
        let col = self.data.column(j);
        let order = &self.order[j];
        let lowest = col[order[0] as usize];
        let mut visit = |rank: usize, t: f64, left: f64| {
            if !self.excluded.contains(&(j, rank)) {
                visit(rank, t, left);
            }
        };
        visit(0, lowest - 1.0, 0.0);
        let mut left = 0.0;
        let mut rank = 1;
        for w in 0..order.len() {
            let i = order[w] as usize;
            left += u[i];
            if w + 1 < order.len() {
                let (a, b) = (col[i], col[order[w + 1] as usize]);
                if b > a {
                    let mut mid = a + (b - a) / 2.0;
                    if mid <= a {
                        mid = b;
                    }
                    visit(rank, mid, left);
                    rank += 1;
                }
            }
        }
    }

    /// The stump maximizing `|Σᵢ uᵢ h(xᵢ)|`, with polarity chosen so that the
    /// returned score is non-negative. Ties go to the lowest feature index,
    /// then the lowest threshold, then polarity +1.
    pub fn best(&self, u: &[f64]) -> Result<(DecisionStump, f64)> {
        check_weights(u, self.data.n_samples())?;
        let sum_abs: f64 = u.iter().map(|v| v.abs()).sum();
        if sum_abs == 0.0 {
            for j in 0..self.data.n_features() {
                let mut first = None;
                self.scan(j, u, |_, t, _| {
                    first.get_or_insert(t);
                });
                if let Some(threshold) = first {
                    let stump = DecisionStump {
                        feature: j,
                        threshold,
                        polarity: 1,
                    };
                    return Ok((stump, 0.0));
                }
            }
            return Err(Error::Exhausted);
        }
        let total: f64 = u.iter().sum();
        let d = self.data.n_features();

        let best_per_feature: Vec<f64> = (0..d)
            .into_par_iter()
            .map(|j| {
                let mut best = f64::NEG_INFINITY;
                self.scan(j, u, |_, _, left| {
                    best = best.max((total - 2.0 * left).abs())
                });
                best
            })
            .collect();
        let best = best_per_feature
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let slack = 8.0 * (u.len() as f64 + 2.0) * f64::EPSILON * sum_abs;
        let floor = best - slack;

        let mut candidates: Vec<Candidate> = (0..d)
            .into_par_iter()
            .flat_map_iter(|j| {
                let mut found = Vec::new();
                if best_per_feature[j] >= floor {
                    self.scan(j, u, |rank, threshold, left| {
                        let approx = total - 2.0 * left;
                        if approx.abs() >= floor {
                            found.push(Candidate {
                                feature: j,
                                rank,
                                threshold,
                                approx,
                            });
                        }
                    });
                }
                found
            })
            .collect();
        candidates.sort_by_key(|c| (c.feature, c.rank));
        candidates.truncate(MAX_RESCORED);

        let mut winner: Option<(DecisionStump, f64)> = None;
        for c in &candidates {
            let base = DecisionStump {
                feature: c.feature,
                threshold: c.threshold,
                polarity: 1,
            };
            let raw = self.exact_score(&base, u);
            let stump = if raw >= 0.0 {
                base
            } else {
                DecisionStump {
                    polarity: -1,
                    ..base
                }
            };
            let score = if stump.polarity == 1 {
                raw
            } else {
                self.exact_score(&stump, u)
            };
            debug_assert!((score.abs() - c.approx.abs()).abs() <= 2.0 * slack + 1e-300);
            if winner.as_ref().is_none_or(|(_, s)| score > *s) {
                winner = Some((stump, score));
            }
        }
        winner.ok_or(Error::Exhausted)
    }

    fn exact_score(&self, stump: &DecisionStump, u: &[f64]) -> f64 {
        let col = self.data.column(stump.feature);
        u.iter()
            .zip(col)
            .map(|(w, &v)| w * stump.response_value(v))
            .sum()
    }
}

/// One-shot exhaustive stump pricing; see [`StumpSearch::best`].
pub fn train_stump(u: &[f64], data: &Dataset) -> Result<(DecisionStump, f64)> {
    StumpSearch::new(data).best(u)
}

// ─── Pricing front end used by the trainers ─────────────────────────

/// The learner chosen by pricing, with its signed score and response column.
#[derive(Debug, Clone)]
pub struct Priced {
    pub learner: WeakLearner,
    pub score: f64,
    pub column: Vec<f64>,
    /// Index of the weight vector that produced the best score.
    pub target: usize,
}

/// Exhaustive stump search or a freshly sampled pool per iteration.
///
/// Pricing runs over learners outside the working set: an already selected
/// column scores its own weight, not zero, so it is excluded (with its
/// negation). The constant column duplicates the bias and is excluded too.
pub enum Pricing<'a> {
    Stumps(StumpSearch<'a>),
    Pool {
        config: PoolConfig,
        data: &'a Dataset,
        excluded: Vec<Vec<f64>>,
    },
}

fn is_constant(column: &[f64]) -> bool {
    column.iter().all(|&v| v == column[0])
}

fn same_up_to_sign(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x == y) || a.iter().zip(b).all(|(x, y)| *x == -y)
}

impl<'a> Pricing<'a> {
    pub fn new(config: &PoolConfig, data: &'a Dataset) -> Result<Self> {
        config.validate()?;
        Ok(match config.family {
            Family::Stump => {
                let mut search = StumpSearch::new(data);
                search.exclude_constant();
                Pricing::Stumps(search)
            }
            _ => Pricing::Pool {
                config: config.clone(),
                data,
                excluded: Vec::new(),
            },
        })
    }

    /// Removes `column` (and `−column`) from future pricing.
    pub fn exclude(&mut self, column: &[f64]) {
        match self {
            Pricing::Stumps(search) => search.exclude(column),
            Pricing::Pool { excluded, .. } => excluded.push(column.to_vec()),
        }
    }

    pub fn data(&self) -> &'a Dataset {
        match self {
            Pricing::Stumps(s) => s.data(),
            Pricing::Pool { data, .. } => data,
        }
    }

    /// Best learner over all weight vectors in `targets`, by `|score|`.
    /// Ties go to the lowest target index, then the family's own order.
    /// Pools are resampled per `iteration` from a seed derived from the
    /// configured one.
    pub fn price(&self, targets: &[&[f64]], iteration: u64) -> Result<Priced> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("no pricing targets".into()));
        }
        match self {
            Pricing::Stumps(search) => {
                let mut best: Option<(usize, DecisionStump, f64)> = None;
                for (t, u) in targets.iter().enumerate() {
                    let (stump, score) = search.best(u)?;
                    if best.as_ref().is_none_or(|(_, _, s)| score > *s) {
                        best = Some((t, stump, score));
                    }
                }
                let (target, stump, score) = best.expect("targets nonempty");
                let learner = WeakLearner::Stump(stump);
                let column = response_column(&learner, search.data())?;
                Ok(Priced {
                    learner,
                    score,
                    column,
                    target,
                })
            }
            Pricing::Pool {
                config,
                data,
                excluded,
            } => {
                let cfg = PoolConfig {
                    seed: seed::derive(config.seed, iteration),
                    ..config.clone()
                };
                let pool = sample_pool(&cfg, data)?;
                let all_columns = pool_columns(&pool, data)?;
                let (pool, mut columns): (Vec<_>, Vec<_>) = pool
                    .into_iter()
                    .zip(all_columns)
                    .filter(|(_, c)| {
                        !is_constant(c) && !excluded.iter().any(|e| same_up_to_sign(e, c))
                    })
                    .unzip();
                if columns.is_empty() {
                    return Err(Error::Exhausted);
                }
                let mut best: Option<(usize, usize, f64)> = None;
                for (t, u) in targets.iter().enumerate() {
                    let (idx, score) = argmax_abs(u, &columns)?;
                    if best.is_none_or(|(_, _, s)| score.abs() > s.abs()) {
                        best = Some((t, idx, score));
                    }
                }
                let (target, idx, score) = best.expect("targets nonempty");
                Ok(Priced {
                    learner: pool[idx].clone(),
                    score,
                    column: columns.swap_remove(idx),
                    target,
                })
            }
        }
    }
}
