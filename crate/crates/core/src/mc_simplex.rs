//! Multi-class ensembles with simplex label coding (CGEns-SLS).
//!
//! Class `y` is coded as a unit vector `c_y ∈ ℝˡ`, `l = k − 1`, with all
//! pairwise inner products `−1/l`. The restricted problem is a least-squares
//! SVM fitting `F(xᵢ) = Wᵀ Φ(xᵢ) + b` to the codes,
//!
//! ```text
//! min ½ Σ_τ ‖w_τ‖² + (C/2) Σᵢ Σ_τ O²ᵢτ,   O = L − HᵀW − 1bᵀ,
//! ```
//!
//! with the closed form `b = (1ᵀS⁻¹L / 1ᵀS⁻¹1)ᵀ`, `U = S⁻¹(L − 1bᵀ)`,
//! `W = HU` for `S = HᵀH + C⁻¹I`. `S⁻¹` is maintained by rank-one updates as
//! rows are appended to `H`. Decoding picks `argmax_y ⟨F(x), c_y⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cg_binary::{Termination, TrainConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linsvm::ResponseMatrix;
use crate::weak::{Priced, Pricing, WeakLearner};

/// `S⁻¹` is recomputed from scratch every this many appended rows.
pub const SINV_REFRESH: usize = 50;

/// Rows are the class codes `c_y`, `y = 1..=k`, each of length `k − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexCode {
    pub codes: Vec<Vec<f64>>,
}

impl SimplexCode {
    pub fn class_count(&self) -> usize {
        self.codes.len()
    }

    pub fn dim(&self) -> usize {
        self.codes.len() - 1
    }

    pub fn code(&self, class: usize) -> &[f64] {
        &self.codes[class - 1]
    }

    /// `k × l` matrix of codes.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.class_count(), self.dim(), |y, t| self.codes[y][t])
    }

    /// `m × l` label matrix with row `i` equal to the code of `labels[i]`.
    pub fn label_matrix(&self, labels: &[usize]) -> Result<DMatrix<f64>> {
        let k = self.class_count();
        if let Some(bad) = labels.iter().find(|&&c| c == 0 || c > k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 1..={k}"
            )));
        }
        Ok(DMatrix::from_fn(labels.len(), self.dim(), |i, t| {
            self.codes[labels[i] - 1][t]
        }))
    }

    /// `⟨f, c_y⟩` for every class and the argmax (lowest class id on ties).
    pub fn decode(&self, f: &[f64]) -> (Vec<f64>, usize) {
        let scores: Vec<f64> = self
            .codes
            .iter()
            .map(|c| c.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect();
        let mut best = 0;
        for (y, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = y;
            }
        }
        (scores, best + 1)
    }
}

/// Recursive construction: `c₁ = e₁`, and for `y > 1`
/// `c_y = (−1/l, √(1 − 1/l²) · c'_{y−1})` with `c'` the `(k−1)`-class codes.
pub fn simplex_codes(k: usize) -> Result<SimplexCode> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "simplex coding needs k >= 2, got {k}"
        )));
    }
    Ok(SimplexCode {
        codes: build_codes(k),
    })
}

fn build_codes(k: usize) -> Vec<Vec<f64>> {
    if k == 2 {
        return vec![vec![1.0], vec![-1.0]];
    }
    let l = (k - 1) as f64;
    let scale = (1.0 - 1.0 / (l * l)).sqrt();
    let mut first = vec![0.0; k - 1];
    first[0] = 1.0;
    let mut codes = vec![first];
    for inner in build_codes(k - 1) {
        let mut c = Vec::with_capacity(k - 1);
        c.push(-1.0 / l);
        c.extend(inner.iter().map(|v| scale * v));
        codes.push(c);
    }
    codes
}

fn response_dense(h: &ResponseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(h.n_learners(), h.n_samples(), |j, i| h.row(j)[i])
}

/// `(HᵀH + C⁻¹I)⁻¹` computed directly by Cholesky factorization.
pub fn direct_sinv(h: &ResponseMatrix, c: f64) -> Result<DMatrix<f64>> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "C must be positive, got {c}"
        )));
    }
    let m = h.n_samples();
    let hd = response_dense(h);
    let s = hd.tr_mul(&hd) + DMatrix::identity(m, m) / c;
    let inv = s
        .cholesky()
        .ok_or_else(|| Error::Model("HᵀH + C⁻¹I is not positive definite".into()))?
        .inverse();
    Ok(symmetrized(inv))
}

fn symmetrized(a: DMatrix<f64>) -> DMatrix<f64> {
    let t = a.transpose();
    (a + t) * 0.5
}

/// `(S + hhᵀ)⁻¹ = S⁻¹ − ssᵀ/(1 + hᵀs)` with `s = S⁻¹h`, re-symmetrized.
pub fn sinv_update(sinv: &DMatrix<f64>, h: &[f64]) -> Result<DMatrix<f64>> {
    let m = sinv.nrows();
    if sinv.ncols() != m || h.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: h.len(),
        });
    }
    if h.iter().any(|v| !v.is_finite()) || sinv.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("inverse update"));
    }
    let hv = DVector::from_column_slice(h);
    let s = sinv * &hv;
    let denom = 1.0 + hv.dot(&s);
    let mut out = sinv.clone();
    out.ger(-1.0 / denom, &s, &s, 1.0);
    Ok(symmetrized(out))
}

/// Closed-form restricted SLS-SVM solution `(b, U, W)` given `S⁻¹`.
/// `W` is `J × l`.
pub fn sls_solve(
    h: &ResponseMatrix,
    sinv: &DMatrix<f64>,
    labels: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let m = h.n_samples();
    if sinv.shape() != (m, m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: sinv.nrows(),
        });
    }
    if labels.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: labels.nrows(),
        });
    }
    let ones = DVector::from_element(m, 1.0);
    let s1 = sinv * &ones;
    let denom = ones.dot(&s1);
    let b = labels.tr_mul(&s1) / denom;
    let mut resid = labels.clone();
    for mut row in resid.row_iter_mut() {
        row -= b.transpose();
    }
    let u = sinv * resid;
    let w = response_dense(h) * &u;
    Ok((b, u, w))
}

/// `½ Σ‖w_τ‖² + (C/2) Σ O²` with `O = L − HᵀW − 1bᵀ` evaluated directly.
pub fn sls_objective(
    h: &ResponseMatrix,
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    labels: &DMatrix<f64>,
    c: f64,
) -> f64 {
    let o = labels - fitted(h, w, b);
    0.5 * w.norm_squared() + 0.5 * c * o.norm_squared()
}

/// `HᵀW + 1bᵀ`: row `i` is `F(xᵢ)`.
fn fitted(h: &ResponseMatrix, w: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let mut f = if h.n_learners() == 0 {
        DMatrix::zeros(h.n_samples(), b.len())
    } else {
        response_dense(h).tr_mul(w)
    };
    for mut row in f.row_iter_mut() {
        row += b.transpose();
    }
    f
}

/// Full iteration state of the multi-class trainer.
#[derive(Debug, Clone)]
pub struct SlsState {
    pub h: ResponseMatrix,
    pub sinv: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub b: DVector<f64>,
    pub w: DMatrix<f64>,
    pub c: f64,
}

impl SlsState {
    /// `O = U/C`.
    pub fn residual(&self) -> DMatrix<f64> {
        &self.u / self.c
    }
}

/// Best learner over every column of `U` by `|Σᵢ Uᵢτ h(xᵢ)|`. Returns the
/// learner, the winning column `τ` (0-based) and the absolute score.
pub fn select_weak_mc(
    u: &DMatrix<f64>,
    pricing: &Pricing,
    iteration: u64,
) -> Result<(WeakLearner, usize, f64)> {
    let p = price_columns(u, pricing, iteration)?;
    Ok((p.learner, p.target, p.score.abs()))
}

fn price_columns(u: &DMatrix<f64>, pricing: &Pricing, iteration: u64) -> Result<Priced> {
    let m = u.nrows();
    let cols: Vec<&[f64]> = (0..u.ncols())
        .map(|t| &u.as_slice()[t * m..(t + 1) * m])
        .collect();
    pricing.price(&cols, iteration)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    pub learners: Vec<WeakLearner>,
    /// `J` rows of length `l`: row `j` holds `W_{j,:}`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub codes: SimplexCode,
}

impl MulticlassModel {
    pub fn class_count(&self) -> usize {
        self.codes.class_count()
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        self.learners.iter().try_for_each(|h| h.check_dim(d))
    }

    /// `F(x) = Wᵀ Φ(x) + b`.
    pub fn outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        let mut f = vec![0.0; self.biases.len()];
        for (row, h) in self.weights.iter().zip(&self.learners) {
            let r = h.response(x);
            for (a, w) in f.iter_mut().zip(row) {
                *a += w * r;
            }
        }
        for (a, b) in f.iter_mut().zip(&self.biases) {
            *a += b;
        }
        Ok(f)
    }

    /// Class scores `⟨F(x), c_y⟩` and the decoded class id in `1..=k`.
    pub fn predict(&self, x: &[f64]) -> Result<(Vec<f64>, usize)> {
        Ok(self.codes.decode(&self.outputs(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McIterationRecord {
    pub iteration: usize,
    pub learner: String,
    /// Column of `U` (0-based) that priced the added learner.
    pub tau_star: usize,
    pub score: f64,
    pub objective: f64,
    pub train_error: f64,
}

#[derive(Debug, Clone)]
pub struct McFit {
    pub model: MulticlassModel,
    pub trace: Vec<McIterationRecord>,
    pub termination: Termination,
}

pub fn train_mc(data: &Dataset, cfg: &TrainConfig) -> Result<McFit> {
    train_mc_observed(data, cfg, |_, _| {})
}

/// [`train_mc`] with a callback on the state and learners after every iteration.
pub fn train_mc_observed(
    data: &Dataset,
    cfg: &TrainConfig,
    mut observe: impl FnMut(&SlsState, &[WeakLearner]),
) -> Result<McFit> {
    cfg.validate()?;
    let k = data.class_count();
    let present = data.class_counts().iter().filter(|&&n| n > 0).count();
    if present < 2 {
        return Err(Error::SingleClass);
    }
    let codes = simplex_codes(k)?;
    let labels = codes.label_matrix(data.labels())?;
    let m = data.n_samples();
    let c = cfg.c;

    let mut pricing = Pricing::new(&cfg.pool, data)?;
    let h = ResponseMatrix::new(m);
    let sinv = DMatrix::identity(m, m) * c;
    let (b, u, w) = sls_solve(&h, &sinv, &labels)?;
    let mut state = SlsState {
        h,
        sinv,
        u,
        b,
        w,
        c,
    };
    let mut learners: Vec<WeakLearner> = Vec::new();
    let mut trace = Vec::new();

    let termination = loop {
        let j = learners.len();
        if j >= cfg.j_max {
            break Termination::JMax;
        }
        let priced = match price_columns(&state.u, &pricing, j as u64) {
            Err(Error::Exhausted) => break Termination::Exhausted,
            p => p?,
        };
        if priced.score.abs() < cfg.epsilon {
            break Termination::Epsilon;
        }
        if learners.contains(&priced.learner) || state.h.contains_row(&priced.column) {
            break Termination::Duplicate;
        }
        pricing.exclude(&priced.column);
        state.sinv = if (j + 1).is_multiple_of(SINV_REFRESH) {
            state.h.push_row(priced.column)?;
            direct_sinv(&state.h, c)?
        } else {
            let next = sinv_update(&state.sinv, &priced.column)?;
            state.h.push_row(priced.column)?;
            next
        };
        learners.push(priced.learner);
        let (b, u, w) = sls_solve(&state.h, &state.sinv, &labels)?;
        state.b = b;
        state.u = u;
        state.w = w;

        let f = fitted(&state.h, &state.w, &state.b);
        let wrong = (0..m)
            .filter(|&i| {
                let row: Vec<f64> = f.row(i).iter().copied().collect();
                codes.decode(&row).1 != data.labels()[i]
            })
            .count();
        trace.push(McIterationRecord {
            iteration: j + 1,
            learner: learners[j].summary(),
            tau_star: priced.target,
            score: priced.score.abs(),
            objective: sls_objective(&state.h, &state.w, &state.b, &labels, c),
            train_error: wrong as f64 / m as f64,
        });
        observe(&state, &learners);
    };

    let weights = state
        .w
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    Ok(McFit {
        model: MulticlassModel {
            learners,
            weights,
            biases: state.b.iter().copied().collect(),
            codes,
        },
        trace,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_ok(k: usize) {
        let codes = simplex_codes(k).unwrap();
        let l = (k - 1) as f64;
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = codes.codes[a]
                    .iter()
                    .zip(&codes.codes[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let want = if a == b { 1.0 } else { -1.0 / l };
                assert!((dot - want).abs() < 1e-12, "k={k} ({a},{b}) {dot}");
            }
        }
    }

    #[test]
    fn codes_small_cases() {
        assert_eq!(simplex_codes(2).unwrap().codes, vec![vec![1.0], vec![-1.0]]);
        gram_ok(3);
        gram_ok(10);
        assert!(simplex_codes(1).is_err());
    }

    #[test]
    fn scalar_inverse_update() {
        let s = DMatrix::from_element(1, 1, 2.0);
        let out = sinv_update(&s, &[1.0]).unwrap();
        assert!((out[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sinv_update(&s, &[0.0]).unwrap(), s);
    }

    #[test]
    fn empty_h_closed_form() {
        let codes = simplex_codes(3).unwrap();
        let labels = codes.label_matrix(&[1, 2, 3, 1]).unwrap();
        let c = 2.0;
        let h = ResponseMatrix::new(4);
        let sinv = DMatrix::identity(4, 4) * c;
        let (b, u, w) = sls_solve(&h, &sinv, &labels).unwrap();
        for t in 0..2 {
            let mean = labels.column(t).mean();
            assert!((b[t] - mean).abs() < 1e-15);
            assert!(u.column(t).sum().abs() < 1e-12);
        }
        assert_eq!(w.nrows(), 0);
    }

    #[test]
    fn zero_output_decodes_to_class_one() {
        let codes = simplex_codes(4).unwrap();
        let (scores, label) = codes.decode(&[0.0; 3]);
        assert_eq!(label, 1);
        assert!(scores.iter().all(|&s| s == 0.0));
    }
}
