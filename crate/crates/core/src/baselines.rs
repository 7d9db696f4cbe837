//! Discrete AdaBoost with decision stumps, the stage-wise baseline.

use serde::{Deserialize, Serialize};

use crate::dataset::{BinaryView, Dataset};
use crate::error::{Error, Result};
use crate::linsvm;
use crate::weak::{self, DecisionStump, StumpSearch, WeakLearner};

/// Stage weight used when a stump makes no weighted error: `½ ln(1e12)`.
pub fn max_stage_weight() -> f64 {
    0.5 * 1e12f64.ln()
}

/// `sgn(Σₜ aₜ hₜ(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub learners: Vec<DecisionStump>,
    pub weights: Vec<f64>,
}

impl AdaBoostModel {
    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }

    /// The first `rounds` stages (AdaBoost is stage-wise, so this is exactly
    /// the model after `rounds` rounds).
    pub fn truncated(&self, rounds: usize) -> Self {
        let n = rounds.min(self.len());
        Self {
            learners: self.learners[..n].to_vec(),
            weights: self.weights[..n].to_vec(),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.learners.iter().find(|s| s.feature >= d) {
            Some(s) => Err(Error::DimensionMismatch {
                expected: s.feature + 1,
                got: d,
            }),
            None => Ok(()),
        }
    }

    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let mut acc = 0.0;
        for (a, s) in self.weights.iter().zip(&self.learners) {
            acc += a * s.response_value(x[s.feature]);
        }
        Ok(acc)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(weak::sign(self.margin(x)?))
    }

    pub fn margins(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data.n_features())?;
        let mut acc = vec![0.0; data.n_samples()];
        for (a, s) in self.weights.iter().zip(&self.learners) {
            for (f, &v) in acc.iter_mut().zip(data.column(s.feature)) {
                *f += a * s.response_value(v);
            }
        }
        Ok(acc)
    }

    pub fn predict_batch(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.margins(data)?.into_iter().map(weak::sign).collect())
    }

    pub fn as_weak_learners(&self) -> Vec<WeakLearner> {
        self.learners
            .iter()
            .cloned()
            .map(WeakLearner::Stump)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub learner: String,
    pub weighted_error: f64,
    pub stage_weight: f64,
    pub train_error: f64,
}

#[derive(Debug, Clone)]
pub struct AdaBoostFit {
    pub model: AdaBoostModel,
    pub trace: Vec<RoundRecord>,
}

pub fn train_adaboost(data: &BinaryView, rounds: usize) -> Result<AdaBoostFit> {
    train_adaboost_observed(data, rounds, |_, _| {})
}

/// [`train_adaboost`] with a callback receiving the round number and the
/// renormalized sample distribution after every round.
pub fn train_adaboost_observed(
    data: &BinaryView,
    rounds: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<AdaBoostFit> {
    if rounds == 0 {
        return Err(Error::InvalidArgument(
            "AdaBoost needs at least one round".into(),
        ));
    }
    let ds = data.data();
    let y = data.signed_labels();
    let m = ds.n_samples();
    linsvm::check_signed_labels(y, m)?;

    let search = StumpSearch::new(ds);
    let mut dist = vec![1.0 / m as f64; m];
    let mut margins = vec![0.0; m];
    let mut model = AdaBoostModel {
        learners: Vec::new(),
        weights: Vec::new(),
    };
    let mut trace = Vec::new();

    for round in 1..=rounds {
        // Maximizing Σ Dᵢyᵢh(xᵢ) = 1 − 2·err minimizes the weighted error.
        let u: Vec<f64> = dist.iter().zip(y).map(|(d, t)| d * t).collect();
        let (stump, _) = search.best(&u)?;
        let col: Vec<f64> = ds
            .column(stump.feature)
            .iter()
            .map(|&v| stump.response_value(v))
            .collect();
        let err: f64 = dist
            .iter()
            .zip(&col)
            .zip(y)
            .filter(|((_, h), t)| *h != *t)
            .map(|((d, _), _)| d)
            .sum();
        if err >= 0.5 {
            break;
        }
        let a = if err > 0.0 {
            (0.5 * ((1.0 - err) / err).ln()).min(max_stage_weight())
        } else {
            max_stage_weight()
        };
        for i in 0..m {
            margins[i] += a * col[i];
            dist[i] *= (-a * y[i] * col[i]).exp();
        }
        let z: f64 = dist.iter().sum();
        dist.iter_mut().for_each(|d| *d /= z);

        let wrong = margins
            .iter()
            .zip(y)
            .filter(|(f, t)| weak::sign(**f) != **t)
            .count();
        trace.push(RoundRecord {
            round,
            learner: WeakLearner::Stump(stump.clone()).summary(),
            weighted_error: err,
            stage_weight: a,
            train_error: wrong as f64 / m as f64,
        });
        model.learners.push(stump);
        model.weights.push(a);
        observe(round, &dist);
        if err == 0.0 {
            break;
        }
    }
    Ok(AdaBoostFit { model, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_stops_after_one_round() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let raw: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        let ds = Dataset::from_rows(&rows, &raw, None).unwrap();
        let view = BinaryView::new(&ds).unwrap();
        let fit = train_adaboost(&view, 20).unwrap();
        assert_eq!(fit.model.len(), 1);
        assert_eq!(fit.trace[0].train_error, 0.0);
        assert_eq!(fit.model.weights[0], max_stage_weight());
    }

    #[test]
    fn empty_model_predicts_plus_one() {
        let m = AdaBoostModel {
            learners: vec![],
            weights: vec![],
        };
        assert_eq!(m.predict(&[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn single_stump_is_its_response() {
        let s = DecisionStump {
            feature: 0,
            threshold: 0.5,
            polarity: -1,
        };
        let m = AdaBoostModel {
            learners: vec![s],
            weights: vec![1.0],
        };
        assert_eq!(m.predict(&[1.0]).unwrap(), -1.0);
        assert_eq!(m.predict(&[0.0]).unwrap(), 1.0);
    }
}
