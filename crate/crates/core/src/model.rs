//! Trained-model artifacts: a method-agnostic front end for fitting and
//! predicting, a versioned JSON document, and trace CSV export.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, AdaBoostModel, RoundRecord};
use crate::cg_binary::{self, EnsembleModel, IterationRecord, TrainConfig};
use crate::dataset::{self, BinaryView, Dataset, Scaler};
use crate::error::{Error, Result};
use crate::mc_simplex::{self, McIterationRecord, MulticlassModel, SimplexCode};
use crate::weak::{Family, WeakLearner};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "cgens")]
    Cgens,
    #[serde(rename = "cgens-sls")]
    CgensSls,
    #[serde(rename = "adaboost")]
    AdaBoost,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cgens => "cgens",
            Method::CgensSls => "cgens-sls",
            Method::AdaBoost => "adaboost",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cgens" => Ok(Method::Cgens),
            "cgens-sls" => Ok(Method::CgensSls),
            "adaboost" => Ok(Method::AdaBoost),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Binary(EnsembleModel),
    Multiclass(MulticlassModel),
    AdaBoost(AdaBoostModel),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Binary(Vec<IterationRecord>),
    Multiclass(Vec<McIterationRecord>),
    AdaBoost(Vec<RoundRecord>),
}

/// A fitted predictor with everything needed to apply it to raw inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub method: Method,
    pub family: Family,
    pub predictor: Predictor,
    /// Applied to inputs before the predictor.
    pub scaler: Option<Scaler>,
    /// Raw label of class `c` at index `c − 1`.
    pub labels: Vec<f64>,
    pub feature_count: usize,
}

/// One prediction: the margin (binary) or per-class scores, and the class id.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scores: Vec<f64>,
    pub class: usize,
}

/// Perceptron and Fourier parameters are sampled relative to the data scale,
/// so by default those families train on standardized inputs. Stumps are
/// scale-invariant and see the raw features. `cfg.standardize` overrides.
pub fn standardizes(family: Family, cfg: &TrainConfig) -> bool {
    cfg.standardize.unwrap_or(family != Family::Stump)
}

/// Trains `method` on `data`. The multi-class method accepts any `k ≥ 2`;
/// the binary methods need `k = 2`. AdaBoost runs `cfg.j_max` rounds.
pub fn fit(method: Method, data: &Dataset, cfg: &TrainConfig) -> Result<(TrainedModel, Trace)> {
    let family = match method {
        Method::AdaBoost => Family::Stump,
        _ => cfg.pool.family,
    };
    let (scaled, scaler) = if standardizes(family, cfg) {
        let (s, sc) = dataset::standardize(data);
        (Some(s), Some(sc))
    } else {
        (None, None)
    };
    let train = scaled.as_ref().unwrap_or(data);
    let (predictor, trace) = match method {
        Method::Cgens => {
            let fit = cg_binary::train(&BinaryView::new(train)?, cfg)?;
            (Predictor::Binary(fit.model), Trace::Binary(fit.trace))
        }
        Method::CgensSls => {
            let fit = mc_simplex::train_mc(train, cfg)?;
            (
                Predictor::Multiclass(fit.model),
                Trace::Multiclass(fit.trace),
            )
        }
        Method::AdaBoost => {
            let fit = baselines::train_adaboost(&BinaryView::new(train)?, cfg.j_max)?;
            (Predictor::AdaBoost(fit.model), Trace::AdaBoost(fit.trace))
        }
    };
    let model = TrainedModel {
        method,
        family,
        predictor,
        scaler,
        labels: data.raw_labels().to_vec(),
        feature_count: data.n_features(),
    };
    Ok((model, trace))
}

/// Models after each iteration count in `checkpoints`, from one training run
/// with `j_max = max(checkpoints)`. The path up to `J` does not depend on
/// `j_max`, so entry `n` equals `fit` with `j_max = checkpoints[n]`. Runs
/// that stop early fill the remaining checkpoints with the final model.
pub fn fit_path(
    method: Method,
    data: &Dataset,
    cfg: &TrainConfig,
    checkpoints: &[usize],
) -> Result<Vec<TrainedModel>> {
    let Some(&top) = checkpoints.iter().max() else {
        return Ok(Vec::new());
    };
    let cfg = TrainConfig {
        j_max: top,
        ..cfg.clone()
    };
    let wanted = |j: usize| checkpoints.contains(&j);
    let family = match method {
        Method::AdaBoost => Family::Stump,
        _ => cfg.pool.family,
    };
    let (scaled, scaler) = if standardizes(family, &cfg) {
        let (s, sc) = dataset::standardize(data);
        (Some(s), Some(sc))
    } else {
        (None, None)
    };
    let train = scaled.as_ref().unwrap_or(data);

    let mut snaps: Vec<(usize, Predictor)> = Vec::new();
    let last = match method {
        Method::Cgens => {
            let fit = cg_binary::train_observed(&BinaryView::new(train)?, &cfg, |v| {
                if wanted(v.iteration) {
                    let m = EnsembleModel {
                        learners: v.learners.to_vec(),
                        weights: v.solution.w.clone(),
                        bias: v.solution.b,
                    };
                    snaps.push((v.iteration, Predictor::Binary(m)));
                }
            })?;
            Predictor::Binary(fit.model)
        }
        Method::CgensSls => {
            let fit = mc_simplex::train_mc_observed(train, &cfg, |state, learners| {
                if wanted(learners.len()) {
                    let m = MulticlassModel {
                        learners: learners.to_vec(),
                        weights: state
                            .w
                            .row_iter()
                            .map(|r| r.iter().copied().collect())
                            .collect(),
                        biases: state.b.iter().copied().collect(),
                        codes: mc_simplex::simplex_codes(train.class_count())
                            .expect("k >= 2 checked by the trainer"),
                    };
                    snaps.push((learners.len(), Predictor::Multiclass(m)));
                }
            })?;
            Predictor::Multiclass(fit.model)
        }
        Method::AdaBoost => {
            let fit = baselines::train_adaboost(&BinaryView::new(train)?, top)?;
            for &j in checkpoints {
                if j <= fit.model.len() {
                    snaps.push((j, Predictor::AdaBoost(fit.model.truncated(j))));
                }
            }
            Predictor::AdaBoost(fit.model)
        }
    };
    Ok(checkpoints
        .iter()
        .map(|&j| {
            let predictor = snaps
                .iter()
                .find(|(n, _)| *n == j)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(|| last.clone());
            TrainedModel {
                method,
                family,
                predictor,
                scaler: scaler.clone(),
                labels: data.raw_labels().to_vec(),
                feature_count: data.n_features(),
            }
        })
        .collect())
}

impl TrainedModel {
    pub fn class_count(&self) -> usize {
        self.labels.len()
    }

    fn prepare<'a>(&self, data: &'a Dataset) -> Result<std::borrow::Cow<'a, Dataset>> {
        if data.n_features() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                got: data.n_features(),
            });
        }
        Ok(match &self.scaler {
            Some(s) => std::borrow::Cow::Owned(s.apply(data)?),
            None => std::borrow::Cow::Borrowed(data),
        })
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        let mut x = x.to_vec();
        if let Some(s) = &self.scaler {
            s.apply_row(&mut x)?;
        }
        Ok(match &self.predictor {
            Predictor::Binary(m) => binary_prediction(m.margin(&x)?),
            Predictor::AdaBoost(m) => binary_prediction(m.margin(&x)?),
            Predictor::Multiclass(m) => {
                let (scores, class) = m.predict(&x)?;
                Prediction { scores, class }
            }
        })
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        let data = self.prepare(data)?;
        Ok(match &self.predictor {
            Predictor::Binary(m) => m
                .margins(&data)?
                .into_iter()
                .map(binary_prediction)
                .collect(),
            Predictor::AdaBoost(m) => m
                .margins(&data)?
                .into_iter()
                .map(binary_prediction)
                .collect(),
            Predictor::Multiclass(m) => {
                let mut out = Vec::with_capacity(data.n_samples());
                let mut row = Vec::new();
                for i in 0..data.n_samples() {
                    data.row_into(i, &mut row);
                    let (scores, class) = m.predict(&row)?;
                    out.push(Prediction { scores, class });
                }
                out
            }
        })
    }

    pub fn raw_label(&self, class: usize) -> f64 {
        self.labels[class - 1]
    }

    /// Predicted raw labels.
    pub fn predict_raw(&self, data: &Dataset) -> Result<Vec<f64>> {
        Ok(self
            .predict(data)?
            .iter()
            .map(|p| self.raw_label(p.class))
            .collect())
    }

    /// Error rate against `data`'s labels, compared in raw label space so
    /// the class numbering of a separately loaded file does not matter.
    pub fn error(&self, data: &Dataset) -> Result<f64> {
        let truth: Vec<f64> = data.labels().iter().map(|&c| data.raw_label(c)).collect();
        crate::eval::error_rate(&self.predict_raw(data)?, &truth)
    }

    pub fn learners(&self) -> Vec<WeakLearner> {
        match &self.predictor {
            Predictor::Binary(m) => m.learners.clone(),
            Predictor::Multiclass(m) => m.learners.clone(),
            Predictor::AdaBoost(m) => m.as_weak_learners(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut doc = Document {
            version: FORMAT_VERSION,
            method: self.method,
            family: match self.method {
                Method::AdaBoost => "adaboost".into(),
                _ => self.family.name().into(),
            },
            feature_count: self.feature_count,
            labels: self.labels.clone(),
            scaler: self.scaler.clone(),
            learners: self.learners(),
            weights: None,
            bias: None,
            class_count: None,
            codes: None,
            weight_matrix: None,
            biases: None,
        };
        match &self.predictor {
            Predictor::Binary(m) => {
                doc.weights = Some(m.weights.clone());
                doc.bias = Some(m.bias);
            }
            Predictor::AdaBoost(m) => {
                doc.weights = Some(m.weights.clone());
                doc.bias = Some(0.0);
            }
            Predictor::Multiclass(m) => {
                doc.class_count = Some(m.class_count());
                doc.codes = Some(m.codes.codes.clone());
                doc.weight_matrix = Some(m.weights.clone());
                doc.biases = Some(m.biases.clone());
            }
        }
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {FORMAT_VERSION})",
                doc.version
            )));
        }
        let missing = |what: &str| Error::Model(format!("missing field {what:?}"));
        let family = match doc.family.as_str() {
            "adaboost" => Family::Stump,
            other => other.parse()?,
        };
        let predictor = match doc.method {
            Method::Cgens => Predictor::Binary(EnsembleModel::new(
                doc.learners,
                doc.weights.ok_or_else(|| missing("weights"))?,
                doc.bias.ok_or_else(|| missing("bias"))?,
            )?),
            Method::AdaBoost => {
                let learners = doc
                    .learners
                    .into_iter()
                    .map(|h| match h {
                        WeakLearner::Stump(s) => Ok(s),
                        other => Err(Error::Model(format!(
                            "adaboost model holds a {} learner",
                            other.family().name()
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let weights = doc.weights.ok_or_else(|| missing("weights"))?;
                if weights.len() != learners.len() {
                    return Err(Error::Model("weights and learners differ in length".into()));
                }
                Predictor::AdaBoost(AdaBoostModel { learners, weights })
            }
            Method::CgensSls => {
                let codes = SimplexCode {
                    codes: doc.codes.ok_or_else(|| missing("codes"))?,
                };
                let weights = doc.weight_matrix.ok_or_else(|| missing("weight_matrix"))?;
                let biases = doc.biases.ok_or_else(|| missing("biases"))?;
                let k = doc.class_count.ok_or_else(|| missing("class_count"))?;
                let l = k.saturating_sub(1);
                let shape_ok = codes.codes.len() == k
                    && codes.codes.iter().all(|c| c.len() == l)
                    && biases.len() == l
                    && weights.len() == doc.learners.len()
                    && weights.iter().all(|r| r.len() == l);
                if k < 2 || !shape_ok {
                    return Err(Error::Model("inconsistent multi-class shapes".into()));
                }
                Predictor::Multiclass(MulticlassModel {
                    learners: doc.learners,
                    weights,
                    biases,
                    codes,
                })
            }
        };
        let model = TrainedModel {
            method: doc.method,
            family,
            predictor,
            scaler: doc.scaler,
            labels: doc.labels,
            feature_count: doc.feature_count,
        };
        let k = match &model.predictor {
            Predictor::Multiclass(m) => m.class_count(),
            _ => 2,
        };
        if model.labels.len() != k {
            return Err(Error::Model(format!(
                "expected {k} labels, found {}",
                model.labels.len()
            )));
        }
        if let Some(s) = &model.scaler {
            if s.dim() != model.feature_count {
                return Err(Error::Model(
                    "scaler dimension differs from feature count".into(),
                ));
            }
        }
        for h in model.learners() {
            h.check_dim(model.feature_count)?;
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn binary_prediction(margin: f64) -> Prediction {
    // Class 1 is the +1 side.
    let class = if margin >= 0.0 { 1 } else { 2 };
    Prediction {
        scores: vec![margin],
        class,
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    version: u32,
    method: Method,
    family: String,
    feature_count: usize,
    labels: Vec<f64>,
    scaler: Option<Scaler>,
    learners: Vec<WeakLearner>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    codes: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    biases: Option<Vec<f64>>,
}

/// Stump feature counts over every model; all models must share one
/// feature count.
pub fn feature_frequency(models: &[TrainedModel]) -> Result<Vec<usize>> {
    let Some(first) = models.first() else {
        return Err(Error::InvalidArgument("no models".into()));
    };
    let d = first.feature_count;
    if let Some(m) = models.iter().find(|m| m.feature_count != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.feature_count,
        });
    }
    let learners: Vec<WeakLearner> = models.iter().flat_map(|m| m.learners()).collect();
    crate::weak::stump_feature_counts(&learners, d)
}

// ─── Trace CSV ──────────────────────────────────────────────────────

impl Trace {
    pub fn len(&self) -> usize {
        match self {
            Trace::Binary(t) => t.len(),
            Trace::Multiclass(t) => t.len(),
            Trace::AdaBoost(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Training error after the last iteration, if any.
    pub fn final_train_error(&self) -> Option<f64> {
        match self {
            Trace::Binary(t) => t.last().map(|r| r.train_error),
            Trace::Multiclass(t) => t.last().map(|r| r.train_error),
            Trace::AdaBoost(t) => t.last().map(|r| r.train_error),
        }
    }

    /// Binary: `iter,score,primal,dual,gap_sample,train_err`.
    /// Multi-class: `iter,tau_star,score,objective,train_err`.
    /// AdaBoost: `iter,weighted_err,stage_weight,train_err`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match self {
            Trace::Binary(t) => {
                out.write_record(["iter", "score", "primal", "dual", "gap_sample", "train_err"])?;
                for r in t {
                    out.write_record([
                        r.iteration.to_string(),
                        r.selection_score.to_string(),
                        r.primal_obj.to_string(),
                        r.dual_obj.to_string(),
                        r.unselected_gap_sample.to_string(),
                        r.train_error.to_string(),
                    ])?;
                }
            }
            Trace::Multiclass(t) => {
                out.write_record(["iter", "tau_star", "score", "objective", "train_err"])?;
                for r in t {
                    out.write_record([
                        r.iteration.to_string(),
                        r.tau_star.to_string(),
                        r.score.to_string(),
                        r.objective.to_string(),
                        r.train_error.to_string(),
                    ])?;
                }
            }
            Trace::AdaBoost(t) => {
                out.write_record(["iter", "weighted_err", "stage_weight", "train_err"])?;
                for r in t {
                    out.write_record([
                        r.round.to_string(),
                        r.weighted_error.to_string(),
                        r.stage_weight.to_string(),
                        r.train_error.to_string(),
                    ])?;
                }
            }
        }
        out.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Reads the `train_err` column of a trace CSV and the number of rows.
pub fn read_trace_train_errors(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let col = rdr
        .headers()?
        .iter()
        .position(|h| h == "train_err")
        .ok_or_else(|| {
            Error::InvalidArgument(format!("{}: no train_err column", path.display()))
        })?;
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v = rec.get(col).unwrap_or("");
        out.push(v.parse().map_err(|_| Error::Parse {
            line: n + 2,
            msg: format!("bad train_err {v:?}"),
        })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    fn cfg(j: usize) -> TrainConfig {
        let mut c = TrainConfig::new(1.0);
        c.j_max = j;
        c
    }

    #[test]
    fn binary_round_trip() {
        let (tr, te) = toy::circle(80, 40, 2).unwrap();
        let (model, _) = fit(Method::Cgens, &tr, &cfg(10)).unwrap();
        let back = TrainedModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.predict(&te).unwrap(), model.predict(&te).unwrap());
    }

    #[test]
    fn multiclass_and_adaboost_round_trip() {
        let (tr, _) = toy::blobs(3, 60, 30, 4.0, 5).unwrap();
        let (mc, _) = fit(Method::CgensSls, &tr, &cfg(5)).unwrap();
        assert_eq!(TrainedModel::from_json(&mc.to_json().unwrap()).unwrap(), mc);
        let (tr2, _) = toy::circle(60, 40, 5).unwrap();
        let (ada, _) = fit(Method::AdaBoost, &tr2, &cfg(5)).unwrap();
        let json = ada.to_json().unwrap();
        assert!(json.contains("\"family\": \"adaboost\""));
        assert_eq!(TrainedModel::from_json(&json).unwrap(), ada);
    }

    #[test]
    fn fourier_model_standardizes() {
        let (tr, _) = toy::circle(60, 40, 8).unwrap();
        let c = cfg(4).with_family(Family::Fourier);
        let (m, _) = fit(Method::Cgens, &tr, &c).unwrap();
        assert!(m.scaler.is_some());
        let back = TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back.predict(&tr).unwrap(), m.predict(&tr).unwrap());
    }

    #[test]
    fn standardization_can_be_overridden() {
        let (tr, _) = toy::circle(60, 40, 8).unwrap();
        let mut c = cfg(4).with_family(Family::Fourier);
        c.standardize = Some(false);
        assert!(fit(Method::Cgens, &tr, &c).unwrap().0.scaler.is_none());
        let mut c = cfg(4);
        c.standardize = Some(true);
        assert!(fit(Method::Cgens, &tr, &c).unwrap().0.scaler.is_some());
    }

    #[test]
    fn rejects_other_versions() {
        let (tr, _) = toy::circle(30, 40, 1).unwrap();
        let (m, _) = fit(Method::Cgens, &tr, &cfg(2)).unwrap();
        let json = m
            .to_json()
            .unwrap()
            .replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(
            TrainedModel::from_json(&json),
            Err(Error::Model(_))
        ));
    }
}
