//! Error metrics, cross-validated grid search and benchmark runs.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cg_binary::TrainConfig;
use crate::dataset::{self, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::model::{self, Method};
use crate::seed;

/// Fraction of positions where `predicted` and `truth` differ.
pub fn error_rate<T: PartialEq>(predicted: &[T], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("error rate of an empty set".into()));
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c_values: Vec<f64>,
    pub j_max_values: Vec<usize>,
    pub folds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            c_values: vec![0.1, 1.0, 10.0],
            j_max_values: vec![25, 50, 100, 250, 500],
            folds: 5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c_values.is_empty() || self.j_max_values.is_empty() {
            return Err(Error::InvalidArgument("empty parameter grid".into()));
        }
        if let Some(c) = self.c_values.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "grid C value {c} is not positive"
            )));
        }
        if self.j_max_values.contains(&0) {
            return Err(Error::InvalidArgument(
                "grid J_max values must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub c: f64,
    pub j_max: usize,
    pub fold_errors: Vec<f64>,
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_c: f64,
    pub best_j_max: usize,
    pub best_error: f64,
    /// Every grid point, ordered by C then J_max as given in the grid.
    pub table: Vec<CvCell>,
}

/// Stratified k-fold grid search. Each `(C, fold)` pair is trained once up to
/// the largest `J_max` and read off at every grid value along the way. The
/// best point minimizes the mean fold error; ties go to the smaller `J_max`,
/// then the smaller `C`.
pub fn cv_select(
    data: &Dataset,
    grid: &GridSpec,
    method: Method,
    base: &TrainConfig,
    seed: u64,
) -> Result<CvResult> {
    grid.validate()?;
    let folds = dataset::kfold(data, grid.folds, seed)?;
    let jm = &grid.j_max_values;

    let jobs: Vec<(usize, usize)> = (0..grid.c_values.len())
        .flat_map(|ci| (0..folds.len()).map(move |f| (ci, f)))
        .collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(ci, f)| {
            let (tr, te) = &folds[f];
            let train = data.subset(tr)?;
            let test = data.subset(te)?;
            let cfg = TrainConfig {
                c: grid.c_values[ci],
                ..base.clone()
            };
            model::fit_path(method, &train, &cfg, jm)?
                .iter()
                .map(|m| m.error(&test))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut table = Vec::new();
    for (ci, &c) in grid.c_values.iter().enumerate() {
        for (ji, &j_max) in jm.iter().enumerate() {
            let fold_errors: Vec<f64> = (0..folds.len())
                .map(|f| per_job[ci * folds.len() + f][ji])
                .collect();
            let mean_error = mean(&fold_errors);
            table.push(CvCell {
                c,
                j_max,
                fold_errors,
                mean_error,
            });
        }
    }
    let best = table
        .iter()
        .min_by(|a, b| {
            a.mean_error
                .total_cmp(&b.mean_error)
                .then(a.j_max.cmp(&b.j_max))
                .then(a.c.total_cmp(&b.c))
        })
        .expect("grid is nonempty");
    Ok(CvResult {
        best_c: best.c,
        best_j_max: best.j_max,
        best_error: best.mean_error,
        table,
    })
}

/// A named method configuration for [`benchmark`].
#[derive(Debug, Clone)]
pub struct MethodSpec {
    pub name: String,
    pub method: Method,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub errors: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub train_seconds: Vec<f64>,
    /// Set when the method failed on some split; `errors` is then empty.
    pub failure: Option<String>,
}

impl EvalReport {
    fn from_cells(method: String, cells: Vec<Result<(f64, f64)>>) -> Self {
        let mut errors = Vec::new();
        let mut train_seconds = Vec::new();
        for cell in cells {
            match cell {
                Ok((e, t)) => {
                    errors.push(e);
                    train_seconds.push(t);
                }
                Err(err) => {
                    return Self {
                        method,
                        errors: vec![],
                        mean: f64::NAN,
                        std: f64::NAN,
                        train_seconds: vec![],
                        failure: Some(err.to_string()),
                    }
                }
            }
        }
        Self {
            method,
            mean: mean(&errors),
            std: std_dev(&errors),
            errors,
            train_seconds,
            failure: None,
        }
    }

    pub fn mean_train_seconds(&self) -> f64 {
        mean(&self.train_seconds)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); 0 for a single value.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return if v.is_empty() { f64::NAN } else { 0.0 };
    }
    let mu = mean(v);
    (v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// The `(train, test)` index pairs for a split spec. A holdout spec yields
/// `repeats` independent random splits; k-fold yields `folds × repeats`
/// splits, each repeat reshuffled.
pub fn splits(
    data: &Dataset,
    spec: &SplitSpec,
    repeats: usize,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    let mut out = Vec::new();
    for r in 0..repeats as u64 {
        match *spec {
            SplitSpec::Holdout {
                train_fraction,
                seed: s,
            } => out.push(dataset::train_test_split(
                data,
                train_fraction,
                seed::derive(s, r),
            )?),
            SplitSpec::KFold { folds, seed: s } => {
                out.extend(dataset::kfold(data, folds, seed::derive(s, r))?)
            }
        }
    }
    Ok(out)
}

/// Trains and tests every method on every split. Timing covers the training
/// call only (weak-learner search included). Cells run in parallel and are
/// assembled in input order; a method that fails on any split is reported
/// as failed without stopping the others.
pub fn benchmark(
    data: &Dataset,
    methods: &[MethodSpec],
    split: &SplitSpec,
    repeats: usize,
) -> Result<Vec<EvalReport>> {
    let splits = splits(data, split, repeats)?;
    let parts: Vec<(Dataset, Dataset)> = splits
        .iter()
        .map(|(tr, te)| Ok((data.subset(tr)?, data.subset(te)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|mi| (0..parts.len()).map(move |s| (mi, s)))
        .collect();
    let mut results: Vec<Result<(f64, f64)>> = cells
        .par_iter()
        .map(|&(mi, s)| {
            let (train, test) = &parts[s];
            let spec = &methods[mi];
            let start = Instant::now();
            let (model, _) = model::fit(spec.method, train, &spec.config)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok((model.error(test)?, seconds))
        })
        .collect();
    let n = parts.len();
    let mut reports = Vec::with_capacity(methods.len());
    for spec in methods.iter().rev() {
        let cells = results.split_off(results.len() - n);
        reports.push(EvalReport::from_cells(spec.name.clone(), cells));
    }
    reports.reverse();
    Ok(reports)
}

/// `method,mean_err,std_err,mean_train_seconds,splits,status`.
pub fn write_reports_csv(reports: &[EvalReport], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "method",
        "mean_err",
        "std_err",
        "mean_train_seconds",
        "splits",
        "status",
    ])?;
    for r in reports {
        out.write_record([
            r.method.clone(),
            r.mean.to_string(),
            r.std.to_string(),
            r.mean_train_seconds().to_string(),
            r.errors.len().to_string(),
            r.failure.clone().unwrap_or_else(|| "ok".into()),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Fixed-width table for terminals.
pub fn format_reports_table(reports: &[EvalReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.method.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut s = format!(
        "{:<width$}  {:>9}  {:>9}  {:>12}\n",
        "method", "mean_err", "std_err", "train_secs"
    );
    for r in reports {
        match &r.failure {
            None => writeln!(
                s,
                "{:<width$}  {:>9.4}  {:>9.4}  {:>12.4}",
                r.method,
                r.mean,
                r.std,
                r.mean_train_seconds()
            ),
            Some(msg) => writeln!(s, "{:<width$}  failed: {msg}", r.method),
        }
        .expect("writing to a String cannot fail");
    }
    s
}

/// `c,j_max,mean_err,fold_errs` with fold errors joined by `;`.
pub fn write_cv_csv(result: &CvResult, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["c", "j_max", "mean_err", "fold_errs", "best"])?;
    for cell in &result.table {
        let folds: Vec<String> = cell.fold_errors.iter().map(|e| e.to_string()).collect();
        let best = cell.c == result.best_c && cell.j_max == result.best_j_max;
        out.write_record([
            cell.c.to_string(),
            cell.j_max.to_string(),
            cell.mean_error.to_string(),
            folds.join(";"),
            u8::from(best).to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_rate_cases() {
        assert_eq!(error_rate(&[1, 2, 2], &[1, 2, 2]).unwrap(), 0.0);
        assert_eq!(error_rate(&[1.0, -1.0], &[-1.0, 1.0]).unwrap(), 1.0);
        let p = [1, 1, 1, 2, 2, 2, 2, 2, 2, 2];
        let t = [2, 2, 2, 2, 2, 2, 2, 2, 2, 2];
        assert!((error_rate(&p, &t).unwrap() - 0.3).abs() < 1e-15);
        assert!(error_rate(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn stats() {
        assert_eq!(std_dev(&[2.0]), 0.0);
        assert!((std_dev(&[1.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_rejected() {
        let g = GridSpec {
            c_values: vec![],
            ..GridSpec::default()
        };
        assert!(g.validate().is_err());
    }
}
