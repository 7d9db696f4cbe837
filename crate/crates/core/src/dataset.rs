//! Labeled datasets: LIBSVM and CSV readers/writers, standardization and
//! stratified splitting.
//!
//! Features are stored densely, column-major, so that a feature column is a
//! contiguous slice (weak-learner search scans whole columns). Raw labels are
//! remapped to contiguous class ids `1..=k` in ascending numeric order; the
//! mapping is kept so predictions can be reported in the original label space.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    class_count: usize,
    feature_names: Option<Vec<String>>,
    raw_labels: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from already-remapped class ids.
    ///
    /// `raw_labels[c - 1]` is the original label of class `c`. All invariants
    /// are checked: finite features, `m >= 2`, `d >= 1`, labels in `1..=k`
    /// with every class present.
    pub fn new(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        raw_labels: Vec<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let ds = Self::unchecked(features, labels, raw_labels, feature_names)?;
        if ds.n_samples() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 samples, got {}",
                ds.n_samples()
            )));
        }
        if let Some(c) = ds.class_counts().iter().position(|&n| n == 0) {
            return Err(Error::InvalidDataset(format!(
                "class {} has no samples",
                c + 1
            )));
        }
        Ok(ds)
    }

    /// Shared structural checks; class coverage and `m >= 2` are left to callers.
    fn unchecked(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        raw_labels: Vec<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (m, d) = features.shape();
        if d == 0 {
            return Err(Error::InvalidDataset("no features".into()));
        }
        if m == 0 {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        if labels.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: labels.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        let k = raw_labels.len();
        if k == 0 {
            return Err(Error::InvalidDataset("no classes".into()));
        }
        if let Some(bad) = labels.iter().find(|&&c| c == 0 || c > k) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside 1..={k}"
            )));
        }
        if let Some(names) = &feature_names {
            if names.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: names.len(),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            class_count: k,
            feature_names,
            raw_labels,
        })
    }

    /// Builds a dataset from row vectors and raw numeric labels, remapping the
    /// distinct raw labels to `1..=k` in ascending order.
    pub fn from_rows(
        rows: &[Vec<f64>],
        raw: &[f64],
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDataset("no samples".into()));
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if rows.len() != raw.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: raw.len(),
            });
        }
        let features = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        let (labels, raw_labels) = remap_labels(raw)?;
        Self::new(features, labels, raw_labels, feature_names)
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// Class ids in `1..=k`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Original labels, indexed by `class id - 1`.
    pub fn raw_labels(&self) -> &[f64] {
        &self.raw_labels
    }

    pub fn raw_label(&self, class: usize) -> f64 {
        self.raw_labels[class - 1]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.n_samples();
        &self.features.as_slice()[j * m..(j + 1) * m]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Copies row `i` into `buf` (resized to `d`).
    pub fn row_into(&self, i: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.features.row(i).iter());
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &c in &self.labels {
            counts[c - 1] += 1;
        }
        counts
    }

    /// Rows selected by `indices`, in that order.
    ///
    /// The subset keeps the parent's label space (class count and raw-label
    /// mapping) so models trained on it report the same labels; a class may
    /// therefore be absent from a subset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let m = self.n_samples();
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidArgument(format!(
                "sample index {bad} out of range"
            )));
        }
        let features = self.features.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::unchecked(
            features,
            labels,
            self.raw_labels.clone(),
            self.feature_names.clone(),
        )
    }

    /// Same labels, new feature matrix of identical shape.
    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Self> {
        if features.shape() != self.features.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: features.ncols(),
            });
        }
        Self::unchecked(
            features,
            self.labels.clone(),
            self.raw_labels.clone(),
            self.feature_names.clone(),
        )
    }
}

fn remap_labels(raw: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("labels"));
    }
    let mut distinct: Vec<f64> = raw.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let labels = raw
        .iter()
        .map(|v| distinct.partition_point(|d| d < v) + 1)
        .collect();
    Ok((labels, distinct))
}

/// Renders a raw label the way it is written back to files.
pub fn format_label(v: f64) -> String {
    format!("{v}")
}

/// A two-class dataset with labels mapped to ±1: class 1 ↦ +1, class 2 ↦ −1.
#[derive(Debug, Clone)]
pub struct BinaryView<'a> {
    data: &'a Dataset,
    signed: Vec<f64>,
}

impl<'a> BinaryView<'a> {
    pub fn new(data: &'a Dataset) -> Result<Self> {
        if data.class_count() != 2 {
            return Err(Error::InvalidArgument(format!(
                "binary view needs 2 classes, dataset has {}",
                data.class_count()
            )));
        }
        let signed = data
            .labels()
            .iter()
            .map(|&c| if c == 1 { 1.0 } else { -1.0 })
            .collect();
        Ok(Self { data, signed })
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn signed_labels(&self) -> &[f64] {
        &self.signed
    }
}

// ─── LIBSVM ─────────────────────────────────────────────────────────

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_libsvm(BufReader::new(file))
}

/// Parses `<label> <idx>:<val> ...` lines with 1-based, strictly increasing
/// indices. Blank lines and `#` comments are skipped; absent entries are 0.
pub fn read_libsvm(reader: impl BufRead) -> Result<Dataset> {
    let mut raw = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io("<libsvm input>", e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label = parse_number(label_tok, lineno, "label")?;

        let mut entries = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected <index>:<value>, got {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("non-numeric index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("index {idx} does not increase (previous {last})"),
                });
            }
            last = idx;
            let val = parse_number(val, lineno, "value")?;
            entries.push((idx - 1, val));
        }
        d = d.max(last);
        raw.push(label);
        sparse_rows.push(entries);
    }

    if sparse_rows.is_empty() {
        return Err(Error::EmptyFile);
    }
    if d == 0 {
        return Err(Error::InvalidDataset("no features".into()));
    }
    let mut features = DMatrix::zeros(sparse_rows.len(), d);
    for (i, row) in sparse_rows.iter().enumerate() {
        for &(j, v) in row {
            features[(i, j)] = v;
        }
    }
    let (labels, raw_labels) = remap_labels(&raw)?;
    Dataset::new(features, labels, raw_labels, None)
}

fn parse_number(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("non-numeric {what} {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite {what} {tok:?}"),
        });
    }
    Ok(v)
}

pub fn save_libsvm(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_libsvm(&mut w, data).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes non-zero entries only. The first line always carries the last
/// feature index so that the feature count survives a round trip.
pub fn write_libsvm(w: &mut impl Write, data: &Dataset) -> std::io::Result<()> {
    let d = data.n_features();
    for i in 0..data.n_samples() {
        write!(w, "{}", format_label(data.raw_label(data.labels()[i])))?;
        for j in 0..d {
            let v = data.features()[(i, j)];
            if v != 0.0 || (i == 0 && j == d - 1) {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

// ─── CSV ────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file), label, has_header)
}

pub fn read_csv(reader: impl Read, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Option<Vec<String>> = if has_header {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut records = Vec::new();
    for rec in rdr.records() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(Error::EmptyFile);
    }
    let width = header.as_ref().map_or(records[0].len(), Vec::len);
    let first_row = usize::from(has_header) + 1;

    let label_idx = match label {
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::InvalidArgument(format!(
                "label column {i} out of range (table has {width} columns)"
            )))
        }
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown label column {name:?}")))?,
    };

    let mut rows = Vec::with_capacity(records.len());
    let mut raw = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        let line = first_row + r;
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                msg: format!(
                    "ragged row {line}: expected {width} fields, got {}",
                    rec.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(width - 1);
        for (c, cell) in rec.iter().enumerate() {
            let v = parse_number(cell, line, "cell")?;
            if c == label_idx {
                raw.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if width < 2 {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }
    let names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|&(c, _)| c != label_idx)
            .map(|(_, n)| n)
            .collect()
    });
    Dataset::from_rows(&rows, &raw, names)
}

/// Writes the label as the first column. With `header`, the first line is
/// `label,<feature names>` (names default to `f1..fd`).
pub fn save_csv(path: impl AsRef<Path>, data: &Dataset, header: bool) -> Result<()> {
    let path = path.as_ref();
    let mut wtr = csv::Writer::from_path(path)?;
    if header {
        let mut h = vec!["label".to_string()];
        match data.feature_names() {
            Some(names) => h.extend(names.iter().cloned()),
            None => h.extend((1..=data.n_features()).map(|j| format!("f{j}"))),
        }
        wtr.write_record(&h)?;
    }
    for i in 0..data.n_samples() {
        let mut rec = vec![format_label(data.raw_label(data.labels()[i]))];
        rec.extend(data.features().row(i).iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

// ─── Standardization ────────────────────────────────────────────────

/// Per-feature affine map `(x - mean) / scale` fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    /// Population mean and standard deviation per feature. Constant features
    /// get `mean = value`, `scale = 1` and therefore map to exactly 0.
    pub fn fit(data: &Dataset) -> Self {
        let m = data.n_samples() as f64;
        let (mut mean, mut scale) = (Vec::new(), Vec::new());
        for j in 0..data.n_features() {
            let col = data.column(j);
            let (lo, hi) = col
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            if lo == hi {
                mean.push(lo);
                scale.push(1.0);
                continue;
            }
            let mu = col.iter().sum::<f64>() / m;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / m;
            mean.push(mu);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_features() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: data.n_features(),
            });
        }
        let mut f = data.features().clone();
        for (j, mut col) in f.column_iter_mut().enumerate() {
            for v in col.iter_mut() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        data.with_features(f)
    }

    pub fn apply_row(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (j, v) in x.iter_mut().enumerate() {
            *v = (*v - self.mean[j]) / self.scale[j];
        }
        Ok(())
    }
}

pub fn standardize(train: &Dataset) -> (Dataset, Scaler) {
    let scaler = Scaler::fit(train);
    let out = scaler.apply(train).expect("scaler fitted on this dataset");
    (out, scaler)
}

// ─── Splitting ──────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    Holdout { train_fraction: f64, seed: u64 },
    KFold { folds: usize, seed: u64 },
}

fn shuffled_by_class(data: &Dataset, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); data.class_count()];
    for (i, &c) in data.labels().iter().enumerate() {
        by_class[c - 1].push(i);
    }
    let mut rng = seed::rng(seed);
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    by_class
}

/// Stratified k-fold: each class is shuffled and dealt round-robin across
/// folds, continuing the deal position across classes so fold sizes balance.
/// Returns `(train, test)` index lists, each sorted ascending.
pub fn kfold(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("fold count {folds} < 2")));
    }
    let smallest = data
        .class_counts()
        .into_iter()
        .filter(|&n| n > 0)
        .min()
        .unwrap_or(0);
    if folds > smallest {
        return Err(Error::InvalidArgument(format!(
            "fold count {folds} exceeds smallest class size {smallest}"
        )));
    }
    let mut assignment = vec![0usize; data.n_samples()];
    let mut next = 0usize;
    for members in shuffled_by_class(data, seed) {
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.n_samples()).partition(|&i| assignment[i] == f);
            (train, test)
        })
        .collect())
}

/// Stratified holdout split. Every class with at least two samples keeps at
/// least one sample on each side.
pub fn train_test_split(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for members in shuffled_by_class(data, seed) {
        let n = members.len();
        let mut take = (train_fraction * n as f64).round() as usize;
        if n >= 2 {
            take = take.clamp(1, n - 1);
        }
        train.extend_from_slice(&members[..take.min(n)]);
        test.extend_from_slice(&members[take.min(n)..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<Dataset> {
        read_libsvm(Cursor::new(s))
    }

    #[test]
    fn libsvm_fills_missing_and_remaps_ascending() {
        let ds = parse("+1 1:0.5 3:1.0\n-1 2:2.0\n").unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.n_features(), 3);
        assert_eq!(ds.row(0), vec![0.5, 0.0, 1.0]);
        assert_eq!(ds.row(1), vec![0.0, 2.0, 0.0]);
        assert_eq!(ds.raw_labels(), &[-1.0, 1.0]);
        assert_eq!(ds.labels(), &[2, 1]);
    }

    #[test]
    fn libsvm_errors() {
        assert!(matches!(parse(""), Err(Error::EmptyFile)));
        assert!(matches!(
            parse("\n  \n# only comment\n"),
            Err(Error::EmptyFile)
        ));
        match parse("1 1:1\n2 2:x\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse("1 2:1 1:3\n2 1:1\n") {
            Err(Error::Parse { line: 1, msg }) => assert!(msg.contains("increase")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("1 0:1\n2 1:1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("a 1:1\n2 1:1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse("1 1:1\n"), Err(Error::InvalidDataset(_))));
    }

    #[test]
    fn csv_header_and_label_name() {
        let text = "a,y,b\n1,0,2\n3,1,4\n5,0,6\n";
        let ds = read_csv(Cursor::new(text), &LabelColumn::Name("y".into()), true).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(
            ds.feature_names().unwrap(),
            &["a".to_string(), "b".to_string()]
        );
        assert_eq!(ds.row(1), vec![3.0, 4.0]);
        assert_eq!(ds.labels(), &[1, 2, 1]);
    }

    #[test]
    fn csv_errors() {
        let ragged = "y,a\n1,2\n2\n";
        match read_csv(Cursor::new(ragged), &LabelColumn::Index(0), true) {
            Err(Error::Parse { line: 3, msg }) => assert!(msg.contains("ragged row 3")),
            other => panic!("unexpected {other:?}"),
        }
        let bad = "y,a\n1,2\n2,zz\n";
        assert!(matches!(
            read_csv(Cursor::new(bad), &LabelColumn::Index(0), true),
            Err(Error::Parse { line: 3, .. })
        ));
        let ok = "y,a\n1,2\n2,3\n";
        assert!(matches!(
            read_csv(Cursor::new(ok), &LabelColumn::Name("nope".into()), true),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            read_csv(Cursor::new(ok), &LabelColumn::Index(5), true),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn standardize_hand_values() {
        let ds = Dataset::from_rows(
            &[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
            &[0.0, 1.0, 0.0],
            None,
        )
        .unwrap();
        let (z, scaler) = standardize(&ds);
        let expect = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        for (a, b) in z.column(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(z.column(1), &[0.0, 0.0, 0.0]);
        assert_eq!(scaler.scale[1], 1.0);
        assert_eq!(scaler.apply(&ds).unwrap(), z);
    }

    #[test]
    fn kfold_balanced_classes() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let raw: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let ds = Dataset::from_rows(&rows, &raw, None).unwrap();
        let folds = kfold(&ds, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        for (_, test) in &folds {
            let mut per_class = [0; 2];
            for &i in test {
                per_class[ds.labels()[i] - 1] += 1;
            }
            assert_eq!(per_class, [1, 1]);
        }
        assert_eq!(folds, kfold(&ds, 5, 3).unwrap());
        assert!(kfold(&ds, 6, 3).is_err());
        assert!(kfold(&ds, 1, 3).is_err());
    }

    #[test]
    fn holdout_is_stratified_partition() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let raw: Vec<f64> = (0..40).map(|i| (i % 4 == 0) as u8 as f64).collect();
        let ds = Dataset::from_rows(&rows, &raw, None).unwrap();
        let (tr, te) = train_test_split(&ds, 0.75, 1).unwrap();
        assert_eq!(tr.len() + te.len(), 40);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        assert!(train_test_split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn binary_view_signs() {
        let ds = parse("3 1:1\n7 1:2\n3 1:0\n").unwrap();
        let view = BinaryView::new(&ds).unwrap();
        assert_eq!(view.signed_labels(), &[1.0, -1.0, 1.0]);
        let three = parse("1 1:1\n2 1:2\n3 1:0\n").unwrap();
        assert!(BinaryView::new(&three).is_err());
    }
}
