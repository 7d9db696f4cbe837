//! Synthetic datasets for demos and sanity checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::seed;

/// Median norm of a 2D standard Gaussian: `P(‖x‖ ≤ r) = 1 − e^{−r²/2} = ½`.
pub fn median_radius() -> f64 {
    (2.0 * std::f64::consts::LN_2).sqrt()
}

/// Circle-in-Gaussian data: `x ~ N(0, I₂)`, raw label `+1` inside the
/// median-norm circle and `−1` outside. Train and test come from one stream,
/// train first.
pub fn circle(n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let mut rng = seed::rng(seed);
    let r = median_radius();
    let mut draw = |n: usize| {
        let mut x = DMatrix::zeros(n, 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            x[(i, 0)] = a;
            x[(i, 1)] = b;
            // raw −1 is class 1, raw +1 is class 2
            labels.push(if a.hypot(b) <= r { 2 } else { 1 });
        }
        Dataset::new(x, labels, vec![-1.0, 1.0], None)
    };
    Ok((draw(n_train)?, draw(n_test)?))
}

/// `k` isotropic unit-variance Gaussian blobs with centers evenly spaced on a
/// circle of radius `spread`. Samples cycle through the classes, so every
/// class is present whenever `n ≥ k`. Raw labels are `1..=k`.
pub fn blobs(
    k: usize,
    n_train: usize,
    n_test: usize,
    spread: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let mut rng = seed::rng(seed);
    let centers: Vec<(f64, f64)> = (0..k)
        .map(|c| {
            let t = std::f64::consts::TAU * c as f64 / k as f64;
            (spread * t.cos(), spread * t.sin())
        })
        .collect();
    let raw: Vec<f64> = (1..=k).map(|c| c as f64).collect();
    let mut draw = |n: usize| {
        let mut x = DMatrix::zeros(n, 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % k;
            let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            x[(i, 0)] = centers[c].0 + a;
            x[(i, 1)] = centers[c].1 + b;
            labels.push(c + 1);
        }
        Dataset::new(x, labels, raw.clone(), None)
    };
    Ok((draw(n_train)?, draw(n_test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_roughly_balanced_and_deterministic() {
        let (tr, te) = circle(500, 500, 7).unwrap();
        assert_eq!(tr.n_samples(), 500);
        assert_eq!(te.n_samples(), 500);
        let inside = tr.class_counts()[1];
        assert!((200..=300).contains(&inside), "{inside}");
        assert_eq!(circle(500, 500, 7).unwrap().0, tr);
    }

    #[test]
    fn blobs_cover_every_class() {
        let (tr, _) = blobs(3, 300, 30, 4.0, 1).unwrap();
        assert_eq!(tr.class_counts(), vec![100, 100, 100]);
    }
}
