//! Independent reference solvers used only by tests.
//!
//! Everything here is deliberately naive: it takes dense inputs, shares no
//! code with `cgens-core`, and trades speed for transparency.

use nalgebra::{DMatrix, DVector};

/// Hinge SVM with the bias as an extra constant feature, solved in the dual
/// `max 1ᵀα − ½ αᵀQα, 0 ≤ α ≤ C` with `Q = (yyᵀ) ∘ (XᵀX + 11ᵀ)` by
/// accelerated projected gradient (FISTA) with restarts.
///
/// `h` is `J × m` (rows are learners). Returns `(α, primal objective)`.
pub fn svm_dual_fista(h: &DMatrix<f64>, y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64) {
    let m = h.ncols();
    let yv = DVector::from_column_slice(y);
    let mut k = h.tr_mul(h);
    k.add_scalar_mut(1.0);
    let q = DMatrix::from_fn(m, m, |i, j| y[i] * y[j] * k[(i, j)]);
    let lip = q.symmetric_eigenvalues().max().max(1e-12);
    let step = 1.0 / lip;
    let project = |v: &DVector<f64>| v.map(|a| a.clamp(0.0, c));

    let mut x = DVector::zeros(m);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let dual = |a: &DVector<f64>| a.sum() - 0.5 * a.dot(&(&q * a));
    let mut best = dual(&x);
    for _ in 0..iters {
        let grad = DVector::from_element(m, 1.0) - &q * &z;
        let next = project(&(&z + grad * step));
        let val = dual(&next);
        if val < best {
            // Objective went down: restart momentum from the last iterate.
            t = 1.0;
            z = x.clone();
            continue;
        }
        best = val;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
    }
    let ya = x.component_mul(&yv);
    let w = h * &ya;
    let b = ya.sum();
    (x.as_slice().to_vec(), svm_primal(h, y, w.as_slice(), b, c))
}

/// `½(‖w‖² + b²) + C Σ max(0, 1 − yᵢ(wᵀΦ(xᵢ) + b))`.
pub fn svm_primal(h: &DMatrix<f64>, y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let wv = DVector::from_column_slice(w);
    let f = h.tr_mul(&wv);
    let hinge: f64 = (0..h.ncols())
        .map(|i| (1.0 - y[i] * (f[i] + b)).max(0.0))
        .sum();
    0.5 * (wv.norm_squared() + b * b) + c * hinge
}

/// Least-squares problem `min ½‖w‖² + (C/2)‖t − Hᵀw − b1‖²` with `b`
/// unregularized, solved through its `(J+1) × (J+1)` normal equations.
/// `labels` is `m × l`; each column is an independent target.
/// Returns `(b, W)` with `W` of shape `J × l`.
pub fn sls_normal_equations(
    h: &DMatrix<f64>,
    labels: &DMatrix<f64>,
    c: f64,
) -> (DVector<f64>, DMatrix<f64>) {
    let (j, m) = h.shape();
    let l = labels.ncols();
    // Design matrix A = [Hᵀ 1] (m × (J+1)); penalty on the first J entries.
    let a = DMatrix::from_fn(m, j + 1, |i, k| if k < j { h[(k, i)] } else { 1.0 });
    let mut normal = a.tr_mul(&a) * c;
    for k in 0..j {
        normal[(k, k)] += 1.0;
    }
    let rhs = a.tr_mul(labels) * c;
    let sol = normal
        .lu()
        .solve(&rhs)
        .expect("normal equations are nonsingular");
    let w = sol.rows(0, j).into_owned();
    let b = DVector::from_fn(l, |t, _| sol[(j, t)]);
    (b, w)
}

/// Dual residual `U = C · (L − HᵀW − 1bᵀ)` for a primal solution.
pub fn sls_dual_from_primal(
    h: &DMatrix<f64>,
    labels: &DMatrix<f64>,
    b: &DVector<f64>,
    w: &DMatrix<f64>,
    c: f64,
) -> DMatrix<f64> {
    let mut f = h.tr_mul(w);
    for mut row in f.row_iter_mut() {
        row += b.transpose();
    }
    (labels - f) * c
}

/// `(HᵀH + C⁻¹I)⁻¹` by LU with partial pivoting on the full matrix.
pub fn direct_inverse(h: &DMatrix<f64>, c: f64) -> DMatrix<f64> {
    let m = h.ncols();
    let s = h.tr_mul(h) + DMatrix::identity(m, m) / c;
    s.lu().try_inverse().expect("S is positive definite")
}

/// Response of `polarity · sgn(x − t)` with `sgn(0) = +1`.
fn stump(x: f64, t: f64, polarity: f64) -> f64 {
    polarity * if x - t >= 0.0 { 1.0 } else { -1.0 }
}

/// Every distinct stump column on `x` (`m × d`, row per sample): one
/// threshold below the minimum and one at each distinct observed value
/// (which places `t` between the value and its predecessor), both
/// polarities. Returns `(feature, threshold, polarity, column)`.
pub fn all_stumps(x: &[Vec<f64>]) -> Vec<(usize, f64, f64, Vec<f64>)> {
    let d = x.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for f in 0..d {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut thresholds = vec![vals[0] - 1.0];
        thresholds.extend(vals.iter().skip(1).copied());
        for &t in &thresholds {
            for p in [1.0, -1.0] {
                let col = x.iter().map(|r| stump(r[f], t, p)).collect();
                out.push((f, t, p, col));
            }
        }
    }
    out
}

/// `max |Σᵢ uᵢ h(xᵢ)|` over all stumps, by direct summation.
pub fn best_stump_score(x: &[Vec<f64>], u: &[f64]) -> f64 {
    all_stumps(x)
        .iter()
        .map(|(_, _, _, col)| col.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Minimum weighted 0-1 error over all stumps.
pub fn min_weighted_stump_error(x: &[Vec<f64>], y: &[f64], dist: &[f64]) -> f64 {
    all_stumps(x)
        .iter()
        .map(|(_, _, _, col)| {
            col.iter()
                .zip(y)
                .zip(dist)
                .filter(|((h, t), _)| h != t)
                .map(|(_, d)| d)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Binary least-squares SVM on signed targets with an unregularized bias:
/// returns `F(x)` on the training and extra response columns.
///
/// `h` is `J × m` training responses, `h_test` is `J × n`.
pub fn binary_lssvm_outputs(
    h: &DMatrix<f64>,
    y: &[f64],
    c: f64,
    h_test: &DMatrix<f64>,
) -> Vec<f64> {
    let targets = DMatrix::from_column_slice(y.len(), 1, y);
    let (b, w) = sls_normal_equations(h, &targets, c);
    let f = h_test.tr_mul(&w);
    (0..h_test.ncols()).map(|i| f[(i, 0)] + b[0]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_point_svm() {
        // x = ±1, y = ±1: optimum w = 1, b = 0, primal ½.
        let h = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let (_, p) = svm_dual_fista(&h, &[1.0, -1.0], 10.0, 5000);
        assert!((p - 0.5).abs() < 1e-8, "{p}");
    }

    #[test]
    fn normal_equations_without_learners_fit_the_mean() {
        let h = DMatrix::<f64>::zeros(0, 3);
        let l = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 6.0]);
        let (b, w) = sls_normal_equations(&h, &l, 1.0);
        assert!((b[0] - 3.0).abs() < 1e-12);
        assert_eq!(w.nrows(), 0);
    }

    #[test]
    fn stump_enumeration_counts() {
        let x = vec![vec![1.0], vec![2.0], vec![2.0], vec![5.0]];
        assert_eq!(all_stumps(&x).len(), 2 * 3);
    }
}
