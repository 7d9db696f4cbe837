use cgens_core::cg_binary::TrainConfig;
use cgens_core::dataset::Dataset;
use cgens_core::linsvm::ResponseMatrix;
use cgens_core::mc_simplex::{self, simplex_codes, sinv_update, sls_solve};
use cgens_core::toy;
use cgens_core::weak::{self, PoolConfig, Pricing};
use cgens_oracles as oracle;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense(h: &ResponseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(h.n_learners(), h.n_samples(), |j, i| h.row(j)[i])
}

fn random_h(rng: &mut ChaCha8Rng, m: usize, j: usize) -> ResponseMatrix {
    let rows = (0..j)
        .map(|_| {
            (0..m)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    ResponseMatrix::from_rows(m, rows).unwrap()
}

fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn code_geometry_up_to_fifty_classes() {
    for k in 2..=50 {
        let codes = simplex_codes(k).unwrap();
        let c = codes.matrix();
        let gram = &c * c.transpose();
        let l = (k - 1) as f64;
        for a in 0..k {
            for b in 0..k {
                let want = if a == b { 1.0 } else { -1.0 / l };
                assert!((gram[(a, b)] - want).abs() <= 1e-12, "k={k}");
            }
        }
        for t in 0..k - 1 {
            assert!(c.column(t).sum().abs() <= 1e-12, "k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_normal_equations(seed in 0u64..100_000, m in 3usize..40, j in 0usize..8, k in 2usize..6, c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_h(&mut rng, m, j);
        let labels_idx: Vec<usize> = (0..m).map(|_| rng.random_range(1..=k)).collect();
        let codes = simplex_codes(k).unwrap();
        let l = codes.label_matrix(&labels_idx).unwrap();
        let sinv = mc_simplex::direct_sinv(&h, c).unwrap();
        let (b, u, w) = sls_solve(&h, &sinv, &l).unwrap();

        let hd = dense(&h);
        let (b_ref, w_ref) = oracle::sls_normal_equations(&hd, &l, c);
        let u_ref = oracle::sls_dual_from_primal(&hd, &l, &b_ref, &w_ref, c);
        prop_assert!((&b - &b_ref).abs().max() <= 1e-6);
        prop_assert!(max_abs(&u, &u_ref) <= 1e-6);
        if j > 0 {
            prop_assert!(max_abs(&w, &w_ref) <= 1e-6);
        }
        for t in 0..k - 1 {
            prop_assert!(u.column(t).sum().abs() <= 1e-8);
        }
    }

    #[test]
    fn rank_one_update_is_the_inverse(seed in 0u64..100_000, m in 1usize..20, steps in 1usize..12, c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = ResponseMatrix::new(m);
        let mut sinv = DMatrix::identity(m, m) * c;
        for _ in 0..steps {
            let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            sinv = sinv_update(&sinv, &row).unwrap();
            h.push_row(row).unwrap();
        }
        let direct = oracle::direct_inverse(&dense(&h), c);
        prop_assert!(max_abs(&sinv, &direct) <= 1e-8);
        prop_assert!(max_abs(&sinv, &sinv.transpose()) == 0.0);
    }
}

#[test]
fn thirty_updates_match_direct_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let m = 25;
    let c = 2.0;
    let mut h = ResponseMatrix::new(m);
    let mut sinv = DMatrix::identity(m, m) * c;
    for _ in 0..30 {
        let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        sinv = sinv_update(&sinv, &row).unwrap();
        h.push_row(row).unwrap();
    }
    assert!(max_abs(&sinv, &oracle::direct_inverse(&dense(&h), c)) <= 1e-8);
}

fn blobs3() -> (Dataset, Dataset) {
    toy::blobs(3, 150, 150, 4.0, 3).unwrap()
}

#[test]
fn stationarity_holds_after_every_iteration() {
    let (tr, _) = blobs3();
    let codes = simplex_codes(3).unwrap();
    let l = codes.label_matrix(tr.labels()).unwrap();
    let mut cfg = TrainConfig::new(1.0);
    cfg.j_max = 60;
    let mut checked = 0;
    mc_simplex::train_mc_observed(&tr, &cfg, |s, _| {
        let hd = dense(&s.h);
        assert!(max_abs(&s.sinv, &s.sinv.transpose()) <= 1e-9);
        for t in 0..2 {
            assert!(s.u.column(t).sum().abs() <= 1e-8);
        }
        assert!(max_abs(&s.w, &(&hd * &s.u)) <= 1e-8);
        let mut fit = hd.tr_mul(&s.w);
        for mut row in fit.row_iter_mut() {
            row += s.b.transpose();
        }
        let recon = fit + s.residual();
        assert!(max_abs(&recon, &l) <= 1e-6);
        checked += 1;
    })
    .unwrap();
    assert_eq!(checked, 60);
}

#[test]
fn objective_never_increases() {
    for (seed, k) in [(1u64, 3usize), (2, 4), (3, 2)] {
        let (tr, _) = toy::blobs(k, 120, 12, 2.0, seed).unwrap();
        let mut cfg = TrainConfig::new(1.0);
        cfg.j_max = 60;
        let fit = mc_simplex::train_mc(&tr, &cfg).unwrap();
        for pair in fit.trace.windows(2) {
            let (a, b) = (pair[0].objective, pair[1].objective);
            assert!(b <= a + 1e-8 * a.abs(), "k={k}: {a} -> {b}");
        }
    }
}

#[test]
fn drift_stays_small_and_refresh_restores_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let m = 60;
    let c = 1.0;
    let mut h = ResponseMatrix::new(m);
    let mut sinv = DMatrix::identity(m, m) * c;
    for _ in 0..150 {
        let row: Vec<f64> = (0..m)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        sinv = sinv_update(&sinv, &row).unwrap();
        h.push_row(row).unwrap();
    }
    let direct = oracle::direct_inverse(&dense(&h), c);
    assert!(max_abs(&sinv, &direct) <= 1e-7);
    let refreshed = mc_simplex::direct_sinv(&h, c).unwrap();
    assert!(max_abs(&refreshed, &direct) <= 1e-10);
}

#[test]
fn selection_matches_brute_force_over_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let m = rng.random_range(4..=30);
        let d = rng.random_range(1..=4);
        let l = rng.random_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-3..=3) as f64).collect())
            .collect();
        let raw: Vec<f64> = (0..m).map(|i| (i % 2) as f64).collect();
        let ds = Dataset::from_rows(&rows, &raw, None).unwrap();
        let u = DMatrix::from_fn(m, l, |_, _| rng.random_range(-1.0..1.0));
        let pricing = Pricing::new(&PoolConfig::default(), &ds).unwrap();
        let (h, tau, score) = mc_simplex::select_weak_mc(&u, &pricing, 0).unwrap();

        let mut best = 0.0f64;
        for (_, _, _, col) in oracle::all_stumps(&rows) {
            if col.iter().all(|&v| v == col[0]) {
                continue;
            }
            for t in 0..l {
                let s: f64 = col.iter().zip(u.column(t).iter()).map(|(a, b)| a * b).sum();
                best = best.max(s.abs());
            }
        }
        assert_eq!(score, best);
        let col = weak::response_column(&h, &ds).unwrap();
        let s: f64 = col
            .iter()
            .zip(u.column(tau).iter())
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(s.abs(), score);

        // Reversing the columns moves the winner accordingly.
        let rev = DMatrix::from_fn(m, l, |i, t| u[(i, l - 1 - t)]);
        let (h_rev, tau_rev, score_rev) = mc_simplex::select_weak_mc(&rev, &pricing, 0).unwrap();
        assert_eq!(score_rev, score);
        let col_rev = weak::response_column(&h_rev, &ds).unwrap();
        let s_rev: f64 = col_rev
            .iter()
            .zip(u.column(l - 1 - tau_rev).iter())
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(s_rev.abs(), score);
    }
}

#[test]
fn single_column_reduces_to_binary_pricing() {
    let (tr, _) = toy::circle(80, 40, 3).unwrap();
    let m = tr.n_samples();
    let u = DMatrix::from_fn(m, 1, |i, _| ((i * 13 % 7) as f64) - 3.0);
    let pricing = Pricing::new(&PoolConfig::default(), &tr).unwrap();
    let (h, tau, score) = mc_simplex::select_weak_mc(&u, &pricing, 0).unwrap();
    let col: Vec<f64> = u.column(0).iter().copied().collect();
    let p = pricing.price(&[&col], 0).unwrap();
    assert_eq!((h, tau, score), (p.learner, 0, p.score.abs()));
}

#[test]
fn two_classes_match_binary_lssvm() {
    let (tr, te) = toy::circle(200, 200, 12).unwrap();
    let mut cfg = TrainConfig::new(1.0);
    cfg.j_max = 30;
    let fit = mc_simplex::train_mc(&tr, &cfg).unwrap();
    let h_tr = ResponseMatrix::from_rows(
        tr.n_samples(),
        fit.model
            .learners
            .iter()
            .map(|h| weak::response_column(h, &tr).unwrap())
            .collect(),
    )
    .unwrap();
    let h_te = ResponseMatrix::from_rows(
        te.n_samples(),
        fit.model
            .learners
            .iter()
            .map(|h| weak::response_column(h, &te).unwrap())
            .collect(),
    )
    .unwrap();
    // Class 1 has code +1.
    let y: Vec<f64> = tr
        .labels()
        .iter()
        .map(|&c| if c == 1 { 1.0 } else { -1.0 })
        .collect();
    let f = oracle::binary_lssvm_outputs(&dense(&h_tr), &y, 1.0, &dense(&h_te));
    let agree = (0..te.n_samples())
        .filter(|&i| {
            let want = if f[i] >= 0.0 { 1 } else { 2 };
            fit.model.predict(&te.row(i)).unwrap().1 == want
        })
        .count();
    assert!(agree as f64 >= 0.99 * te.n_samples() as f64, "{agree}");
}

#[test]
fn huge_epsilon_gives_bias_only_model() {
    let (tr, _) = toy::blobs(3, 31, 6, 4.0, 2).unwrap();
    let mut cfg = TrainConfig::new(1.0);
    cfg.epsilon = 1e9;
    let fit = mc_simplex::train_mc(&tr, &cfg).unwrap();
    assert!(fit.model.learners.is_empty());
    // The class with 11 samples is the majority; the bias points at its code.
    let (scores, label) = fit.model.predict(&[0.0, 0.0]).unwrap();
    assert_eq!(label, 1);
    assert!(scores.iter().sum::<f64>().abs() < 1e-12);
}

#[test]
fn three_blobs_are_learned() {
    let (tr, te) = toy::blobs(3, 300, 300, 4.0, 7).unwrap();
    let mut cfg = TrainConfig::new(1.0);
    cfg.j_max = 100;
    let fit = mc_simplex::train_mc(&tr, &cfg).unwrap();
    let wrong = (0..te.n_samples())
        .filter(|&i| fit.model.predict(&te.row(i)).unwrap().1 != te.labels()[i])
        .count();
    assert!(wrong as f64 / te.n_samples() as f64 <= 0.05, "{wrong}");
}
