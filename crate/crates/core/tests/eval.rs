use cgens_core::cg_binary::TrainConfig;
use cgens_core::dataset::SplitSpec;
use cgens_core::eval::{self, GridSpec, MethodSpec};
use cgens_core::model::{self, Method};
use cgens_core::toy;

fn base(j: usize) -> TrainConfig {
    let mut c = TrainConfig::new(1.0);
    c.j_max = j;
    c
}

#[test]
fn fit_path_matches_separate_fits() {
    let (tr, te) = toy::circle(120, 60, 4).unwrap();
    for method in [Method::Cgens, Method::CgensSls, Method::AdaBoost] {
        let path = model::fit_path(method, &tr, &base(0), &[5, 12, 20]).unwrap();
        for (m, j) in path.iter().zip([5, 12, 20]) {
            let (direct, _) = model::fit(method, &tr, &base(j)).unwrap();
            assert_eq!(
                m.predict(&te).unwrap(),
                direct.predict(&te).unwrap(),
                "{method} J={j}"
            );
        }
    }
}

#[test]
fn cv_picks_the_table_minimum_and_is_deterministic() {
    let (tr, _) = toy::circle(100, 40, 6).unwrap();
    let grid = GridSpec {
        c_values: vec![0.5, 5.0],
        j_max_values: vec![5, 20],
        folds: 3,
    };
    let a = eval::cv_select(&tr, &grid, Method::Cgens, &base(1), 11).unwrap();
    let b = eval::cv_select(&tr, &grid, Method::Cgens, &base(1), 11).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.table.len(), 4);
    assert!(a.table.iter().all(|c| a.best_error <= c.mean_error));

    let single = GridSpec {
        c_values: vec![a.best_c],
        j_max_values: vec![a.best_j_max],
        folds: 3,
    };
    let again = eval::cv_select(&tr, &single, Method::Cgens, &base(1), 11).unwrap();
    assert_eq!((again.best_c, again.best_j_max), (a.best_c, a.best_j_max));
    assert_eq!(again.best_error, a.best_error);
}

#[test]
fn cv_ties_prefer_small_models() {
    // Classes far apart, so every fold's stump separates its test set.
    let rows: Vec<Vec<f64>> = (0..30)
        .map(|i| vec![i as f64 + 100.0 * f64::from(u8::from(i >= 15))])
        .collect();
    let raw: Vec<f64> = (0..30).map(|i| if i < 15 { -1.0 } else { 1.0 }).collect();
    let ds = cgens_core::dataset::Dataset::from_rows(&rows, &raw, None).unwrap();
    let grid = GridSpec {
        c_values: vec![10.0, 1.0],
        j_max_values: vec![10, 3],
        folds: 3,
    };
    let r = eval::cv_select(&ds, &grid, Method::AdaBoost, &base(1), 0).unwrap();
    assert_eq!(r.best_error, 0.0);
    assert_eq!((r.best_c, r.best_j_max), (1.0, 3));
}

#[test]
fn benchmark_counts_reproducibility_and_quarantine() {
    let (ds, _) = toy::circle(200, 40, 7).unwrap();
    let methods = vec![
        MethodSpec {
            name: "cgens".into(),
            method: Method::Cgens,
            config: base(20),
        },
        MethodSpec {
            name: "broken".into(),
            method: Method::Cgens,
            config: TrainConfig {
                c: -1.0,
                ..base(20)
            },
        },
        MethodSpec {
            name: "adaboost".into(),
            method: Method::AdaBoost,
            config: base(20),
        },
    ];
    let split = SplitSpec::Holdout {
        train_fraction: 0.6,
        seed: 3,
    };
    let a = eval::benchmark(&ds, &methods, &split, 5).unwrap();
    let b = eval::benchmark(&ds, &methods, &split, 5).unwrap();
    assert_eq!(a.len(), 3);
    assert_eq!(a[0].errors.len(), 5);
    assert_eq!(a[2].errors.len(), 5);
    assert!(a[1].failure.is_some());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.errors, y.errors);
        assert_eq!(x.method, y.method);
    }
    let r = &a[0];
    assert!((eval::mean(&r.errors) - r.mean).abs() <= 1e-12);
    assert!((eval::std_dev(&r.errors) - r.std).abs() <= 1e-12);

    let mut csv = Vec::new();
    eval::write_reports_csv(&a, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("method,mean_err,std_err,mean_train_seconds"));
    assert!(eval::format_reports_table(&a)
        .lines()
        .any(|l| l.starts_with("broken ") && l.contains("failed: ")));
}

#[test]
fn kfold_benchmark_aggregates_every_fold() {
    let (ds, _) = toy::circle(90, 40, 8).unwrap();
    let methods = vec![MethodSpec {
        name: "ada".into(),
        method: Method::AdaBoost,
        config: base(10),
    }];
    let split = SplitSpec::KFold { folds: 3, seed: 1 };
    let r = eval::benchmark(&ds, &methods, &split, 2).unwrap();
    assert_eq!(r[0].errors.len(), 6);
}

#[test]
fn cgens_is_competitive_with_adaboost_on_the_circle() {
    let (ds, _) = toy::circle(500, 40, 7).unwrap();
    let methods = vec![
        MethodSpec {
            name: "cgens".into(),
            method: Method::Cgens,
            config: base(100),
        },
        MethodSpec {
            name: "adaboost".into(),
            method: Method::AdaBoost,
            config: base(100),
        },
    ];
    let split = SplitSpec::Holdout {
        train_fraction: 0.6,
        seed: 7,
    };
    let r = eval::benchmark(&ds, &methods, &split, 3).unwrap();
    assert!(
        r[0].mean <= r[1].mean + 0.02,
        "{} vs {}",
        r[0].mean,
        r[1].mean
    );
}
