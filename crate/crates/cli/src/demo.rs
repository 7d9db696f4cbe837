use std::path::PathBuf;

use cgens_core::cg_binary::TrainConfig;
use cgens_core::error::{Error, Result};
use cgens_core::model::{self, Method, TrainedModel};
use cgens_core::toy;
use clap::Args;

#[derive(Args)]
pub struct Toy2dArgs {
    /// Samples in each of the train and test sets.
    #[arg(long, default_value = "500")]
    n: usize,
    #[arg(long, default_value = "7")]
    seed: u64,
    /// Iterations for both methods.
    #[arg(long, default_value = "100")]
    jmax: usize,
    #[arg(long = "C", allow_hyphen_values = true, value_parser = crate::positive, default_value = "1")]
    c: f64,
    /// Grid points per axis of the decision-value grid.
    #[arg(long, default_value = "101")]
    grid: usize,
    /// The grid spans `[-extent, extent]` on both axes.
    #[arg(long, value_parser = crate::positive, default_value = "3")]
    extent: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Writes both models and traces, `convergence.csv` with per-iteration
/// train and test error of each method, and `grid.csv` with both decision
/// functions on a regular grid.
pub fn toy2d(args: &Toy2dArgs) -> Result<()> {
    if args.grid < 2 {
        return Err(Error::InvalidArgument(
            "grid needs at least 2 points".into(),
        ));
    }
    std::fs::create_dir_all(&args.out_dir).map_err(|source| Error::Io {
        path: args.out_dir.clone(),
        source,
    })?;
    let (train, test) = toy::circle(args.n, args.n, args.seed)?;
    let mut cfg = TrainConfig::new(args.c);
    cfg.j_max = args.jmax;
    cfg.pool.seed = args.seed;

    let checkpoints: Vec<usize> = (1..=args.jmax).collect();
    let mut finals: Vec<(&str, TrainedModel)> = Vec::new();
    let mut curves: Vec<Vec<(f64, f64)>> = Vec::new();
    for (name, method) in [("cgens", Method::Cgens), ("adaboost", Method::AdaBoost)] {
        let (model, trace) = model::fit(method, &train, &cfg)?;
        model.save(args.out_dir.join(format!("{name}_model.json")))?;
        trace.save_csv(args.out_dir.join(format!("{name}_trace.csv")))?;
        let path = model::fit_path(method, &train, &cfg, &checkpoints)?;
        let curve = path
            .iter()
            .map(|m| Ok((m.error(&train)?, m.error(&test)?)))
            .collect::<Result<Vec<_>>>()?;
        println!(
            "{name}: {} learners, train error {}, test error {}",
            model.learners().len(),
            model.error(&train)?,
            model.error(&test)?
        );
        finals.push((name, model));
        curves.push(curve);
    }

    let path = args.out_dir.join("convergence.csv");
    let mut out = csv::Writer::from_path(&path)?;
    out.write_record([
        "iter",
        "cgens_train_err",
        "cgens_test_err",
        "adaboost_train_err",
        "adaboost_test_err",
    ])?;
    for (j, (a, b)) in curves[0].iter().zip(&curves[1]).enumerate() {
        out.write_record([
            (j + 1).to_string(),
            a.0.to_string(),
            a.1.to_string(),
            b.0.to_string(),
            b.1.to_string(),
        ])?;
    }
    out.flush().map_err(|source| Error::Io { path, source })?;

    let path = args.out_dir.join("grid.csv");
    let mut out = csv::Writer::from_path(&path)?;
    out.write_record(["x1", "x2", "cgens", "adaboost"])?;
    let step = 2.0 * args.extent / (args.grid - 1) as f64;
    for a in 0..args.grid {
        for b in 0..args.grid {
            let x = [
                -args.extent + a as f64 * step,
                -args.extent + b as f64 * step,
            ];
            let mut rec = vec![x[0].to_string(), x[1].to_string()];
            for (_, m) in &finals {
                rec.push(m.predict_row(&x)?.scores[0].to_string());
            }
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(|source| Error::Io { path, source })?;
    Ok(())
}
