use std::fmt::Write as _;
use std::path::Path;

use landmark_core::baselines::{fit_group_lasso, fit_low_rank, fit_one_vs_all};
use landmark_core::dataset::{Dataset, Task};
use landmark_core::document::{
    load_model, save_model, save_planted, ModelDocument, PlantedDocument,
};
use landmark_core::experiments::bench::{
    sample_size_sweep, Method, SweepConfig, Tuning, NOT_IMPLEMENTED,
};
use landmark_core::experiments::cv::{cross_validate_with, landmark_grid, GridCell, Metric};
use landmark_core::experiments::metrics::MetricsReport;
use landmark_core::experiments::recovery::{recovery_experiment, RecoveryConfig};
use landmark_core::experiments::synthetic::{
    gen_synthetic_classification, gen_synthetic_regression, SyntheticSpec,
};
use landmark_core::landmark::{fit_detailed, FitOptions};
use landmark_core::solver::SolverConfig;

use crate::csvio::{format_real, read_csv, write_csv};
use crate::error::{io_error, CliError, CliResult};
use crate::output::{ensure_distinct, Artifacts};
use crate::{
    BenchArgs, CvArgs, EvalArgs, FitArgs, GeneratorArgs, PredictArgs, RecoverArgs, SynthArgs,
};

fn spec_from(g: &GeneratorArgs, n_train: usize, n_test: usize, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        sigma_landmark: g.sigma_landmark,
        sigma_dependent: g.sigma_dependent,
        within_row_density: g.density,
        ..SyntheticSpec::new(g.k, g.d, g.s, n_train, n_test, seed)
    }
}

fn load_dataset(x: &Path, y: &Path, task: Task) -> CliResult<Dataset> {
    Ok(Dataset::new(read_csv(x)?, read_csv(y)?, task)?)
}

pub fn synth(a: SynthArgs) -> CliResult<String> {
    let spec = spec_from(&a.generator, a.n_train, a.n_test, a.seed);
    let data = match a.task {
        Task::Regression => gen_synthetic_regression(&spec)?,
        Task::Classification => gen_synthetic_classification(&spec)?,
    };
    let mut out = Artifacts::default();
    out.add(a.out.join("train_x.csv"), write_csv(&data.train.x, "x"));
    out.add(a.out.join("train_y.csv"), write_csv(&data.train.y, "y"));
    out.add(a.out.join("test_x.csv"), write_csv(&data.test.x, "x"));
    out.add(a.out.join("test_y.csv"), write_csv(&data.test.y, "y"));
    out.add(
        a.out.join("planted.json"),
        save_planted(&PlantedDocument::new(spec, data.planted))?,
    );
    out.commit()?;
    Ok(format!(
        "wrote {} ({} task, {} train / {} test samples)\n",
        a.out.display(),
        a.task,
        a.n_train,
        a.n_test
    ))
}

pub fn fit(a: FitArgs) -> CliResult<String> {
    ensure_distinct(&[&a.x, &a.y], &[&a.out])?;
    let data = load_dataset(&a.x, &a.y, a.task)?;
    let solver = SolverConfig {
        tol: a.tol,
        max_iter: a.max_iter,
        ..SolverConfig::default()
    };
    let mut report = String::new();
    let doc = match a.method {
        Method::Landmark => {
            let options = FitOptions {
                solver,
                propagate_probabilities: a.propagate_probabilities,
                autoregressive: a.autoregressive,
                ..FitOptions::new(a.lambda1, a.lambda2, a.lambda_stage2)
            };
            let (model, estimate) = fit_detailed(&data, &options)?;
            let _ = writeln!(
                report,
                "landmarks: s = {} {:?}",
                model.landmarks.len(),
                model.landmarks
            );
            let _ = writeln!(report, "objective: {}", format_real(estimate.objective()));
            let _ = writeln!(
                report,
                "iterations: {}{}",
                estimate.iterations,
                if estimate.converged {
                    ""
                } else {
                    " (iteration cap reached)"
                }
            );
            ModelDocument::Landmark(model)
        }
        method => {
            if a.autoregressive || a.propagate_probabilities {
                return Err(CliError::Usage(format!(
                    "--autoregressive and --propagate-probabilities apply to the landmark method, not {}",
                    method.name()
                )));
            }
            let model = match method {
                Method::OneVsAll => fit_one_vs_all(&data, a.lambda1)?,
                Method::GroupLasso => fit_group_lasso(&data, a.lambda1, &solver)?,
                Method::LowRank => fit_low_rank(&data, a.lambda1, &solver)?,
                Method::Landmark => unreachable!("handled above"),
            };
            let _ = writeln!(report, "method: {}", method.name());
            if let Some(support) = &model.support {
                let _ = writeln!(report, "active features: {}", support.len());
            }
            if let Some(rank) = model.rank {
                let _ = writeln!(report, "rank: {rank}");
            }
            ModelDocument::Baseline(model)
        }
    };
    let mut out = Artifacts::default();
    out.add(&a.out, save_model(&doc)?);
    out.commit()?;
    let _ = writeln!(report, "model written to {}", a.out.display());
    Ok(report)
}

pub fn predict(a: PredictArgs) -> CliResult<String> {
    ensure_distinct(&[&a.model, &a.x], &[&a.out])?;
    let text = std::fs::read_to_string(&a.model).map_err(io_error(&a.model))?;
    let model = load_model(&text)?;
    let x = read_csv(&a.x)?;
    let pred = model.predict(&x)?;
    let mut out = Artifacts::default();
    out.add(&a.out, write_csv(&pred, "y"));
    out.commit()?;
    Ok(format!(
        "predictions ({} × {}) written to {}\n",
        pred.rows(),
        pred.cols(),
        a.out.display()
    ))
}

pub fn eval(a: EvalArgs) -> CliResult<String> {
    if let Some(out) = &a.out {
        ensure_distinct(&[&a.truth, &a.pred], &[out])?;
    }
    let truth = read_csv(&a.truth)?;
    let pred = read_csv(&a.pred)?;
    let report = MetricsReport::evaluate(a.task, &truth, &pred)?;
    let mut text = String::new();
    let mut table = String::from("metric,value\n");
    for (name, value) in report.entries() {
        let _ = writeln!(text, "{name}: {value:.6}");
        let _ = writeln!(table, "{name},{}", format_real(value));
    }
    if let Some(path) = &a.out {
        let mut out = Artifacts::default();
        out.add(path, table.clone());
        out.commit()?;
    }
    Ok(format!("{text}\n{table}"))
}

pub fn cv(a: CvArgs) -> CliResult<String> {
    ensure_distinct(&[&a.x, &a.y], &[&a.out])?;
    let data = load_dataset(&a.x, &a.y, a.task)?;
    let defaults = Tuning::for_task(a.task);
    let stage2 = if a.lambda_stage2.is_empty() {
        defaults.stage2_lambdas.clone()
    } else {
        a.lambda_stage2.clone()
    };
    let grid: Vec<GridCell> = if a.lambda1.is_empty() {
        landmark_grid(
            &data,
            &defaults.landmark_lambda1_fractions,
            &a.lambda2,
            &stage2,
        )?
    } else {
        let mut cells = Vec::new();
        for &lambda2 in &a.lambda2 {
            for &lambda1 in &a.lambda1 {
                for &lambda_stage2 in &stage2 {
                    cells.push(GridCell {
                        lambda1,
                        lambda2,
                        lambda_stage2,
                    });
                }
            }
        }
        cells
    };
    let template = FitOptions::new(0.0, 0.0, 1.0);
    let result = cross_validate_with(
        &data,
        &grid,
        a.folds,
        a.seed,
        Metric::for_task(a.task),
        &template,
    )?;
    let mut table = String::from("lambda1,lambda2,lambda_stage2,score\n");
    for (cell, score) in grid.iter().zip(&result.scores) {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            format_real(cell.lambda1),
            format_real(cell.lambda2),
            format_real(cell.lambda_stage2),
            format_real(*score)
        );
    }
    let mut out = Artifacts::default();
    out.add(&a.out, table);
    out.commit()?;
    let best = result.best;
    Ok(format!(
        "best: lambda1 = {} lambda2 = {} lambda_stage2 = {} (score {})\nscores written to {}\n",
        format_real(best.lambda1),
        format_real(best.lambda2),
        format_real(best.lambda_stage2),
        format_real(result.scores[result.best_index]),
        a.out.display()
    ))
}

pub fn recover(a: RecoverArgs) -> CliResult<String> {
    let config = RecoveryConfig {
        lambda_scale: a.lambda_scale,
        ..RecoveryConfig::new(a.k, a.s, a.n_grid, a.trials, a.sigma, a.seed)
    };
    let result = recovery_experiment(&config)?;
    let mut table = String::from("n,trials,recovery_rate,phi_star\n");
    let mut text = String::new();
    for (n, rate) in result.n_grid.iter().zip(&result.recovery_rate) {
        let _ = writeln!(
            table,
            "{n},{},{},{}",
            result.trials,
            format_real(*rate),
            format_real(result.phi_star)
        );
        let _ = writeln!(text, "n = {n}: recovery rate {rate:.3}");
    }
    let mut out = Artifacts::default();
    out.add(&a.out, table);
    out.commit()?;
    let _ = writeln!(text, "phi_star = {:.6}", result.phi_star);
    Ok(text)
}

pub fn bench(a: BenchArgs) -> CliResult<String> {
    let methods = if a.methods.is_empty() {
        [
            Method::Landmark,
            Method::OneVsAll,
            Method::GroupLasso,
            Method::LowRank,
        ]
        .into_iter()
        .filter(|m| m.supports(a.task))
        .collect()
    } else {
        if let Some(m) = a.methods.iter().find(|m| !m.supports(a.task)) {
            return Err(CliError::Usage(format!(
                "{} does not support {}",
                m.name(),
                a.task
            )));
        }
        a.methods.clone()
    };
    let config = SweepConfig {
        task: a.task,
        spec: spec_from(&a.generator, 0, a.n_test, a.seed),
        n_grid: a.n_grid.clone(),
        seeds: (a.seed..a.seed + a.seeds).collect(),
        methods,
        tuning: Tuning {
            folds: a.folds,
            ..Tuning::for_task(a.task)
        },
    };
    let records = sample_size_sweep(&config)?;
    let mut table = String::from("method,n,seed,metric,value\n");
    for r in &records {
        let _ = writeln!(
            table,
            "{},{},{},{},{}",
            r.method,
            r.n,
            r.seed,
            r.metric,
            format_real(r.value)
        );
    }
    let mut out = Artifacts::default();
    out.add(&a.out, table);
    out.commit()?;
    Ok(format!(
        "{} rows written to {}\nnot implemented (out of scope): {}\n",
        records.len(),
        a.out.display(),
        NOT_IMPLEMENTED.join(", ")
    ))
}
