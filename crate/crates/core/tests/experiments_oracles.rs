mod support;

use landmark_core::dataset::Task;
use landmark_core::experiments::cv::fold_assignment;
use landmark_core::experiments::synthetic::random_stable_transition;
use landmark_core::experiments::{
    cross_validate, gen_ar1_returns, gen_synthetic_classification, gen_synthetic_regression,
    landmark_grid, mse, recovery_experiment, support_overlap_phi, Metric, RecoveryConfig,
    SyntheticSpec,
};
use landmark_core::landmark::{fit, FitOptions};
use landmark_core::matrix::Matrix;
use landmark_core::rng::stream;
use landmark_core::solver::SolverConfig;
use proptest::prelude::*;
use support::oracles::random_matrix;

#[test]
fn cv_choice_is_near_the_exhaustive_refit_minimum() {
    let data = gen_synthetic_regression(&SyntheticSpec::new(20, 10, 3, 90, 10, 8)).unwrap();
    let grid = landmark_grid(&data.train, &[0.02, 0.1, 0.4], &[0.0, 1.0, 4.0], &[1.0]).unwrap();
    assert_eq!(grid.len(), 9);
    let (folds, seed) = (3, 21);
    let result = cross_validate(
        &data.train,
        &grid,
        folds,
        seed,
        Metric::Mse,
        &SolverConfig::default(),
    )
    .unwrap();

    let assignment = fold_assignment(data.train.n_samples(), folds, seed);
    let refit: Vec<f64> = grid
        .iter()
        .map(|cell| {
            let mut total = 0.0;
            for f in 0..folds {
                let train: Vec<usize> = (0..assignment.len())
                    .filter(|&i| assignment[i] != f)
                    .collect();
                let valid: Vec<usize> = (0..assignment.len())
                    .filter(|&i| assignment[i] == f)
                    .collect();
                let model = fit(
                    &data.train.subset(&train),
                    &FitOptions::new(cell.lambda1, cell.lambda2, cell.lambda_stage2),
                )
                .unwrap();
                let held = data.train.subset(&valid);
                total += mse(&held.y, &model.predict(&held.x).unwrap()).unwrap();
            }
            total / folds as f64
        })
        .collect();
    let minimum = refit.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(refit[result.best_index] <= 1.1 * minimum);
    for (a, b) in refit.iter().zip(&result.scores) {
        assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn recovery_fails_when_samples_are_far_below_s() {
    let result = recovery_experiment(&RecoveryConfig::new(60, 6, vec![3], 20, 0.1, 4)).unwrap();
    assert!(
        result.recovery_rate[0] <= 0.1,
        "rate {:?}",
        result.recovery_rate
    );
}

#[test]
fn recovery_is_deterministic_and_rises_with_n() {
    let config = RecoveryConfig::new(30, 3, vec![4, 15, 60], 10, 0.1, 9);
    let a = recovery_experiment(&config).unwrap();
    assert_eq!(a, recovery_experiment(&config).unwrap());
    assert!(a.recovery_rate[0] < a.recovery_rate[2]);
    assert!(a.recovery_rate[2] >= 0.9);
}

#[test]
fn generators_are_pure_functions_of_the_seed() {
    let spec = SyntheticSpec::new(12, 5, 3, 30, 10, 77);
    let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let text = |d: &landmark_core::experiments::SyntheticData| {
        [
            &d.train.x,
            &d.train.y,
            &d.test.x,
            &d.test.y,
            &d.planted.a_star,
            &d.planted.w_star,
        ]
        .map(bits)
    };
    assert_eq!(
        text(&gen_synthetic_regression(&spec).unwrap()),
        text(&gen_synthetic_regression(&spec).unwrap())
    );
    assert_eq!(
        text(&gen_synthetic_classification(&spec).unwrap()),
        text(&gen_synthetic_classification(&spec).unwrap())
    );
    let b = random_stable_transition(3, 0.8, &mut stream(77, &[12]));
    let (d1, _) = gen_ar1_returns(&spec, &b, 60).unwrap();
    let (d2, _) = gen_ar1_returns(&spec, &b, 60).unwrap();
    assert_eq!(d1, d2);
    let other = SyntheticSpec { seed: 78, ..spec };
    assert_ne!(
        gen_synthetic_regression(&other).unwrap().train,
        gen_synthetic_regression(&spec).unwrap().train
    );
}

#[test]
fn classification_labels_are_median_split() {
    let spec = SyntheticSpec::new(15, 6, 3, 41, 10, 5);
    let data = gen_synthetic_classification(&spec).unwrap();
    assert_eq!(data.train.task, Task::Classification);
    for j in 0..15 {
        let ones: f64 = data.train.y.column(j).iter().sum();
        assert!((ones - 20.5).abs() <= 1.0, "column {j}: {ones} ones");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_lies_between_one_and_s(s in 1usize..6, extra in 1usize..8, seed in 0u64..1000) {
        let rows: Matrix = random_matrix(s, s + extra, &mut stream(seed, &[3]));
        let phi = support_overlap_phi(&rows, &Matrix::identity(s)).unwrap();
        prop_assert!(phi >= 1.0 - 1e-9 && phi <= s as f64 + 1e-9, "phi {}", phi);
    }
}
