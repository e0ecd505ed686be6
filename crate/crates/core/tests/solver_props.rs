//! Sampler and oracle properties on the real matrix at a coarse resolution.

use std::f64::consts::PI;
use std::sync::OnceLock;

use handq_core::catalog::{build_catalog, HandParameters};
use handq_core::metrics::evaluate_catalog;
use handq_core::qubo::{
    build_qubo, decode, objective, Assignment, PenaltyConfig, QuboMatrix, VariableLayout,
};
use handq_core::solver::{
    band_statistics, exhaustive_feasible_min, infeasible_dominance_check, simulated_anneal,
    SaParams,
};

fn matrix() -> &'static QuboMatrix {
    static MATRIX: OnceLock<QuboMatrix> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let cat = build_catalog(&HandParameters::default()).unwrap();
        let table = evaluate_catalog(&cat, PI / 12.0, 0.05, None).unwrap();
        build_qubo(&table, &PenaltyConfig::default(), &VariableLayout::standard()).unwrap()
    })
}

#[test]
fn oracle_counts_and_feasibility() {
    let report = exhaustive_feasible_min(matrix()).unwrap();
    assert_eq!(report.one_hot_count, 2688);
    assert_eq!(report.feasible_count, 1344);
    let a = Assignment::from_bitstring(&report.best_assignment).unwrap();
    let sel = decode(&a, &matrix().layout);
    assert!(sel.one_hot_ok && sel.pairwise_ok);
    // Reward component of the minimum stays inside the theoretical bound.
    let reward = -(report.best_objective + 54.0);
    assert!(reward > 0.0 && reward < 7.0, "reward {reward} outside (0, 7)");
}

#[test]
fn oracle_minimum_is_an_actual_assignment_objective() {
    let q = matrix();
    let report = exhaustive_feasible_min(q).unwrap();
    let a = Assignment::from_bitstring(&report.best_assignment).unwrap();
    let recomputed = objective(q, &a).unwrap();
    assert!((recomputed - report.best_objective).abs() < 1e-12);
}

#[test]
fn sample_objectives_reevaluate_exactly() {
    let q = matrix();
    let params = SaParams {
        num_reads: 200,
        sweeps_per_read: 200,
        seed: 17,
        ..SaParams::default()
    };
    let report = simulated_anneal(q, &params).unwrap();
    for s in &report.samples {
        let a = Assignment::from_bitstring(&s.assignment).unwrap();
        let obj = objective(q, &a).unwrap();
        assert!((obj - s.objective).abs() < 1e-9);
        let sel = decode(&a, &q.layout);
        assert_eq!(s.one_hot_ok, sel.one_hot_ok);
        assert_eq!(s.pairwise_ok, sel.pairwise_ok);
    }
    let total: usize = report.samples.iter().map(|s| s.frequency).sum();
    assert_eq!(total, 200);
}

#[test]
fn oracle_bounds_every_feasible_sample() {
    let q = matrix();
    let oracle = exhaustive_feasible_min(q).unwrap();
    for seed in [1, 2, 3] {
        let params = SaParams {
            num_reads: 500,
            sweeps_per_read: 300,
            seed,
            ..SaParams::default()
        };
        let report = simulated_anneal(q, &params).unwrap();
        for s in report.samples.iter().filter(|s| s.feasible()) {
            assert!(
                oracle.best_objective <= s.objective + 1e-12,
                "feasible sample {} beats the oracle",
                s.objective
            );
        }
    }
}

#[test]
fn solve_reports_are_bit_identical_for_equal_seeds() {
    let q = matrix();
    let params = SaParams {
        num_reads: 300,
        seed: 23,
        ..SaParams::default()
    };
    let a = simulated_anneal(q, &params).unwrap();
    let b = simulated_anneal(q, &params).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn band_rows_count_and_single_run_width() {
    let q = matrix();
    let table = band_statistics(q, &[50, 200], 3, 7).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.summary.len(), 2);
    for s in &table.summary {
        assert!(s.width >= 0.0);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }
    let single = band_statistics(q, &[100], 1, 7).unwrap();
    assert_eq!(single.summary[0].width, 0.0);
}

#[test]
fn no_sampled_infeasible_assignment_undercuts_the_minimum() {
    let q = matrix();
    let oracle = exhaustive_feasible_min(q).unwrap();
    let report = infeasible_dominance_check(q, oracle.best_objective, 50_000, 31).unwrap();
    assert!(!report.undercuts_feasible_min);
    assert!(report.lowest_infeasible > oracle.best_objective);
}
