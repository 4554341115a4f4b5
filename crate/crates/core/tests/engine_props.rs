mod common;

use common::c;
use kamtorus::arithmetic::{BrunoSequence, IndexConvention};
use kamtorus::engine::{fitted_exponent, kam_step, run, verify_conjugacy, IterationState, RunConfig, Verdict};
use kamtorus::report::report_json;
use kamtorus::symplectic::{field_to_form, hamiltonian_field};
use kamtorus::torus::{exterior_derivative, MultiIndex, RelativeOneForm, TrigPolynomial};
use proptest::prelude::*;

fn golden(t: f64) -> RunConfig {
    let g = TrigPolynomial::from_terms(2, [(MultiIndex::from([1, 0]), c(1.0, 0.0)), (MultiIndex::from([0, 1]), c(1.0, 0.0))])
        .unwrap();
    RunConfig {
        n: 1,
        delta: vec![1.0],
        tau: vec![-1.6180339887, 1.0],
        bruno: BrunoSequence::geometric(0.01, 0.5).unwrap(),
        convention: IndexConvention::PerLevel,
        perturbation: exterior_derivative(&g)
            .checked_add(&RelativeOneForm::constant_real(&[0.3, 0.0]).unwrap())
            .unwrap(),
        t,
        s0: 0.4,
        s_inf: 0.2,
        max_iterations: 8,
        degree_cap: 64,
        lie_tol: 1e-30,
        convergence_tol: 1e-20,
        max_lie_order: 60,
        closed_tol: 1e-10,
        divisor_floor: 1e-14,
    }
}

#[test]
fn steps_are_symplectic_and_scales_monotone() {
    let cfg = golden(1e-3);
    let report = run(&cfg).unwrap();
    assert_eq!(report.verdict, Verdict::Converged);
    let delta = cfg.symplectic().unwrap();
    let mut prev = cfg.s0 + 1.0;
    for (j, step) in report.steps.iter().enumerate() {
        assert_eq!(step.level, j as u32);
        assert_eq!(step.truncation, 1 << j);
        let dual = field_to_form(&hamiltonian_field(step.potential.as_ref().unwrap(), &delta).unwrap(), &delta).unwrap();
        assert!(dual.is_closed(1e-12));
        assert!(dual.mean().iter().all(|m| m.norm() <= 1e-12));
        assert!(step.scale < prev && step.scale > cfg.s_inf && step.scale <= cfg.s0);
        assert!(step.next_scale < step.scale && step.next_scale > cfg.s_inf);
        assert!(step.defect_before >= 0.0 && step.defect_after >= 0.0);
        prev = step.scale;
    }
}

#[test]
fn closedness_is_preserved_at_lie_tolerance() {
    let mut cfg = golden(1e-3);
    cfg.lie_tol = 1e-12;
    cfg.convergence_tol = 1e-10;
    let mut state = IterationState::initial(&cfg).unwrap();
    for _ in 0..4 {
        let (next, _) = kam_step(&state, &cfg).unwrap();
        assert!(next.current_form().unwrap().is_closed(10.0 * cfg.lie_tol));
        state = next;
    }
}

#[test]
fn golden_run_is_quadratic_and_replays() {
    let cfg = golden(1e-3);
    let report = run(&cfg).unwrap();
    assert!(report.steps.len() >= 4 && report.steps.len() <= 8);
    assert!(report.final_defect <= 1e-9);
    assert!(report.fitted_exponent.unwrap() >= 1.5);
    assert!((report.total_shift[0] - 3e-4).abs() <= 10.0 * 1e-6);
    assert!(verify_conjugacy(&report, &cfg, 1e-8).unwrap().pass);
}

#[test]
fn runs_are_bitwise_deterministic() {
    let cfg = golden(1e-3);
    assert_eq!(report_json(&run(&cfg).unwrap()).unwrap(), report_json(&run(&cfg).unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_four_steps_decay_quadratically(t in 1e-5..1e-3f64, m in -1.0..1.0f64) {
        let mut cfg = golden(t);
        cfg.perturbation = cfg.perturbation.without_mean().checked_add(&RelativeOneForm::constant_real(&[m, 0.0]).unwrap()).unwrap();
        cfg.max_iterations = 4;
        cfg.convergence_tol = 1e-200;
        let report = run(&cfg).unwrap();
        prop_assert_eq!(report.verdict, Verdict::MaxIterations);
        let mut defects: Vec<f64> = report.steps.iter().map(|s| s.defect_before).collect();
        defects.push(report.final_defect);
        let p = fitted_exponent(&defects).unwrap();
        prop_assert!(p >= 1.5, "{}", p);
        prop_assert!((report.total_shift[0] - t * m).abs() <= 10.0 * t * t);
    }
}
