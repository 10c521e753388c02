mod common;

use ctxauth::eval::{enroll_from_features, split_chronological, verify_and_score, EnrollConfig, EvalError};
use ctxauth::features::WindowFeatures;
use ctxauth::pipeline::{enroll_all, evaluate_all};
use ctxauth::Algorithm;

fn two_context_setup() -> (ctxauth::RunConfig, Vec<ctxauth::pipeline::UserWindows>) {
    let mut cfg = common::small_config(3, 2, 1.0, 1_800_000, 8);
    cfg.context.k = 2;
    cfg.run.algorithms = Algorithm::ALL.to_vec();
    let users = common::user_windows(&cfg);
    (cfg, users)
}

#[test]
fn two_separated_contexts_give_two_modelled_contexts() {
    let (cfg, users) = two_context_setup();
    let (profiles, skipped) = enroll_all(&users, &cfg);
    assert!(skipped.is_empty(), "{skipped:?}");
    for p in &profiles {
        assert_eq!(p.retained, vec![0, 1], "{}", p.user_id);
        assert_eq!(p.contexts.len(), 2, "{}: {:?}", p.user_id, p.unevaluable);
        for c in &p.contexts {
            let algs: Vec<Algorithm> = c.models.iter().map(|m| m.algorithm).collect();
            assert_eq!(algs, Algorithm::ALL.to_vec());
            assert!(!c.subset.indices.is_empty());
        }
        assert!(p.cim.training_accuracy >= 0.95);
    }
}

#[test]
fn ten_windows_fail_to_enroll() {
    let (_, users) = two_context_setup();
    let few: Vec<WindowFeatures> = users[0].windows[..10].to_vec();
    let others: Vec<(&str, &[WindowFeatures])> =
        users[1..].iter().map(|u| (u.user_id.as_str(), u.windows.as_slice())).collect();
    let err = enroll_from_features("short", &few, &others, &common::FAST, &EnrollConfig::default(), 1).unwrap_err();
    assert!(matches!(err, EvalError::EnrollmentFailure(_)), "{err}");
}

#[test]
fn enrollment_and_scoring_are_deterministic() {
    let (cfg, users) = two_context_setup();
    let (a, _) = enroll_all(&users, &cfg);
    let (b, _) = enroll_all(&users, &cfg);
    assert_eq!(a, b);
    let (ra, _) = evaluate_all(&a, &users, &cfg);
    let (rb, _) = evaluate_all(&b, &users, &cfg);
    assert_eq!(ra, rb);
    assert!(!ra.is_empty());
}

#[test]
fn random_forest_separates_owner_from_impostors() {
    let mut cfg = common::small_config(4, 3, 0.8, 1_800_000, 3);
    cfg.context.k = 3;
    cfg.run.algorithms = vec![Algorithm::Rf];
    let users = common::user_windows(&cfg);
    let (profiles, skipped) = enroll_all(&users, &cfg);
    assert!(skipped.is_empty(), "{skipped:?}");
    let (results, _) = evaluate_all(&profiles, &users, &cfg);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (g, i): (Vec<f64>, Vec<f64>) = results
        .iter()
        .map(|r| (mean(&r.genuine_scores), mean(&r.impostor_scores)))
        .unzip();
    assert!(mean(&g) > mean(&i) + 0.3, "genuine {} impostor {}", mean(&g), mean(&i));
    for r in &results {
        assert!((0.0..=1.0).contains(&r.eer));
        assert!(!r.genuine_scores.is_empty() && !r.impostor_scores.is_empty());
        assert!(!r.reused_impostors);
    }
}

#[test]
fn contexts_without_impostor_tests_are_omitted() {
    let (cfg, users) = two_context_setup();
    let (profiles, _) = enroll_all(&users, &cfg);
    let p = &profiles[0];
    let (_, own_test) = split_chronological(&users[0].windows, cfg.windows.win_ms);
    let none = verify_and_score(p, &own_test, &[], false).unwrap();
    assert!(none.is_empty());

    // Impostor windows routed to a single context leave the other one out.
    let other_test: Vec<&WindowFeatures> =
        users[1..].iter().flat_map(|u| split_chronological(&u.windows, cfg.windows.win_ms).1).collect();
    let target = p.contexts[0].context;
    let routed: Vec<&WindowFeatures> = other_test
        .into_iter()
        .filter(|w| p.route(&p.normalize(&w.values).unwrap()) == target)
        .collect();
    assert!(!routed.is_empty());
    let results = verify_and_score(p, &own_test, &routed, false).unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|r| r.context == target));
}

#[test]
fn training_windows_are_never_scored() {
    let (cfg, users) = two_context_setup();
    let (profiles, _) = enroll_all(&users, &cfg);
    let p = &profiles[0];
    let (train, _) = split_chronological(&users[0].windows, cfg.windows.win_ms);
    let err = verify_and_score(p, &train, &train, false).unwrap_err();
    assert!(matches!(err, EvalError::Leakage(_)));
}
