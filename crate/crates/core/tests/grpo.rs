use chemreward::grpo::{advantages, dynamic_filter, GrpoError, RolloutGroup, ADVANTAGE_EPSILON};
use proptest::prelude::*;

#[test]
fn alternating_rewards() {
    let a = advantages(&RolloutGroup::new("p", vec![1.0, 0.0, 1.0, 0.0])).unwrap();
    for (x, want) in a.values.iter().zip([1.0f64, -1.0, 1.0, -1.0]) {
        assert!((x - want).abs() <= 1e-7, "{x} vs {want}");
    }
}

#[test]
fn zero_variance_gives_exact_zeros_and_is_filtered() {
    let a = advantages(&RolloutGroup::new("p", vec![0.7; 5])).unwrap();
    assert!(a.values.iter().all(|&x| x == 0.0));
    let groups = vec![
        RolloutGroup::new("flat", vec![1.0, 1.0, 1.0]),
        RolloutGroup::new("mixed", vec![1.0, 0.0, 1.0]),
        RolloutGroup::new("zeros", vec![0.0, 0.0]),
    ];
    let (kept, report) = dynamic_filter(groups);
    assert_eq!(kept.iter().map(|g| g.prompt_id.as_str()).collect::<Vec<_>>(), ["mixed"]);
    assert_eq!((report.kept, report.zero_variance), (1, 2));
}

#[test]
fn small_and_non_finite_groups_are_errors() {
    assert_eq!(
        advantages(&RolloutGroup::new("solo", vec![1.0])),
        Err(GrpoError::GroupTooSmall { prompt_id: "solo".into(), size: 1 })
    );
    assert!(advantages(&RolloutGroup::<f64>::new("none", vec![])).is_err());
    assert_eq!(
        advantages(&RolloutGroup::new("nan", vec![1.0, f64::NAN])),
        Err(GrpoError::NonFinite("nan".into()))
    );
}

#[test]
fn group_json_shape() {
    let g: RolloutGroup<f64> = serde_json::from_str(r#"{"prompt_id":"q1","rewards":[1,0.5]}"#).unwrap();
    assert_eq!(g.rewards, [1.0, 0.5]);
    assert!(g.breakdowns.is_none());
}

fn oracle(r: &[f64]) -> Vec<f64> {
    let n = r.len() as f64;
    let m = r.iter().sum::<f64>() / n;
    let sd = (r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
    r.iter().map(|x| (x - m) / (sd + ADVANTAGE_EPSILON)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn advantages_are_centred(r in proptest::collection::vec(-3.0f64..3.0, 2..16)) {
        let a = advantages(&RolloutGroup::new("p", r.clone())).unwrap();
        let g = r.len() as f64;
        prop_assert!(a.values.iter().sum::<f64>().abs() <= 1e-9 * g);
        for (x, o) in a.values.iter().zip(oracle(&r)) {
            prop_assert!((x - o).abs() <= 1e-9);
        }
    }

    #[test]
    fn shift_and_positive_scale_invariant(r in proptest::collection::vec(0.0f64..3.0, 2..10), s in 0.5f64..4.0, t in -2.0f64..2.0) {
        prop_assume!(r.windows(2).any(|w| (w[0] - w[1]).abs() > 1e-3));
        let a = advantages(&RolloutGroup::new("p", r.clone())).unwrap();
        let b = advantages(&RolloutGroup::new("p", r.iter().map(|x| s * x + t).collect())).unwrap();
        // the epsilon in the denominator does not scale with the rewards, so the
        // two differ by about |z|·eps·|1-s|/(s·sd); small spreads make that visible
        let n = r.len() as f64;
        let m = r.iter().sum::<f64>() / n;
        let sd = (r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
        for (x, y) in a.values.iter().zip(&b.values) {
            let tol = 1.01 * x.abs() * ADVANTAGE_EPSILON * (1.0 - s).abs() / (s * sd) + 1e-9;
            prop_assert!((x - y).abs() <= tol, "{x} vs {y}, tol {tol}");
        }
    }

    #[test]
    fn f32_tracks_f64(r in proptest::collection::vec(0.0f32..3.0, 2..8)) {
        let a32 = advantages(&RolloutGroup::new("p", r.clone())).unwrap();
        let a64 = advantages(&RolloutGroup::new("p", r.iter().map(|&x| x as f64).collect())).unwrap();
        let spread = r.iter().cloned().fold(f32::MIN, f32::max) - r.iter().cloned().fold(f32::MAX, f32::min);
        prop_assume!(spread > 1e-2);
        for (x, y) in a32.values.iter().zip(&a64.values) {
            prop_assert!((*x as f64 - y).abs() <= 1e-3);
        }
    }
}
