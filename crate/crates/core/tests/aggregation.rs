use std::collections::HashSet;

use avgm::aggregate::{
    avgm_combine, savgm_combine, savgm_from_shards, subsample_indices,
    subsample_without_replacement, suggest_ratio, SubsampleSpec,
};
use avgm::dataset::{Dataset, ParamVector, Sample};
use proptest::prelude::*;

fn pv(v: Vec<f64>) -> ParamVector {
    ParamVector::new(v).unwrap()
}

fn estimates() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6, 1usize..10)
        .prop_flat_map(|(d, m)| prop::collection::vec(prop::collection::vec(-10.0..10.0f64, d), m))
}

proptest! {
    #[test]
    fn averaging_commutes_with_linear_maps(est in estimates(), seed in prop::collection::vec(-2.0..2.0f64, 36)) {
        let d = est[0].len();
        let a = |v: &[f64]| -> Vec<f64> {
            (0..d).map(|i| (0..d).map(|j| seed[i * 6 + j] * v[j]).sum()).collect()
        };
        let mapped: Vec<ParamVector> = est.iter().map(|v| pv(a(v))).collect();
        let lhs = avgm_combine(&mapped).unwrap().theta_final;
        let plain: Vec<ParamVector> = est.iter().cloned().map(pv).collect();
        let rhs = a(&avgm_combine(&plain).unwrap().theta_final);
        // |A·v| ≤ 5·2·10 per coordinate, so 1e-12 relative to that bound
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).abs() <= 1e-12 * 100.0);
        }
    }

    #[test]
    fn copies_average_to_themselves(v in prop::collection::vec(-1e3..1e3f64, 1..8), m in 1usize..20) {
        let copies = vec![pv(v.clone()); m];
        let got = avgm_combine(&copies).unwrap().theta_final;
        for (a, b) in got.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn subsample_is_a_distinct_subset(n in 1usize..400, r in 0.0..0.99f64, seed in any::<u64>()) {
        let spec = SubsampleSpec::new(r, seed).unwrap();
        let idx = subsample_indices(n, &spec);
        prop_assert_eq!(idx.len(), ((r * n as f64).ceil() as usize).min(n));
        let unique: HashSet<_> = idx.iter().collect();
        prop_assert_eq!(unique.len(), idx.len());
        prop_assert!(idx.iter().all(|&i| i < n));
        prop_assert_eq!(idx, subsample_indices(n, &spec));
    }

    #[test]
    fn suggestion_scales_with_root_m(m in 1usize..1000, n in 1000usize..100_000, c in 0.01..1.0f64) {
        let one = suggest_ratio(m, n, c).unwrap();
        let two = suggest_ratio(2 * m, n, c).unwrap();
        prop_assert!(one <= 0.5 && two <= 0.5);
        if two < 0.5 {
            prop_assert!((two / one - 2f64.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn subsample_takes_rows_of_the_shard() {
    let shard = Dataset::new(
        1,
        (0..10)
            .map(|i| Sample::dense(vec![i as f64], i as f64))
            .collect(),
    )
    .unwrap();
    let sub = subsample_without_replacement(&shard, &SubsampleSpec::new(0.005, 3).unwrap());
    assert_eq!(sub.len(), 1);
    let sub = subsample_without_replacement(&shard, &SubsampleSpec::new(0.25, 3).unwrap());
    assert_eq!(sub.len(), 3);
    assert!(sub.iter().all(|s| shard.samples().contains(s)));
    assert!(subsample_without_replacement(&shard, &SubsampleSpec::new(0.0, 3).unwrap()).is_empty());
}

#[test]
fn savgm_edge_cases() {
    let t1 = pv(vec![1.0]);
    assert_eq!(
        savgm_combine(&t1, Some(&pv(vec![0.5])), 0.5)
            .unwrap()
            .theta_final
            .as_slice(),
        &[1.5]
    );
    assert_eq!(savgm_combine(&t1, None, 0.0).unwrap().theta_final, t1);
    assert!(savgm_combine(&t1, None, 0.1).is_err());
    assert!(savgm_combine(&t1, Some(&t1), 1.0).is_err());
    assert!(savgm_combine(&t1, Some(&pv(vec![1.0, 2.0])), 0.1).is_err());
    let shards = [pv(vec![1.0]), pv(vec![3.0])];
    let got = savgm_from_shards(&shards, &[pv(vec![0.0]), pv(vec![2.0])], 0.5).unwrap();
    assert_eq!(got.theta_final.as_slice(), &[3.0]);
    assert!(avgm_combine(&[]).is_err());
}
