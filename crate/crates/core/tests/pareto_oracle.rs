use groupcf::pareto::{tau_dominates, tau_pareto_set, MetricPoint, ThresholdVector};
use groupcf::ItemId;
use proptest::prelude::*;

fn points(raw: &[Vec<f64>]) -> Vec<MetricPoint<f64>> {
    raw.iter()
        .enumerate()
        .map(|(k, c)| MetricPoint::new(ItemId(k as u32), c.clone()))
        .collect()
}

/// Textbook skyline: p survives unless some q is ≥ everywhere and > somewhere.
fn brute_skyline(raw: &[Vec<f64>]) -> Vec<usize> {
    (0..raw.len())
        .filter(|&p| {
            !(0..raw.len()).any(|q| {
                q != p
                    && raw[q].iter().zip(&raw[p]).all(|(a, b)| a >= b)
                    && raw[q].iter().zip(&raw[p]).any(|(a, b)| a > b)
            })
        })
        .collect()
}

fn coords(dims: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    // A coarse grid makes ties and duplicates common.
    prop::collection::vec(
        prop::collection::vec((0u8..6).prop_map(|v| v as f64 / 5.0), dims),
        1..max_len,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn zero_tau_matches_brute_force(raw in coords(5, 60)) {
        let got = tau_pareto_set(&points(&raw), &ThresholdVector::zeros(5)).unwrap();
        prop_assert_eq!(got, brute_skyline(&raw));
    }

    #[test]
    fn sets_nest_with_tau(raw in coords(3, 40), relax in 0.0f64..0.5, tighten in 0.0f64..0.5) {
        let pts = points(&raw);
        let zero = tau_pareto_set(&pts, &ThresholdVector::zeros(3)).unwrap();
        let loose = tau_pareto_set(&pts, &ThresholdVector(vec![-relax; 3])).unwrap();
        let tight = tau_pareto_set(&pts, &ThresholdVector(vec![tighten; 3])).unwrap();
        prop_assert!(zero.iter().all(|k| loose.contains(k)));
        prop_assert!(tight.iter().all(|k| zero.contains(k)));
    }

    #[test]
    fn nothing_in_the_set_is_dominated(raw in coords(4, 40), t in -0.5f64..0.5) {
        let pts = points(&raw);
        let tau = ThresholdVector(vec![t; 4]);
        let set = tau_pareto_set(&pts, &tau).unwrap();
        for &k in &set {
            for (j, q) in pts.iter().enumerate() {
                if j != k {
                    prop_assert!(!tau_dominates(q, &pts[k], &tau).unwrap());
                }
            }
        }
        // And everything left out is dominated by someone.
        for k in (0..pts.len()).filter(|k| !set.contains(k)) {
            prop_assert!(pts.iter().enumerate().any(|(j, q)| j != k && tau_dominates(q, &pts[k], &tau).unwrap()));
        }
    }
}

#[test]
fn identical_points_all_survive() {
    let raw = vec![vec![0.5, 0.5]; 4];
    assert_eq!(
        tau_pareto_set(&points(&raw), &ThresholdVector::zeros(2)).unwrap(),
        vec![0, 1, 2, 3]
    );
}

#[test]
fn large_negative_tau_keeps_everything() {
    let raw = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.2]];
    assert_eq!(
        tau_pareto_set(&points(&raw), &ThresholdVector(vec![-2.0, -2.0])).unwrap(),
        vec![0, 1, 2]
    );
}
