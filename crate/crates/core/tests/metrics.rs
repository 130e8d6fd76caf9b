use kfhe::metrics::{average_ranks, confusion, macro_f1, rank_row, ScoreTable};
use proptest::prelude::*;

fn brute_force_macro_f1(truth: &[usize], pred: &[usize], c: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..c {
        let (mut tp, mut fp, mut fn_) = (0u32, 0u32, 0u32);
        for (&t, &p) in truth.iter().zip(pred) {
            match (t == k, p == k) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let precision = if tp + fp > 0 { Some(f64::from(tp) / f64::from(tp + fp)) } else { None };
        let recall = if tp + fn_ > 0 { Some(f64::from(tp) / f64::from(tp + fn_)) } else { None };
        if let (Some(p), Some(r)) = (precision, recall) {
            if p + r > 0.0 {
                total += 2.0 * p * r / (p + r);
            }
        }
    }
    total / c as f64
}

fn arb_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize)> {
    (2usize..=6, 1usize..=50)
        .prop_flat_map(|(c, n)| (proptest::collection::vec(0..c, n), proptest::collection::vec(0..c, n), Just(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn agrees_with_brute_force((truth, pred, c) in arb_pair()) {
        let got = macro_f1(&truth, &pred, c).unwrap();
        prop_assert!((got - brute_force_macro_f1(&truth, &pred, c)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
        let cm = confusion(&truth, &pred, c).unwrap();
        prop_assert_eq!(cm.total(), truth.len() as u64);
    }

    #[test]
    fn invariant_to_relabeling((truth, pred, c) in arb_pair(), shift in 1usize..6) {
        let perm = |l: usize| (l + shift) % c;
        let t2: Vec<usize> = truth.iter().map(|&l| perm(l)).collect();
        let p2: Vec<usize> = pred.iter().map(|&l| perm(l)).collect();
        let a = macro_f1(&truth, &pred, c).unwrap();
        let b = macro_f1(&t2, &p2, c).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn perfect_when_every_class_present(c in 2usize..6, extra in proptest::collection::vec(0usize..6, 0..30)) {
        let mut truth: Vec<usize> = (0..c).collect();
        truth.extend(extra.into_iter().map(|l| l % c));
        prop_assert_eq!(macro_f1(&truth, &truth, c).unwrap(), 1.0);
    }

    #[test]
    fn rank_rows_sum_to_triangle(values in proptest::collection::vec(0u8..5, 1..9), higher in any::<bool>()) {
        let v: Vec<f64> = values.iter().map(|&x| f64::from(x) / 4.0).collect();
        let r = rank_row(&v, higher);
        let m = v.len() as f64;
        prop_assert_eq!(r.iter().sum::<f64>(), m * (m + 1.0) / 2.0);
    }
}

#[test]
fn tied_scores_share_rank() {
    let mut t = ScoreTable::new(vec!["mushroom".into()], vec!["a".into(), "b".into(), "c".into()]);
    t.set(0, 0, 1.0);
    t.set(0, 1, 1.0);
    t.set(0, 2, 0.9);
    let r = average_ranks(&t, true).unwrap();
    assert_eq!(r.ranks, vec![1.5, 1.5, 3.0]);
}
