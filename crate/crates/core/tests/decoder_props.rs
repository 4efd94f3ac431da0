mod common;

use proptest::prelude::*;
use sparse_bregman::oracle::brute_force_best_support;
use sparse_bregman::{
    decode, decode_batch, logits_processor, logits_to_probs, DecodeConfig, Error, Generator, Mode, ProbVector,
    Search,
};

fn prob(max_len: usize) -> impl Strategy<Value = ProbVector> {
    prop::collection::vec(0.001f64..1.0, 1..max_len).prop_map(|w| {
        let s: f64 = w.iter().sum();
        ProbVector::new(w.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

fn config() -> impl Strategy<Value = DecodeConfig> {
    (any::<bool>(), 1.1f64..5.0, -4.0f64..-0.5).prop_map(|(dual, a, l)| {
        let g = Generator::alpha(a).unwrap();
        let lambda = 10f64.powf(l);
        if dual {
            DecodeConfig::dual(g, lambda)
        } else {
            DecodeConfig::primal(g, lambda)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 150, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn greedy_matches_brute_force(p in prob(8), cfg in config()) {
        let r = decode(&p, &cfg).unwrap();
        let best = (1..=p.len())
            .map(|k| brute_force_best_support(&p, k, &cfg).unwrap().1)
            .fold(f64::INFINITY, f64::min);
        prop_assert!(r.cost <= best + 1e-10, "greedy {} brute {}", r.cost, best);
    }

    #[test]
    fn searches_agree(p in prob(300), cfg in config()) {
        let costs: Vec<f64> = [Search::Binary, Search::Exponential, Search::Linear]
            .into_iter()
            .map(|s| decode(&p, &cfg.with_search(s)).unwrap().cost)
            .collect();
        prop_assert!((costs[0] - costs[2]).abs() < 1e-10);
        prop_assert!((costs[1] - costs[2]).abs() < 1e-10);
    }

    #[test]
    fn higher_price_keeps_fewer(p in prob(200), cfg in config(), factor in 1.5f64..20.0) {
        let lo = decode(&p, &cfg).unwrap();
        let hi = decode(&p, &DecodeConfig { lambda: cfg.lambda * factor, ..cfg }).unwrap();
        prop_assert!(hi.k_star <= lo.k_star);
    }

    #[test]
    fn output_is_a_distribution_on_the_top_entries(p in prob(200), cfg in config()) {
        let r = decode(&p, &cfg).unwrap();
        let sum: f64 = r.sparse_probs.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert_eq!(r.support.len(), r.k_star);
        let floor = r.support.iter().map(|&i| p.as_slice()[i]).fold(f64::INFINITY, f64::min);
        for (i, &q) in p.as_slice().iter().enumerate() {
            if r.support.binary_search(&i).is_err() {
                prop_assert_eq!(r.sparse_probs[i], 0.0);
                prop_assert!(q <= floor);
            }
        }
    }

    #[test]
    fn k_max_caps_support(p in prob(100), cfg in config(), cap in 1usize..10) {
        let r = decode(&p, &cfg.with_k_max(Some(cap))).unwrap();
        prop_assert!(r.k_star <= cap);
        prop_assert_eq!(r.k_cap, cap.min(p.len()));
    }

    #[test]
    fn processor_round_trips(logits in prop::collection::vec(-10.0f64..10.0, 1..100), cfg in config()) {
        let out = logits_processor(&logits, &cfg).unwrap();
        let direct = decode(&logits_to_probs(&logits, 1.0).unwrap(), &cfg).unwrap();
        let back = logits_to_probs(&out.iter().map(|&l| if l.is_finite() { l } else { -1e300 }).collect::<Vec<_>>(), 1.0)
            .unwrap();
        prop_assert!(common::max_abs_diff(back.as_slice(), &direct.sparse_probs) < 1e-9);
    }
}

#[test]
fn zero_price_keeps_everything() {
    let p = ProbVector::new(vec![0.5, 0.3, 0.15, 0.05]).unwrap();
    for mode in [Mode::Primal, Mode::Dual] {
        let r = decode(&p, &DecodeConfig::new(mode, Generator::alpha(2.0).unwrap(), 0.0)).unwrap();
        assert_eq!(r.k_star, 4);
        assert_eq!(r.sparse_probs, p.as_slice());
        assert_eq!(r.nu, 0.0);
    }
}

#[test]
fn single_outcome() {
    let p = ProbVector::new(vec![1.0]).unwrap();
    let r = decode(&p, &DecodeConfig::primal(Generator::shannon(), 0.5)).unwrap();
    assert_eq!((r.k_star, r.sparse_probs.clone(), r.support.clone()), (1, vec![1.0], vec![0]));
}

#[test]
fn worked_example() {
    let p = ProbVector::new(vec![0.6, 0.3, 0.1]).unwrap();
    let r = decode(&p, &DecodeConfig::primal(Generator::alpha(2.0).unwrap(), 0.05)).unwrap();
    assert_eq!(r.k_star, 2);
    assert!(common::max_abs_diff(&r.sparse_probs, &[0.65, 0.35, 0.0]) < 1e-12);
}

#[test]
fn batch_matches_single() {
    let mut r = common::rng(11);
    let ps: Vec<ProbVector> = (0..40).map(|i| common::peaked(&mut r, 10 + i * 7, 2.0)).collect();
    let cfg = DecodeConfig::dual(Generator::alpha(1.5).unwrap(), 1e-3);
    for (p, got) in ps.iter().zip(decode_batch(&ps, &cfg)) {
        assert_eq!(got.unwrap(), decode(p, &cfg).unwrap());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let p = ProbVector::new(vec![0.7, 0.3]).unwrap();
    let dual_shannon = DecodeConfig::dual(Generator::shannon(), 0.1);
    assert!(matches!(decode(&p, &dual_shannon), Err(Error::Generator(_))));
    let negative = DecodeConfig::primal(Generator::alpha(2.0).unwrap(), -1.0);
    assert!(decode(&p, &negative).is_err());
    let limit = DecodeConfig::primal(Generator::plus_infinity(), 0.1);
    assert!(decode(&p, &limit).is_err());
}
