//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p sparse-bregman --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::*;
use rand::Rng;
use rayon::prelude::*;
use sparse_bregman::oracle::{brute_force_optimal_supports, linear_scan_k_star, nu_grid, support_cost};
use sparse_bregman::{
    cost_at_k, cost_curve, decode, renorm_alpha15, renorm_alpha2, renorm_dual, renorm_primal,
    renorm_primal_generic, renorm_waterfill, search_k_star, top_k_renormalize, CostModel, DecodeConfig, Generator,
    Mode, ProbVector, Search, SubProbVector, Tolerances,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn alpha(a: f64) -> Generator {
    Generator::alpha(a).unwrap()
}

fn top_k_recovery() -> Outcome {
    let mut r = rng(1);
    let sizes = [10, 1000, 50_000];
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut support_ok = true;
    for i in 0..1000 {
        let v = sizes[i % 3];
        let p = dirichlet(&mut r, v);
        let order = order_desc(p.as_slice());
        for k in [1, 5, 50].into_iter().filter(|&k| k <= v) {
            let t = top_k_renormalize(&p, k, Mode::Primal, &Generator::shannon(), &Tolerances::default()).unwrap();
            let kept = &order[..k];
            let total: f64 = kept.iter().map(|&j| p.as_slice()[j]).sum();
            let mut expected = vec![0.0; v];
            for &j in kept {
                expected[j] = p.as_slice()[j] / total;
            }
            let mut kept_sorted = kept.to_vec();
            kept_sorted.sort_unstable();
            support_ok &= kept_sorted == t.support;
            worst = worst.max(max_abs_diff(&t.sparse_probs, &expected));
            checked += 1;
        }
    }
    Outcome {
        pass: worst <= 1e-12 && support_ok,
        detail: format!("{checked} cases, max entry error {worst:.2e}, supports match: {support_ok}"),
    }
}

fn greedy_optimality() -> Outcome {
    let start = Instant::now();
    let mut configs = Vec::new();
    for a in [1.0, 1.5, 2.0, 3.0] {
        configs.push(DecodeConfig::primal(alpha(a), 0.0));
    }
    for a in [1.5, 2.0, 3.0] {
        configs.push(DecodeConfig::dual(alpha(a), 0.0));
    }
    let jobs: Vec<(usize, usize)> = (1..=8).flat_map(|v| (0..configs.len()).map(move |c| (v, c))).collect();
    let results: Vec<(f64, usize, usize)> = jobs
        .par_iter()
        .map(|&(v, c)| {
            let cfg = configs[c];
            let mut r = rng(1000 + 10 * v as u64 + c as u64);
            let mut worst = 0.0f64;
            let mut not_top_k = 0;
            let mut cases = 0;
            for _ in 0..200 {
                let p = dirichlet(&mut r, v);
                let order = order_desc(p.as_slice());
                for k in 1..=v {
                    let (optimal, best) = brute_force_optimal_supports(&p, k, &cfg).unwrap();
                    let (fast, _) = cost_at_k(&p, k, &cfg).unwrap();
                    let mut top = order[..k].to_vec();
                    top.sort_unstable();
                    let top_cost = support_cost(&p, &top, &cfg).unwrap();
                    worst = worst.max((fast - best).abs()).max(top_cost - best);
                    if !optimal.contains(&top) && top_cost - best > 1e-9 {
                        not_top_k += 1;
                    }
                    cases += 1;
                }
            }
            (worst, not_top_k, cases)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let bad: usize = results.iter().map(|r| r.1).sum();
    let cases: usize = results.iter().map(|r| r.2).sum();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= 1e-9 && bad == 0 && secs < 120.0,
        detail: format!("{cases} (V, k, p, config) cases, max cost gap {worst:.2e}, non-top-k optima {bad}, {secs:.1}s"),
    }
}

fn discrete_convexity() -> Outcome {
    let mut configs = Vec::new();
    for a in [1.25, 1.5, 2.0, 5.0] {
        configs.push(DecodeConfig::primal(alpha(a), 1.0 / 80.0));
        configs.push(DecodeConfig::dual(alpha(a), 1.0 / 80.0));
    }
    let results: Vec<(f64, f64)> = configs
        .par_iter()
        .enumerate()
        .map(|(c, cfg)| {
            let mut r = rng(3000 + c as u64);
            let mut min_d2 = f64::INFINITY;
            let mut end_err = 0.0f64;
            for _ in 0..1000 {
                let p = dirichlet(&mut r, 80);
                let curve = cost_curve(&p, cfg, 1, 80).unwrap();
                for (_, d2) in curve.second_differences() {
                    min_d2 = min_d2.min(d2);
                }
                end_err = end_err.max((curve.entries[79].1 - 1.0).abs());
            }
            (min_d2, end_err)
        })
        .collect();
    let min_d2 = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let end_err = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Outcome {
        pass: min_d2 >= -1e-9 && end_err <= 1e-6,
        detail: format!("8000 curves, min second difference {min_d2:.2e}, max |cost(80) - 1| {end_err:.2e}"),
    }
}

fn search_correctness() -> Outcome {
    let mut r = rng(4);
    let instances: Vec<(ProbVector, DecodeConfig)> = (0..1000)
        .map(|i| {
            let dual = i % 4 == 3;
            let a = [1.25, 1.5, 2.0, 3.0, 5.0][r.gen_range(0..5)];
            // The linear scan is quadratic in V; large V only where cost(k) is closed form.
            let closed = !dual && (a == 1.5 || a == 2.0 || i % 7 == 0);
            let v = if dual { r.gen_range(2..=150) } else if closed { r.gen_range(2..=2000) } else { r.gen_range(2..=300) };
            let p = if i % 2 == 0 { dirichlet(&mut r, v) } else { peaked(&mut r, v, 3.0) };
            let lambda = 10f64.powf(r.gen_range(-5.0..-0.5));
            let cfg = if dual {
                DecodeConfig::dual(alpha(a), lambda)
            } else {
                let g = if i % 7 == 0 { Generator::shannon() } else { alpha(a) };
                DecodeConfig::primal(g, lambda)
            };
            (p, cfg)
        })
        .collect();
    let results: Vec<(f64, bool)> = instances
        .par_iter()
        .map(|(p, cfg)| {
            let (_, best) = linear_scan_k_star(p, cfg).unwrap();
            let binary_model = CostModel::new(p, cfg).unwrap();
            let binary = search_k_star(&binary_model, Search::Binary).unwrap();
            let expo = search_k_star(&CostModel::new(p, cfg).unwrap(), Search::Exponential).unwrap();
            let gap = (binary.cost - best).abs().max((expo.cost - best).abs());
            let budget = 2 * (p.len() as f64).log2().ceil() as usize + 4;
            (gap, binary.evaluations <= budget)
        })
        .collect();
    let gap = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let within = results.iter().filter(|r| r.1).count();
    Outcome {
        pass: gap <= 1e-10 && within == results.len(),
        detail: format!(
            "1000 instances, max cost gap to linear scan {gap:.2e}, binary within evaluation budget {within}/1000"
        ),
    }
}

fn closed_forms() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = sub_prob(&mut r, 1 + i % 40, 0.05, 0.999);
        let g15 = renorm_primal_generic(&alpha(1.5), &x).unwrap();
        let g2 = renorm_primal_generic(&alpha(2.0), &x).unwrap();
        worst = worst.max(max_abs_diff(&renorm_alpha15(&x).probs, &g15.probs));
        worst = worst.max(max_abs_diff(&renorm_alpha2(&x).probs, &g2.probs));
    }
    let x = SubProbVector::new(vec![0.5, 0.25]).unwrap();
    let a15 = renorm_primal(&alpha(1.5), &x, &Tolerances::default()).unwrap().probs;
    let a2 = renorm_primal(&alpha(2.0), &x, &Tolerances::default()).unwrap().probs;
    let ex15 = (a15[0] - 0.64487).abs() <= 1e-4 && (a15[1] - 0.35513).abs() <= 1e-4;
    let ex2 = a2 == [0.625, 0.375];
    Outcome {
        pass: worst <= 1e-10 && ex15 && ex2,
        detail: format!(
            "max closed form vs root finder {worst:.2e}, (0.5, 0.25) -> ({:.5}, {:.5}) at 1.5 and ({}, {}) at 2",
            a15[0], a15[1], a2[0], a2[1]
        ),
    }
}

fn primal_dual_coincidence() -> Outcome {
    let mut r = rng(6);
    let tol = Tolerances::default();
    let g = alpha(2.0);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let x = sub_prob(&mut r, 1 + i % 30, 0.05, 0.999);
        let p = renorm_primal(&g, &x, &tol).unwrap();
        let d = renorm_dual(&g, &x, &tol).unwrap();
        worst = worst.max(max_abs_diff(&p.probs, &d.probs));
    }
    let inputs = [
        vec![0.4, 0.2, 0.1],
        vec![0.3, 0.25, 0.05, 0.02],
        vec![0.5, 0.1, 0.1, 0.05, 0.01],
        vec![0.2, 0.15, 0.1, 0.05],
    ];
    let mut monotone = true;
    let mut last = (0.0, 0.0);
    for x in &inputs {
        let x = SubProbVector::new(x.clone()).unwrap();
        let water = renorm_waterfill(&x).probs;
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for a in [10.0, 20.0, 50.0] {
            let dp = max_abs_diff(&renorm_primal(&alpha(a), &x, &tol).unwrap().probs, &water);
            let dd = max_abs_diff(&renorm_dual(&alpha(a), &x, &tol).unwrap().probs, &water);
            monotone &= dp < prev.0 && dd < prev.1;
            prev = (dp, dd);
        }
        last = prev;
    }
    Outcome {
        pass: worst <= 1e-9 && monotone,
        detail: format!(
            "500 inputs, max primal/dual gap at 2 {worst:.2e}, distance to water-filling decreasing over 10, 20, 50: {monotone} (last at 50: {:.2e} / {:.2e})",
            last.0, last.1
        ),
    }
}

fn dual_uniqueness() -> Outcome {
    let mut r = rng(7);
    let instances: Vec<(Generator, SubProbVector)> = (0..200)
        .map(|_| {
            let a = [1.25, 1.5, 2.0, 3.0, 5.0, 10.0][r.gen_range(0..6)];
            let k = r.gen_range(1..=8);
            (alpha(a), sub_prob(&mut r, k, 0.05, 0.98))
        })
        .collect();
    let results: Vec<(bool, bool)> = instances
        .par_iter()
        .map(|(g, x)| {
            let top = g.d2phi(1.0).unwrap() * (1.0 - x.max());
            let scan = nu_grid(g, x, Mode::Dual, top / 2000.0).unwrap();
            let nu = renorm_dual(g, x, &Tolerances::default()).unwrap().nu;
            // The scan reports the first grid point at or past the root; an
            // extra step of slack covers roots landing exactly on a point.
            let matches = nu <= scan.crossing + 1e-12 && nu >= scan.crossing - 2.0 * scan.step;
            (scan.sign_changes == 1, matches)
        })
        .collect();
    let single = results.iter().filter(|r| r.0).count();
    let matched = results.iter().filter(|r| r.1).count();
    Outcome {
        pass: single == 200 && matched == 200,
        detail: format!("single crossing {single}/200, solver within grid step {matched}/200"),
    }
}

fn lambda_zero_identity() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    let mut full = true;
    let mut monotone = true;
    for i in 0..200 {
        let v = r.gen_range(1..=300);
        let p = if i % 2 == 0 { dirichlet(&mut r, v) } else { peaked(&mut r, v, 2.0) };
        let a = [1.25, 1.5, 2.0, 3.0][i % 4];
        for mode in [Mode::Primal, Mode::Dual] {
            let cfg = DecodeConfig::new(mode, alpha(a), 0.0);
            let d = decode(&p, &cfg).unwrap();
            full &= d.k_star == v;
            worst = worst.max(max_abs_diff(&d.sparse_probs, p.as_slice()));
            let mut prev = usize::MAX;
            for lambda in [1e-4, 1e-3, 1e-2, 1e-1] {
                let k = decode(&p, &DecodeConfig::new(mode, alpha(a), lambda)).unwrap().k_star;
                monotone &= k <= prev;
                prev = k;
            }
        }
    }
    Outcome {
        pass: worst <= 1e-10 && full && monotone,
        detail: format!("400 decodes at zero price, max |p_hat - p| {worst:.2e}, k* = V: {full}, k* nonincreasing in price: {monotone}"),
    }
}

fn figure_one() -> Outcome {
    let v = 1000;
    let h: f64 = (1..=v).map(|i| 1.0 / i as f64).sum();
    let p = ProbVector::new((1..=v).map(|i| 1.0 / (i as f64 * h)).collect()).unwrap();
    let entropies: Vec<f64> = [0.25, 1.0, 2.5]
        .iter()
        .map(|&a| {
            let t = top_k_renormalize(&p, 10, Mode::Primal, &alpha(a), &Tolerances::default()).unwrap();
            entropy(&t.sparse_probs)
        })
        .collect();
    Outcome {
        pass: entropies[0] < entropies[1] && entropies[1] < entropies[2],
        detail: format!(
            "entropy of top-10 at 0.25, 1, 2.5: {:.4} < {:.4} < {:.4}",
            entropies[0], entropies[1], entropies[2]
        ),
    }
}

fn throughput() -> Outcome {
    let cfg = DecodeConfig::primal(alpha(2.0), 1e-3).with_search(Search::Binary);
    let (total, batch) = (10_000u64, 500u64);
    let mut decode_secs = 0.0;
    let mut k_sum = 0usize;
    for b in 0..total / batch {
        let ps: Vec<ProbVector> = (0..batch)
            .into_par_iter()
            .map(|i| peaked(&mut rng(90_000 + b * batch + i), 50_000, 3.0))
            .collect();
        let t = Instant::now();
        let results = sparse_bregman::decode_batch(&ps, &cfg);
        decode_secs += t.elapsed().as_secs_f64();
        k_sum += results.into_iter().map(|r| r.unwrap().k_star).sum::<usize>();
    }
    Outcome {
        pass: decode_secs < 60.0,
        detail: format!(
            "10000 x V=50000 decoded in {decode_secs:.1}s on {} thread(s), mean k* {:.1}",
            rayon::current_num_threads(),
            k_sum as f64 / total as f64
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("top-k recovery", top_k_recovery),
        ("greedy optimality vs brute force", greedy_optimality),
        ("discrete convexity", discrete_convexity),
        ("search correctness", search_correctness),
        ("closed-form agreement", closed_forms),
        ("primal/dual coincidence", primal_dual_coincidence),
        ("dual uniqueness witness", dual_uniqueness),
        ("zero-price identity", lambda_zero_identity),
        ("entropy ordering on Zipf input", figure_one),
        ("throughput", throughput),
    ];
    // ACCEPTANCE_ONLY=3,7 runs a subset.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} [{status}] {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
