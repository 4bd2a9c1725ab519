//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line is printed even
//! when all criteria pass. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use dchoice::allocation::{
    build_block_design, build_clustering, build_cyclic, build_cyclic_xor, build_single_choice,
    overlap_sum, Allocation,
};
use dchoice::loadsolver::{
    is_stable, min_max_load, min_max_load_flow, necessary_condition, sufficient_condition,
    MaxLoadSolver,
};
use dchoice::metrics::{
    circle_line_checks, estimate_p_sigma, exact_p_sigma_k3, gumbel_ks_check, imbalance_samples,
    paired_difference, run_point, simulate, simulate_trials, write_rows_csv, LimitCheckConfig,
};
use dchoice::spacings::{predict_d_choice, predict_xor, sample_uniform_spacings, RandomStream, Regime, EULER_GAMMA};
use dchoice::stats::mean_stderr;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-7;
const KS_MAX: f64 = 0.02;
const MEAN_REL: f64 = 0.05;
const BAND_LO: f64 = 0.4;
const BAND_HI: f64 = 1.2;
const P_HIGH: f64 = 0.9;
const P_LOW: f64 = 0.1;
const SHAPE_REL: f64 = 0.35;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.detail = format!("{}; {:.2}s", out.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail = format!("{} exceeds {}s", out.detail, limit.as_secs());
        }
    }
    out
}

fn c1_exact_geometry() -> Outcome {
    let expected = [(1, 0.0), (2, 2.0 / 3.0), (3, 1.0)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, want) in expected {
        let e = exact_p_sigma_k3(&build_cyclic(3, d).unwrap(), 3.0).unwrap();
        ok &= (e.p_sigma - want).abs() <= EXACT_TOL;
        parts.push(format!("d={d}: {:.15}", e.p_sigma));
    }
    let e = exact_p_sigma_k3(&build_cyclic(3, 2).unwrap(), 3.0).unwrap();
    let got: BTreeSet<[i64; 3]> = e.vertices.iter().map(|v| v.map(|x| x.round() as i64)).collect();
    let near_integer = e.vertices.iter().flatten().all(|x| (x - x.round()).abs() <= EXACT_TOL);
    let want: BTreeSet<[i64; 3]> =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]].into_iter().collect();
    ok &= got == want && near_integer && e.vertices.len() == 6;
    outcome(ok, format!("{}; hexagon vertices match: {}", parts.join(", "), got == want))
}

fn c2_monte_carlo() -> Outcome {
    let p = estimate_p_sigma(&build_cyclic(3, 2).unwrap(), 3.0, 100_000, 2024).unwrap();
    let dev = (p.mean - 2.0 / 3.0).abs();
    outcome(
        dev <= 3.0 * p.stderr,
        format!("p = {:.5}, |p - 2/3| = {dev:.5} vs 3 stderr = {:.5}", p.mean, 3.0 * p.stderr),
    )
}

fn c3_overlap_identity() -> Outcome {
    let allocs = [
        build_clustering(9, 3).unwrap(),
        build_cyclic(7, 3).unwrap(),
        build_cyclic(100, 2).unwrap(),
        build_cyclic(100, 3).unwrap(),
        build_cyclic(100, 5).unwrap(),
        build_block_design(3).unwrap(),
        build_block_design(5).unwrap(),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for a in &allocs {
        let got = overlap_sum(a).unwrap();
        let want = (a.d() - 1) * a.d() * a.k();
        ok &= got == want;
        parts.push(format!("{}({},{})={got}", a.kind(), a.n(), a.d()));
    }
    outcome(ok, parts.join(" "))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn rows(text: &[&str]) -> Vec<Vec<u8>> {
    text.iter()
        .map(|r| r.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn c4_displays() -> Outcome {
    // Seven-node three-choice cyclic layout, objects a..g as 0..6.
    let cyclic_display: Vec<Vec<usize>> = vec![
        vec![0, 6, 5],
        vec![1, 0, 6],
        vec![2, 1, 0],
        vec![3, 2, 1],
        vec![4, 3, 2],
        vec![5, 4, 3],
        vec![6, 5, 4],
    ];
    let cyclic_ok = build_cyclic(7, 3).unwrap().node_contents() == cyclic_display;

    let fano: [[usize; 3]; 7] =
        [[0, 1, 2], [0, 5, 6], [0, 3, 4], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]];
    let ours: BTreeSet<BTreeSet<usize>> = build_block_design(3)
        .unwrap()
        .node_contents()
        .into_iter()
        .map(|c| c.into_iter().collect())
        .collect();
    let mut perm: Vec<usize> = (0..7).collect();
    let mut fano_ok = false;
    loop {
        let mapped: BTreeSet<BTreeSet<usize>> =
            fano.iter().map(|b| b.iter().map(|&o| perm[o]).collect()).collect();
        if mapped == ours {
            fano_ok = true;
            break;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let replica_ok = build_cyclic(3, 2).unwrap().to_matrices().m_dense()
        == rows(&["1 0 0 0 0 1", "0 1 1 0 0 0", "0 0 0 1 1 0"]);
    let xor_ok = build_cyclic_xor(3, 2, 2).unwrap().to_matrices().m_dense()
        == rows(&["1 0 0 1 0 1", "0 1 1 0 0 1", "0 1 0 1 1 0"]);
    outcome(
        cyclic_ok && fano_ok && replica_ok && xor_ok,
        format!("cyclic layout {cyclic_ok}, fano isomorphism {fano_ok}, replica M {replica_ok}, xor M {xor_ok}"),
    )
}

fn random_replica(rng: &mut ChaCha8Rng) -> Allocation {
    let n = rng.random_range(1..=12);
    let k = rng.random_range(1..=12);
    let sets = (0..k)
        .map(|_| {
            let d = rng.random_range(1..=n);
            sample(rng, n, d).into_iter().map(|v| vec![v]).collect()
        })
        .collect();
    Allocation::custom(n, k, 1, 1, sets).unwrap()
}

fn c5_cross_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..1000u64 {
        let alloc = match i % 4 {
            0 | 1 => random_replica(&mut rng),
            2 => {
                let n = rng.random_range(1..=12);
                build_cyclic(n, rng.random_range(1..=n)).unwrap()
            }
            _ => {
                let d = rng.random_range(1..=4);
                build_clustering(d * rng.random_range(1..=12 / d), d).unwrap()
            }
        };
        let sigma = rng.random_range(0.1..(alloc.n() as f64 * 1.5));
        let rho = sample_uniform_spacings(alloc.k(), sigma, RandomStream::new(55, i)).unwrap();
        let lp = min_max_load(&alloc.to_matrices(), rho.spacings()).unwrap().max_load;
        let flow = min_max_load_flow(&alloc, rho.spacings(), 1e-9).unwrap();
        worst = worst.max((lp - flow).abs());
    }
    outcome(worst <= ORACLE_TOL, format!("max |LP - flow| = {worst:.2e} over 1000 instances"))
}

// Counts over `per_level` draws at each load level, 10^4 draws in total.
fn sandwich(alloc: &Allocation, sigmas: &[f64], per_level: u64) -> (usize, usize, usize, usize) {
    let solver = MaxLoadSolver::for_allocation(alloc);
    let (mut violations, mut suff, mut stable_count, mut nec_fail) = (0, 0, 0, 0);
    for (level, &sigma) in sigmas.iter().enumerate() {
        for i in 0..per_level {
            let stream = RandomStream::new(66 + level as u64, i);
            let s = sample_uniform_spacings(alloc.k(), sigma, stream).unwrap();
            let stable = is_stable(solver.max_load(s.spacings()).unwrap());
            let su = sufficient_condition(alloc, &s).unwrap();
            let ne = necessary_condition(alloc, &s).unwrap();
            violations += usize::from(su && !stable) + usize::from(stable && !ne);
            suff += usize::from(su);
            stable_count += usize::from(stable);
            nec_fail += usize::from(!ne);
        }
    }
    (violations, suff, stable_count, nec_fail)
}

fn c6_sandwich() -> Outcome {
    let cases = [
        (build_cyclic(12, 3).unwrap(), [4.0, 7.0, 10.0, 12.0]),
        (build_clustering(12, 3).unwrap(), [4.0, 7.0, 10.0, 12.0]),
        (build_block_design(3).unwrap(), [1.5, 3.0, 5.0, 7.0]),
        (build_cyclic_xor(10, 3, 2).unwrap(), [3.0, 5.0, 7.0, 9.0]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, sigmas) in &cases {
        let (v, suff, stable, nec_fail) = sandwich(a, sigmas, 2500);
        ok &= v == 0;
        parts.push(format!(
            "{}: {v} violations (sufficient {suff}, stable {stable}, necessary fails {nec_fail})",
            a.kind()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c7_single_choice() -> Outcome {
    let n = 10_000;
    let cfg = LimitCheckConfig { k: n, d: 1, trials: 10_000, seed: 7, ks_threshold: KS_MAX };
    let ks = gumbel_ks_check(&cfg, false).unwrap();
    let values = imbalance_samples(&build_single_choice(n, 1).unwrap(), 0.8 * n as f64, 10_000, 7).unwrap();
    let (mean, _) = mean_stderr(&values);
    let target = (n as f64).ln() + EULER_GAMMA;
    let rel = (mean / target - 1.0).abs();
    outcome(
        ks.pass && rel <= MEAN_REL,
        format!("KS = {:.4} (max {KS_MAX}), mean I = {mean:.4} vs {target:.4} ({:.2}% off)", ks.statistic, 100.0 * rel),
    )
}

fn c8_d_choice_band() -> Outcome {
    let n = 1000;
    let sigma = 0.8 * n as f64;
    let ds = [2usize, 3, 5];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut samples = Vec::new();
    for &d in &ds {
        let values = imbalance_samples(&build_cyclic(n, d).unwrap(), sigma, 1000, 8).unwrap();
        let (mean, _) = mean_stderr(&values);
        let b = predict_d_choice(n, d, Regime::SmallD, None).unwrap().centering;
        let ratio = mean * d as f64 / b;
        ok &= (BAND_LO..=BAND_HI).contains(&ratio);
        parts.push(format!("d={d}: I={mean:.4}, I*d/B={ratio:.3}"));
        samples.push(values);
    }
    let mut reversals = 0;
    let mut trial_reversals = 0;
    for w in samples.windows(2) {
        let (diff, se) = paired_difference(&w[0], &w[1]);
        reversals += usize::from(diff < -3.0 * se);
        trial_reversals += w[0].iter().zip(&w[1]).filter(|(a, b)| b > a).count();
    }
    ok &= reversals == 0;
    outcome(
        ok,
        format!("{}; reversals beyond 3 stderr: {reversals}, per-trial increases: {trial_reversals}", parts.join(", ")),
    )
}

fn c9_phase_transition() -> Outcome {
    let n = 500usize;
    let d = 3.0;
    let alloc = build_cyclic(n, 3).unwrap();
    let sigma = |b: f64| b * n as f64 / (n as f64).ln();
    let low = estimate_p_sigma(&alloc, sigma(0.5 * d), 1000, 9).unwrap();
    let high = estimate_p_sigma(&alloc, sigma(3.0 * d), 1000, 9).unwrap();
    outcome(
        low.mean >= P_HIGH && high.mean <= P_LOW,
        format!("P at b=0.5d: {:.4} (min {P_HIGH}), P at b=3d: {:.4} (max {P_LOW})", low.mean, high.mean),
    )
}

fn c10_xor() -> Outcome {
    let (n, d, r) = (100, 3, 2);
    let sigma = 0.8 * n as f64;
    let trials = 2000;
    let xor = imbalance_samples(&build_cyclic_xor(n, d, r).unwrap(), sigma, trials, 10).unwrap();
    let rep = imbalance_samples(&build_cyclic(n, d).unwrap(), sigma, trials, 10).unwrap();
    let (diff, se) = paired_difference(&xor, &rep);
    let (mean, _) = mean_stderr(&xor);
    let b = predict_xor(n, d, r, Regime::SmallD, None).unwrap().centering;
    let ratio = mean * d as f64 / b;
    outcome(
        diff > 3.0 * se && (BAND_LO..=BAND_HI).contains(&ratio),
        format!("I_xor - I_rep = {diff:.4} (3 stderr {:.4}), I_xor = {mean:.4}, I*d/B = {ratio:.3}", 3.0 * se),
    )
}

fn c11_circle_facts() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, d) in [(100usize, 3usize), (1000, 10)] {
        for c in circle_line_checks(k, d, 100_000, 11).unwrap() {
            ok &= c.pass && !c.skipped;
            if !c.pass {
                parts.push(format!("FAILED {}: {} > {}", c.name, c.statistic, c.threshold));
            }
        }
        parts.push(format!("(k={k}, d={d}) checked"));
    }
    outcome(ok, parts.join(", "))
}

fn c12_figure_shapes() -> Outcome {
    let n = 100;
    let sigma = 80.0;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut i1 = 0.0;
    let mut prev_p = -1.0;
    for d in 1..=5 {
        let sim = simulate(&build_cyclic(n, d).unwrap(), sigma, 100_000, 12).unwrap();
        let i = sim.imbalance.mean;
        if d == 1 {
            i1 = i;
            ok &= (4.0..=5.5).contains(&i);
        }
        let rel = (i * d as f64 / i1 - 1.0).abs();
        ok &= rel <= SHAPE_REL;
        ok &= sim.p_sigma.mean >= prev_p;
        prev_p = sim.p_sigma.mean;
        parts.push(format!("d={d}: I={i:.3}, I*d/I(1)={:.3}, P={:.4}", i * d as f64 / i1, sim.p_sigma.mean));
    }
    let orderings = [
        ("block<=cyclic d=3", build_block_design(3).unwrap(), build_cyclic(7, 3).unwrap()),
        ("cyclic<=clustering d=3", build_cyclic(9, 3).unwrap(), build_clustering(9, 3).unwrap()),
        ("block<=cyclic d=5", build_block_design(5).unwrap(), build_cyclic(21, 5).unwrap()),
        ("cyclic<=clustering d=5", build_cyclic(20, 5).unwrap(), build_clustering(20, 5).unwrap()),
    ];
    for (name, better, worse) in orderings {
        let s = 0.8 * better.n() as f64;
        let a = imbalance_samples(&better, s, 20_000, 12).unwrap();
        let b = imbalance_samples(&worse, s, 20_000, 12).unwrap();
        let (diff, se) = paired_difference(&a, &b);
        ok &= diff <= 3.0 * se;
        parts.push(format!("{name}: diff {diff:.4} (3 stderr {:.4})", 3.0 * se));
    }
    outcome(ok, parts.join("; "))
}

fn c13_determinism() -> Outcome {
    let allocs = [build_cyclic(100, 3).unwrap(), build_cyclic_xor(20, 3, 2).unwrap(), build_block_design(4).unwrap()];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let rows: Vec<_> = allocs
                .iter()
                .map(|a| run_point(a, 0.8 * a.n() as f64, 2000, 13).unwrap())
                .collect();
            let mut buf = Vec::new();
            write_rows_csv(&rows, &mut buf).unwrap();
            let loads: Vec<u64> = simulate_trials(&allocs[0], 80.0, 500, 13)
                .unwrap()
                .iter()
                .map(|o| o.max_load.to_bits())
                .collect();
            (buf, loads)
        })
    };
    let one = run(1);
    let many = run(8);
    let again = run(3);
    let same = one == many && one == again;
    outcome(same, format!("1, 3 and 8 worker threads give identical bytes: {same}"))
}

fn main() {
    let criteria: Vec<(&str, Option<u64>, fn() -> Outcome)> = vec![
        ("C1 exact three-node geometry", Some(1), c1_exact_geometry),
        ("C2 Monte Carlo agreement", Some(60), c2_monte_carlo),
        ("C3 overlap identity", None, c3_overlap_identity),
        ("C4 printed layouts and matrices", None, c4_displays),
        ("C5 LP vs max-flow cross-oracle", Some(120), c5_cross_oracle),
        ("C6 stability sandwich", None, c6_sandwich),
        ("C7 single-choice limit law", Some(300), c7_single_choice),
        ("C8 d-choice band at n=1000", None, c8_d_choice_band),
        ("C9 P_sigma phase transition", Some(600), c9_phase_transition),
        ("C10 XOR versus replicas", None, c10_xor),
        ("C11 circular spacing facts", None, c11_circle_facts),
        ("C12 figure shapes and design ordering", None, c12_figure_shapes),
        ("C13 determinism across worker counts", None, c13_determinism),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let out = timed(limit.map(Duration::from_secs), f);
        println!("[{}] {name}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
