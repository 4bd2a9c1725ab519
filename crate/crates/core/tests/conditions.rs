use dchoice::allocation::{build_cyclic, build_single_choice};
use dchoice::loadsolver::{
    is_stable, necessary_condition_variant, MaxLoadSolver, NecessaryVariant,
};
use dchoice::metrics::estimate_imbalance;
use dchoice::spacings::{iterated_log, predict_single_choice, sample_uniform_spacings, RandomStream, EULER_GAMMA};

#[derive(Default, Debug)]
struct Tally {
    unstable: usize,
    caught_d_plus_one: usize,
    caught_d: usize,
}

fn tally(n: usize, d: usize, sigmas: &[f64], draws: u64) -> Tally {
    let alloc = build_cyclic(n, d).unwrap();
    let solver = MaxLoadSolver::for_allocation(&alloc);
    let mut t = Tally::default();
    for (si, &sigma) in sigmas.iter().enumerate() {
        for i in 0..draws {
            let s = sample_uniform_spacings(n, sigma, RandomStream::new(77 + si as u64, i)).unwrap();
            let stable = is_stable(solver.max_load(s.spacings()).unwrap());
            let wide = necessary_condition_variant(&alloc, &s, NecessaryVariant::WindowDPlusOne).unwrap();
            let narrow = necessary_condition_variant(&alloc, &s, NecessaryVariant::WindowD).unwrap();
            if stable {
                assert!(wide && narrow, "necessary condition rejected a stable draw");
            } else {
                t.unstable += 1;
                t.caught_d_plus_one += usize::from(!wide);
                t.caught_d += usize::from(!narrow);
            }
        }
    }
    t
}

// Both windows are valid; which one rejects more unstable draws is measured, not assumed.
#[test]
fn necessary_window_variants_compared() {
    for (n, d, sigmas) in [(12, 2, [4.0, 6.0, 8.0]), (12, 3, [6.0, 8.0, 10.0]), (15, 4, [9.0, 11.0, 13.0])] {
        let t = tally(n, d, &sigmas, 1500);
        println!("cyclic({n},{d}): {t:?}");
        assert!(t.unstable > 200);
        assert!(
            t.caught_d >= t.caught_d_plus_one,
            "width-d window caught {} of {} unstable draws, width d+1 caught {}",
            t.caught_d,
            t.unstable,
            t.caught_d_plus_one
        );
    }
}

// The correction term for m objects per node enters with a plus sign:
// the largest sum of m spacings sits near log n + (m-1) loglog n.
#[test]
fn single_choice_centering_sign() {
    let (n, m) = (4000, 2);
    let alloc = build_single_choice(n, m).unwrap();
    let est = estimate_imbalance(&alloc, (n * m) as f64, 400, 5).unwrap();
    let observed = est.mean * m as f64 - EULER_GAMMA;
    let plus = predict_single_choice(n, m).unwrap().centering;
    let minus = (n as f64).ln() - iterated_log(n).unwrap();
    assert!((observed - plus).abs() < (observed - minus).abs() / 4.0, "{observed} {plus} {minus}");
}
