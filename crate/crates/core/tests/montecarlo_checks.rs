mod common;

use common::{corpus, exact_reach};
use num::{One, Zero};
use ptso_core::markov::rat_f64;
use ptso_core::montecarlo::{attractor_stats, estimate_reach};
use ptso_core::qualitative::{never_qual_reach, qual_reach};
use ptso_core::reach::OracleConfig;
use ptso_core::semantics::initial_config;

const RUNS: u64 = 4000;

#[test]
fn frequencies_match_exact_probabilities() {
    let cases = [
        ("race_sb", "pzero"),
        ("race_writers", "saw2"),
        ("race_cas", "pwin"),
        ("race_spin", "ysaw0"),
        ("cost_branch", "costly"),
    ];
    for (name, label) in cases {
        let p = corpus(name);
        let iota = initial_config(&p);
        let exact = rat_f64(&exact_reach(&p, &iota, label, 10_000));
        let est = estimate_reach(&p, &iota, label, RUNS, 400, 11).unwrap();
        let sigma = (exact * (1.0 - exact) / RUNS as f64).sqrt();
        assert!((est.fraction - exact).abs() <= 4.0 * sigma, "{name}: {} vs {exact}", est.fraction);
    }
}

#[test]
fn qualitative_verdicts_show_in_samples() {
    let cases = [
        ("lr_loop", "seen1"),
        ("race_sb", "pend"),
        ("race_cas", "p4"),
        ("race_spin", "rend"),
        ("rep_two_loops", "pend"),
        ("straight", "done"),
    ];
    for (name, label) in cases {
        let p = corpus(name);
        let iota = initial_config(&p);
        let est = estimate_reach(&p, &iota, label, 1000, 500, 5).unwrap();
        if qual_reach(&p, &iota, label, OracleConfig::default()).unwrap().verdict {
            assert!(est.fraction >= 0.99, "{name} {label}: {}", est.fraction);
        }
        if never_qual_reach(&p, &iota, label, OracleConfig::default()).unwrap().verdict {
            assert_eq!(est.hits, 0, "{name} {label}");
        }
    }
}

#[test]
fn exact_values_of_sure_and_impossible_labels() {
    let p = corpus("race_cas");
    let iota = initial_config(&p);
    assert!(exact_reach(&p, &iota, "pend", 1000).is_one());
    let p = corpus("rep_two_loops");
    assert!(exact_reach(&p, &initial_config(&p), "pend", 1000).is_zero());
}

#[test]
fn runs_return_to_plain_and_shrink_from_large() {
    for name in ["lr_loop", "writers"] {
        let p = corpus(name);
        let s = attractor_stats(&p, &initial_config(&p), 2000, 400, 200, 3).unwrap();
        assert!(s.plain_return_fraction >= 0.99, "{name}: {}", s.plain_return_fraction);
        if s.large_samples > 1 {
            assert!(s.mean_size_change <= -0.25 + 3.0 * s.std_err, "{name}: {s:?}");
        }
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let p = corpus("race_writers");
    let iota = initial_config(&p);
    let a = estimate_reach(&p, &iota, "saw2", 500, 100, 42).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| estimate_reach(&p, &iota, "saw2", 500, 100, 42).unwrap());
    assert_eq!(a, b);
}

#[test]
fn straight_line_cost_samples_are_exact() {
    let p = corpus("straight");
    let iota = initial_config(&p);
    let cost = ptso_core::cost::CostFunction::uniform(&p, 1);
    let e = ptso_core::montecarlo::estimate_cond_cost(&p, &iota, "done", &cost, 200, 10, 0).unwrap();
    assert_eq!((e.mean, e.interval), (3.0, (3.0, 3.0)));
    assert!(ptso_core::montecarlo::estimate_cond_cost(&p, &iota, "done", &cost, 20, 2, 0).is_err());
}
