mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{all_update_words, corpus, merged_row, naive_updates, CORPUS};
use num::{One, Zero};
use proptest::prelude::*;
use ptso_core::lang::{parse_program, print_program};
use ptso_core::markov::{rat, step_distribution, update_distribution, Rational};
use ptso_core::semantics::{self, initial_config, Configuration, Message};

fn configs_within(p: &ptso_core::Program, depth: usize) -> BTreeSet<Configuration> {
    let mut seen = BTreeSet::from([initial_config(p)]);
    let mut layer = vec![initial_config(p)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for c in &layer {
            for d in semantics::ts_successors(p, c) {
                if seen.insert(d.clone()) {
                    next.push(d);
                }
            }
        }
        layer = next;
    }
    seen
}

#[test]
fn rows_are_stochastic_on_the_corpus() {
    for (name, _) in CORPUS {
        let p = corpus(name);
        for c in configs_within(&p, 6) {
            let d = step_distribution(&p, &c);
            assert_eq!(d.total(), Rational::one(), "{name}: {c:?}");
            assert!(d.iter().all(|(_, pr)| pr > &Rational::zero()));
        }
    }
}

#[test]
fn step_distribution_matches_naive_interpreter() {
    for (name, _) in CORPUS {
        let p = corpus(name);
        for c in configs_within(&p, 4) {
            let lib: BTreeMap<Configuration, Rational> =
                step_distribution(&p, &c).into_iter().collect();
            assert_eq!(lib, merged_row(&p, &c), "{name}: {c:?}");
        }
    }
}

fn with_sizes(sizes: &[usize]) -> Configuration {
    let mut n = 0u8;
    Configuration {
        pcs: vec![0; sizes.len()],
        regs: vec![],
        buffers: sizes
            .iter()
            .map(|&k| {
                (0..k)
                    .map(|_| {
                        n = n.wrapping_add(1);
                        Message { var: (n % 2) as u16, value: n % 3 }
                    })
                    .collect()
            })
            .collect(),
        memory: vec![0, 0],
    }
}

#[test]
fn left_bias_word_counts() {
    let distributions: [&[usize]; 11] = [
        &[1, 1, 1, 1, 1, 1],
        &[2, 1, 1, 1, 1],
        &[2, 2, 1, 1],
        &[2, 2, 2],
        &[3, 1, 1, 1],
        &[3, 2, 1],
        &[3, 3],
        &[4, 1, 1],
        &[4, 2],
        &[5, 1],
        &[6],
    ];
    let expected = [7, 6, 5, 4, 5, 4, 3, 4, 3, 3, 2];
    for (sizes, want) in distributions.iter().zip(expected) {
        let c = with_sizes(sizes);
        let words = all_update_words(&c);
        let short = words.iter().filter(|(w, _)| w.len() <= 1).count();
        assert_eq!(short, want, "{sizes:?}");
        assert_eq!(semantics::schedule_count(sizes) as usize, words.len());
        // reaching size <= 4 needs at least two pops
        let shrink = rat((words.len() - short) as i64, words.len() as i64);
        assert!(shrink >= rat(2, 3), "{sizes:?}");
    }
}

fn size5_configs(p: &ptso_core::Program) -> Vec<Configuration> {
    fn splits(total: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![total]];
        }
        (0..=total)
            .flat_map(|k| {
                splits(total - k, parts - 1).into_iter().map(move |mut s| {
                    s.insert(0, k);
                    s
                })
            })
            .collect()
    }
    let n = p.processes.len();
    let mut out = Vec::new();
    for base in configs_within(p, 3).into_iter().filter(|c| c.is_plain()) {
        for s in splits(5, n) {
            let mut c = base.clone();
            for (q, &k) in s.iter().enumerate() {
                c.buffers[q] = (0..k).map(|i| Message { var: 0, value: (i % 2) as u8 }).collect();
            }
            out.push(c);
        }
    }
    out
}

#[test]
fn large_configurations_shrink_with_probability_two_thirds() {
    for (name, _) in CORPUS {
        let p = corpus(name);
        for c in size5_configs(&p) {
            let small: Rational = step_distribution(&p, &c)
                .iter()
                .filter(|(d, _)| d.size() <= 4)
                .map(|(_, pr)| pr.clone())
                .sum();
            assert!(small >= rat(2, 3), "{name}: {c:?}");
        }
    }
}

fn arb_config() -> impl Strategy<Value = Configuration> {
    prop::collection::vec(prop::collection::vec((0u16..2, 0u8..3), 0..4), 1..4).prop_map(|bufs| {
        Configuration {
            pcs: vec![0; bufs.len()],
            regs: vec![],
            buffers: bufs
                .into_iter()
                .map(|b| b.into_iter().map(|(var, value)| Message { var, value }).collect())
                .collect(),
            memory: vec![0, 0],
        }
    })
}

const STATEMENTS: &[&str] = &["x := a", "y := b", "a := x", "b := y", "a := 1", "a := b", "a := a + b", "b := a == b", "a := CAS(x, a, b)"];

fn arb_program() -> impl Strategy<Value = String> {
    let proc = prop::collection::vec((0..STATEMENTS.len() + 1, 0usize..8), 1..7);
    (2u32..5, prop::collection::vec((1u32..4, proc), 1..4)).prop_map(|(domain, procs)| {
        let mut s = format!("domain {domain}\nvars x y\n");
        for (q, (w, body)) in procs.iter().enumerate() {
            s += &format!("proc P{q} weight {w}\nregs a{q} b{q}\n");
            let n = body.len();
            for (i, &(k, t)) in body.iter().enumerate() {
                let stmt = if k == STATEMENTS.len() {
                    // a branch may not target its own instruction
                    let t = if t % (n + 1) == i { n } else { t % (n + 1) };
                    format!("if a then L{q}_{t}")
                } else {
                    STATEMENTS[k].to_string()
                };
                let stmt = stmt.replace('a', &format!("a{q}")).replace('b', &format!("b{q}"));
                s += &format!("L{q}_{i}: {stmt}\n");
            }
            s += &format!("L{q}_{n}: term\n");
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn update_distribution_matches_word_enumeration(c in arb_config()) {
        let lib: BTreeMap<Configuration, Rational> = update_distribution(&c).into_iter().collect();
        prop_assert_eq!(lib, naive_updates(&c));
    }

    #[test]
    fn every_schedule_is_feasible_exactly_once(c in arb_config()) {
        let words = all_update_words(&c);
        let distinct: BTreeSet<Vec<usize>> = words.iter().map(|(w, _)| w.clone()).collect();
        prop_assert_eq!(distinct.len(), words.len());
        let lens: Vec<usize> = c.buffers.iter().map(Vec::len).collect();
        prop_assert_eq!(semantics::schedule_count(&lens) as usize, words.len());
        for (w, d) in words {
            let w = semantics::UpdateSchedule(w);
            prop_assert_eq!(semantics::apply_schedule(&c, &w).unwrap(), d);
        }
    }

    #[test]
    fn print_parse_round_trip(src in arb_program()) {
        let p = parse_program(&src).unwrap();
        let text = print_program(&p).unwrap();
        prop_assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn random_program_rows_are_stochastic(src in arb_program()) {
        let p = parse_program(&src).unwrap();
        for c in configs_within(&p, 3) {
            prop_assert_eq!(step_distribution(&p, &c).total(), Rational::one());
            let lib: BTreeMap<Configuration, Rational> = step_distribution(&p, &c).into_iter().collect();
            prop_assert_eq!(lib, merged_row(&p, &c));
        }
    }
}
