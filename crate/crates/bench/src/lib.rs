//! Corpus programs shared by the benchmarks.

use ptso_core::{parse_program, Program};

const CORPUS: &[(&str, &str)] = &[
    ("lr_loop", include_str!("../../../corpus/lr_loop.ptso")),
    ("race_sb", include_str!("../../../corpus/race_sb.ptso")),
    ("race_writers", include_str!("../../../corpus/race_writers.ptso")),
    ("race_spin", include_str!("../../../corpus/race_spin.ptso")),
    ("rep_two_loops", include_str!("../../../corpus/rep_two_loops.ptso")),
    ("cost_branch", include_str!("../../../corpus/cost_branch.ptso")),
    ("writers", include_str!("../../../corpus/writers.ptso")),
];

pub const BRANCH_COSTS: &str = include_str!("../../../corpus/branch_costs.json");

pub fn program(name: &str) -> Program {
    let src = CORPUS.iter().find(|(n, _)| *n == name).expect("unknown corpus program").1;
    parse_program(src).expect("corpus program parses")
}
