#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mabisim::dist::{StateId, SubDistribution};
use mabisim::format::parse_model;
use mabisim::model::{Action, MarkovAutomaton, Model, TimedTransition, Transition};
use mabisim::rational::{int, ratio, Rational};
use rand::Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn load(name: &str) -> Model {
    let path = corpus_dir().join(format!("{name}.ma"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The same model with a different initial state.
pub fn rooted(m: &Model, state: &str) -> Model {
    let s = m.state(state).unwrap_or_else(|| panic!("no state {state}"));
    match m {
        Model::Markov(ma) => Model::Markov(
            MarkovAutomaton::new(
                ma.names().to_vec(),
                ma.actions().clone(),
                ma.states()
                    .flat_map(|x| ma.probabilistic(x).iter().map(move |t| (x, t.clone())))
                    .collect(),
                ma.states()
                    .flat_map(|x| ma.timed(x).iter().map(move |t| (x, t.clone())))
                    .collect(),
                s,
            )
            .unwrap(),
        ),
        Model::Prob(p) => Model::Prob(p.with_initial(s)),
    }
}

/// Corpus comparisons as (label, left model, right model). Comparisons of two
/// states of one file use the file rooted at each state.
pub fn corpus_pairs() -> Vec<(String, Model, Model)> {
    let mut out = Vec::new();
    let two = [("fig1_m1", "fig1_m2"), ("fig1_m1", "fig1_m3"), ("fig2_m1", "fig2_m2"), ("fig5a", "fig5b"), ("fig5a", "fig5c")];
    for (a, b) in two {
        out.push((format!("{a} vs {b}"), load(a), load(b)));
    }
    let within = [
        ("fig3_ab", "A", "B"),
        ("fig5a", "E", "C"),
        ("fig5b", "E", "C"),
        ("fig5c", "C", "D"),
        ("fig5c", "E", "D"),
        ("fig5_ef", "E", "F"),
        ("fig6_rescale", "s", "t"),
        ("fig7_example", "s1", "t1"),
        ("fig7_example", "s2", "t1"),
        ("fig7_example_p1_3_q1_4", "s1", "t1"),
        ("fig8_nondet", "s", "t"),
        ("fig8_nondet", "s1", "E"),
        ("fig10_m4", "v", "v'"),
    ];
    for (f, x, y) in within {
        let m = load(f);
        out.push((format!("{f}: {x} vs {y}"), rooted(&m, x), rooted(&m, y)));
    }
    for f in corpus_names() {
        let m = load(&f);
        out.push((format!("{f} vs itself"), m.clone(), m));
    }
    out
}

pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "ma").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

fn random_dist<R: Rng>(rng: &mut R, n: usize) -> SubDistribution {
    let shapes: [&[Rational]; 5] = [
        &[int(1)],
        &[ratio(1, 2), ratio(1, 2)],
        &[ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        &[ratio(1, 4), ratio(1, 4), ratio(1, 2)],
        &[ratio(1, 4), ratio(1, 4), ratio(1, 4), ratio(1, 4)],
    ];
    let shape = shapes[rng.gen_range(0..shapes.len())];
    SubDistribution::from_pairs(shape.iter().map(|q| (StateId(rng.gen_range(0..n)), q.clone()))).unwrap()
}

/// A random Markov automaton with external actions from {a, b}, Markovian
/// rates from {1, 2} and branching probabilities from {1/4, 1/3, 1/2, 1}.
pub fn random_ma<R: Rng>(rng: &mut R, max_states: usize, max_transitions: usize) -> MarkovAutomaton {
    let n = rng.gen_range(1..=max_states);
    let names = (0..n).map(|i| format!("q{i}")).collect();
    let mut pt = Vec::new();
    let mut mt = Vec::new();
    for _ in 0..rng.gen_range(0..=max_transitions) {
        let src = StateId(rng.gen_range(0..n));
        match rng.gen_range(0..4) {
            0 => mt.push((src, TimedTransition { rate: int(rng.gen_range(1..=2)), target: StateId(rng.gen_range(0..n)) })),
            k => {
                let action = match k {
                    1 => Action::Tau,
                    2 => Action::External("a".into()),
                    _ => Action::External("b".into()),
                };
                pt.push((src, Transition { action, target: random_dist(rng, n) }));
            }
        }
    }
    MarkovAutomaton::new(names, BTreeSet::new(), pt, mt, StateId(0)).unwrap()
}
