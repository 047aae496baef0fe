mod common;

use std::collections::BTreeSet;

use mabisim::chi::ChiMode;
use mabisim::dist::{StateId, SubDistribution};
use mabisim::model::{Action, Model, ProbAutomaton, Transition};
use mabisim::partition::Partition;
use mabisim::polytope::{hull_reduce, in_hull, project_point, set_equal, ConvexSet, Point};
use mabisim::rational::{int, ratio, Rational};
use mabisim::weak::{dirac_det_tau_targets, generator_set, WeakConfig};
use num::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> WeakConfig {
    WeakConfig::default()
}

fn a() -> Action {
    Action::External("a".into())
}

/// Random automaton whose transitions only lead to higher-numbered states.
fn random_acyclic(rng: &mut ChaCha8Rng, n: usize) -> ProbAutomaton {
    let mut ts = Vec::new();
    for s in 0..n - 1 {
        for _ in 0..rng.gen_range(0..=2) {
            let action = if rng.gen_bool(0.7) { Action::Tau } else { a() };
            let t1 = rng.gen_range(s + 1..n);
            let t2 = rng.gen_range(s + 1..n);
            let target = if rng.gen_bool(0.5) {
                SubDistribution::dirac(StateId(t1))
            } else {
                SubDistribution::from_pairs([(StateId(t1), ratio(1, 3)), (StateId(t2), ratio(2, 3))]).unwrap()
            };
            ts.push((StateId(s), Transition { action, target }));
        }
    }
    ProbAutomaton::new((0..n).map(|i| format!("q{i}")).collect(), ts, StateId(0)).unwrap()
}

/// All outcomes of deterministic transition trees, allowing different
/// choices on different branches. `done` means the label has been taken.
fn trees(p: &ProbAutomaton, s: StateId, label: &Action, done: bool) -> Vec<SubDistribution> {
    let mut out = Vec::new();
    if done {
        out.push(SubDistribution::dirac(s));
    }
    for t in p.outgoing(s) {
        let next_done = if t.action == Action::Tau {
            done
        } else if !done && &t.action == label {
            true
        } else {
            continue;
        };
        let mut acc = vec![SubDistribution::empty()];
        for (x, q) in t.target.iter() {
            let sub = trees(p, x, label, next_done);
            acc = acc
                .iter()
                .flat_map(|d| sub.iter().map(move |e| d.sum(&e.scale(q).unwrap()).unwrap()))
                .collect();
        }
        out.extend(acc);
    }
    out
}

fn hull(n: usize, ds: &[SubDistribution]) -> ConvexSet {
    ConvexSet::from_generators(n, ds.iter().map(|d| d.to_vector(n)).collect()).unwrap()
}

#[test]
fn acyclic_generator_sets_match_tree_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let n = rng.gen_range(2..=5);
        let p = random_acyclic(&mut rng, n);
        for s in p.states() {
            for label in [Action::Tau, a()] {
                let gens = generator_set(&p, s, &label, &cfg()).unwrap();
                let expanded = trees(&p, s, &label, label == Action::Tau);
                assert!(set_equal(&hull(n, &gens), &hull(n, &expanded)).unwrap(), "state {s} label {label}");
            }
        }
    }
}

proptest! {
    #[test]
    fn generators_are_full_and_contain_stop(seed in any::<u64>()) {
        let m = common::random_ma(&mut ChaCha8Rng::seed_from_u64(seed), 4, 4);
        let p = Model::Markov(m).to_pa(ChiMode::WithChiZero);
        let n = p.num_states();
        let part = Partition::from_labels(&(0..n).map(|i| i % 2).collect::<Vec<_>>());
        for s in p.states() {
            let taus = generator_set(&p, s, &Action::Tau, &cfg()).unwrap();
            prop_assert!(in_hull(&taus.iter().map(|d| d.to_vector(n)).collect::<Vec<_>>(), &SubDistribution::dirac(s).to_vector(n)));
            for alpha in p.actions() {
                for g in generator_set(&p, s, &alpha, &cfg()).unwrap() {
                    prop_assert!(g.mass().is_one());
                    let projected: Rational = project_point(&g.to_vector(n), &part).into_iter().sum();
                    prop_assert!(projected.is_one());
                }
            }
        }
    }

    #[test]
    fn adding_a_transition_never_shrinks_sets(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_ma(&mut rng, 4, 3);
        let p = Model::Markov(m).to_pa(ChiMode::LegacyNoChiZero);
        let n = p.num_states();
        let src = StateId(rng.gen_range(0..n));
        let action = if rng.gen_bool(0.6) { Action::Tau } else { a() };
        let mut outgoing = p.outgoing(src).to_vec();
        outgoing.push(Transition { action, target: SubDistribution::dirac(StateId(rng.gen_range(0..n))) });
        let q = p.with_outgoing(src, outgoing);
        for s in p.states() {
            for alpha in [Action::Tau, a()] {
                let bigger: Vec<Point> = generator_set(&q, s, &alpha, &cfg()).unwrap().iter().map(|d| d.to_vector(n)).collect();
                for g in generator_set(&p, s, &alpha, &cfg()).unwrap() {
                    prop_assert!(in_hull(&bigger, &g.to_vector(n)));
                }
            }
        }
    }

    #[test]
    fn hull_reduce_is_idempotent(points in prop::collection::vec(prop::collection::vec(0i64..=3, 3), 1..8)) {
        let pts: Vec<Point> = points.iter().map(|v| v.iter().map(|&x| int(x)).collect()).collect();
        let once = hull_reduce(3, pts.clone()).unwrap();
        let twice = hull_reduce(3, once.generators().to_vec()).unwrap();
        prop_assert_eq!(&once, &twice);
        let raw = ConvexSet::from_generators(3, pts.clone()).unwrap();
        prop_assert!(set_equal(&once, &raw).unwrap());
        for p in &pts {
            prop_assert!(once.contains(p).unwrap());
        }
    }

    #[test]
    fn restriction_shrinks_monotonically(points in prop::collection::vec(prop::collection::vec(0i64..=2, 3), 1..8), z in prop::collection::btree_set(0usize..3, 0..3), extra in 0usize..3) {
        let pts: Vec<Point> = points.iter().map(|v| v.iter().map(|&x| int(x)).collect()).collect();
        let c = ConvexSet::from_generators(3, pts).unwrap();
        let small = c.restrict_zero(&z);
        let mut bigger_z: BTreeSet<usize> = z.clone();
        bigger_z.insert(extra);
        let smaller = c.restrict_zero(&bigger_z);
        for g in small.generators() {
            prop_assert!(c.contains(g).unwrap());
        }
        for g in smaller.generators() {
            prop_assert!(small.contains(g).unwrap());
        }
    }
}

#[test]
fn rescaled_loop_outcome_is_exact() {
    let p = common::load("fig6_rescale").to_pa(ChiMode::WithChiZero);
    let n = p.num_states();
    let id = |x: &str| p.state(x).unwrap();
    let targets: Vec<Point> = dirac_det_tau_targets(&p, id("s"), &cfg()).unwrap().iter().map(|d| d.to_vector(n)).collect();
    let half = SubDistribution::from_pairs([(id("x"), ratio(1, 2)), (id("y"), ratio(1, 2))]).unwrap();
    assert!(in_hull(&targets, &half.to_vector(n)));
    assert!(targets.contains(&half.to_vector(n)));
}
