//! Mapping from Markov automata to probabilistic automata with χ actions,
//! and interleaving parallel composition.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use log::warn;
use num::Zero;

use crate::dist::{StateId, SubDistribution};
use crate::model::{Action, MarkovAutomaton, Model, ProbAutomaton, TimedTransition, Transition};
use crate::rational::Rational;

/// Whether stable states with exit rate 0 receive a `χ(0)` self-loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChiMode {
    #[default]
    WithChiZero,
    /// Omits `χ(0)`; only useful to reproduce the congruence failure it causes.
    LegacyNoChiZero,
}

pub fn rate_between(m: &MarkovAutomaton, s: StateId, t: StateId) -> Rational {
    m.timed(s)
        .iter()
        .filter(|tt| tt.target == t)
        .map(|tt| &tt.rate)
        .sum()
}

pub fn exit_rate(m: &MarkovAutomaton, s: StateId) -> Rational {
    m.timed(s).iter().map(|tt| &tt.rate).sum()
}

/// Normalized rate vector, or `Δ_s` when the exit rate is zero.
pub fn successor_distribution(m: &MarkovAutomaton, s: StateId) -> SubDistribution {
    let total = exit_rate(m, s);
    if total.is_zero() {
        return SubDistribution::dirac(s);
    }
    SubDistribution::from_pairs(m.timed(s).iter().map(|tt| (tt.target, &tt.rate / &total)))
        .expect("normalized rates form a distribution")
}

fn emits_chi(m: &MarkovAutomaton, s: StateId, mode: ChiMode) -> bool {
    m.is_stable(s) && (mode == ChiMode::WithChiZero || !exit_rate(m, s).is_zero())
}

/// The χ actions the mapping emits for `m` under `mode`.
pub fn chi_action_set(m: &MarkovAutomaton, mode: ChiMode) -> BTreeSet<Action> {
    m.states()
        .filter(|s| emits_chi(m, *s, mode))
        .map(|s| Action::Chi(exit_rate(m, s)))
        .collect()
}

/// Keeps every probabilistic transition and gives each stable state one
/// `χ(rate(s))` transition to its successor distribution. Timed transitions of
/// unstable states are dropped (maximal progress).
pub fn ma_to_pa(m: &MarkovAutomaton, mode: ChiMode) -> ProbAutomaton {
    let mut transitions = Vec::new();
    for s in m.states() {
        for t in m.probabilistic(s) {
            transitions.push((s, t.clone()));
        }
        if emits_chi(m, s, mode) {
            transitions.push((
                s,
                Transition {
                    action: Action::Chi(exit_rate(m, s)),
                    target: successor_distribution(m, s),
                },
            ));
        }
    }
    ProbAutomaton::new(m.names().to_vec(), transitions, m.initial())
        .expect("mapping preserves well-formedness")
}

impl Model {
    /// PA view of the model; PA inputs are taken as already mapped.
    pub fn to_pa(&self, mode: ChiMode) -> ProbAutomaton {
        match self {
            Model::Markov(m) => ma_to_pa(m, mode),
            Model::Prob(p) => p.clone(),
        }
    }
}

/// Unsynchronised parallel composition: every action interleaves, including
/// shared external names. Only pairs reachable from the initial pair are kept.
pub fn parallel_compose(a: &MarkovAutomaton, b: &MarkovAutomaton) -> MarkovAutomaton {
    let shared: Vec<&String> = a.actions().intersection(b.actions()).collect();
    if !shared.is_empty() {
        warn!("composed automata share actions {shared:?}; they are interleaved, not synchronised");
    }

    let mut index: BTreeMap<(StateId, StateId), StateId> = BTreeMap::new();
    let mut order: Vec<(StateId, StateId)> = Vec::new();
    let mut queue = VecDeque::new();
    let start = (a.initial(), b.initial());
    index.insert(start, StateId(0));
    order.push(start);
    queue.push_back(start);

    let intern = |pair: (StateId, StateId),
                      index: &mut BTreeMap<(StateId, StateId), StateId>,
                      order: &mut Vec<(StateId, StateId)>,
                      queue: &mut VecDeque<(StateId, StateId)>| {
        *index.entry(pair).or_insert_with(|| {
            order.push(pair);
            queue.push_back(pair);
            StateId(order.len() - 1)
        })
    };

    let mut pt = Vec::new();
    let mut mt = Vec::new();
    while let Some((s, t)) = queue.pop_front() {
        let src = index[&(s, t)];
        for tr in a.probabilistic(s) {
            let mut pairs = Vec::new();
            for (x, m) in tr.target.iter() {
                pairs.push((intern((x, t), &mut index, &mut order, &mut queue), m.clone()));
            }
            let target = SubDistribution::from_pairs(pairs).unwrap();
            pt.push((src, Transition { action: tr.action.clone(), target }));
        }
        for tr in b.probabilistic(t) {
            let mut pairs = Vec::new();
            for (y, m) in tr.target.iter() {
                pairs.push((intern((s, y), &mut index, &mut order, &mut queue), m.clone()));
            }
            let target = SubDistribution::from_pairs(pairs).unwrap();
            pt.push((src, Transition { action: tr.action.clone(), target }));
        }
        for tt in a.timed(s) {
            let target = intern((tt.target, t), &mut index, &mut order, &mut queue);
            mt.push((src, TimedTransition { rate: tt.rate.clone(), target }));
        }
        for tt in b.timed(t) {
            let target = intern((s, tt.target), &mut index, &mut order, &mut queue);
            mt.push((src, TimedTransition { rate: tt.rate.clone(), target }));
        }
    }

    let names = order
        .iter()
        .map(|(s, t)| format!("{}|{}", a.name(*s), b.name(*t)))
        .collect();
    let actions = a.actions().union(b.actions()).cloned().collect();
    MarkovAutomaton::new(names, actions, pt, mt, StateId(0)).expect("composition is well-formed")
}
