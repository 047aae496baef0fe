//! Markov automata and probabilistic automata over dense state indices.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num::Signed;

use crate::dist::{StateId, SubDistribution};
use crate::error::ModelError;
use crate::rational::{format_rational, Rational};

/// Reserved token for the internal action.
pub const TAU: &str = "tau";
/// Reserved prefix of timed actions.
pub const CHI_PREFIX: &str = "chi(";

/// Actions ordered as τ, then external actions by name, then χ actions by rate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    External(String),
    Chi(Rational),
}

impl Action {
    pub fn external(name: &str) -> Result<Action, ModelError> {
        if name == TAU || name.starts_with(CHI_PREFIX) {
            return Err(ModelError::ReservedAction(name.to_string()));
        }
        Ok(Action::External(name.to_string()))
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => write!(f, "{TAU}"),
            Action::External(a) => write!(f, "{a}"),
            Action::Chi(r) => write!(f, "chi({})", format_rational(r)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub action: Action,
    pub target: SubDistribution,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedTransition {
    pub rate: Rational,
    pub target: StateId,
}

fn check_names(names: &[String]) -> Result<(), ModelError> {
    if names.is_empty() {
        return Err(ModelError::Empty);
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(ModelError::DuplicateState(n.clone()));
        }
    }
    Ok(())
}

fn check_target(names: &[String], src: StateId, target: &SubDistribution) -> Result<(), ModelError> {
    for t in target.support() {
        if t.0 >= names.len() {
            return Err(ModelError::UnknownState(t.0));
        }
    }
    if !target.is_full() {
        return Err(ModelError::NotADistribution {
            state: names[src.0].clone(),
            mass: target.mass(),
        });
    }
    Ok(())
}

/// Groups (source, transition) pairs per source, sorted and deduplicated.
fn group<T: Ord>(n: usize, items: Vec<(StateId, T)>) -> Result<Vec<Vec<T>>, ModelError> {
    let mut out: Vec<Vec<T>> = (0..n).map(|_| Vec::new()).collect();
    for (s, t) in items {
        out.get_mut(s.0).ok_or(ModelError::UnknownState(s.0))?.push(t);
    }
    for v in &mut out {
        v.sort();
        v.dedup();
    }
    Ok(out)
}

/// Groups timed transitions per source, summing rates to the same target.
fn merge_rates(n: usize, items: Vec<(StateId, TimedTransition)>) -> Result<Vec<Vec<TimedTransition>>, ModelError> {
    let mut out: Vec<Vec<TimedTransition>> = (0..n).map(|_| Vec::new()).collect();
    for (s, t) in items {
        let row = out.get_mut(s.0).ok_or(ModelError::UnknownState(s.0))?;
        match row.iter_mut().find(|x| x.target == t.target) {
            Some(x) => x.rate += t.rate,
            None => row.push(t),
        }
    }
    for v in &mut out {
        v.sort_by_key(|t| t.target);
    }
    Ok(out)
}

fn lookup(names: &[String], name: &str) -> Option<StateId> {
    names.iter().position(|n| n == name).map(StateId)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovAutomaton {
    names: Vec<String>,
    actions: BTreeSet<String>,
    pt: Vec<Vec<Transition>>,
    mt: Vec<Vec<TimedTransition>>,
    initial: StateId,
}

impl MarkovAutomaton {
    /// `actions` lists declared external names; names used by transitions are
    /// added automatically.
    pub fn new(
        names: Vec<String>,
        actions: BTreeSet<String>,
        pt: Vec<(StateId, Transition)>,
        mt: Vec<(StateId, TimedTransition)>,
        initial: StateId,
    ) -> Result<Self, ModelError> {
        check_names(&names)?;
        if initial.0 >= names.len() {
            return Err(ModelError::UnknownState(initial.0));
        }
        let mut actions = actions;
        for a in &actions {
            Action::external(a)?;
        }
        for (s, t) in &pt {
            if s.0 >= names.len() {
                return Err(ModelError::UnknownState(s.0));
            }
            match &t.action {
                Action::Chi(_) => return Err(ModelError::ChiInMarkovAutomaton),
                Action::External(a) => {
                    Action::external(a)?;
                    actions.insert(a.clone());
                }
                Action::Tau => {}
            }
            check_target(&names, *s, &t.target)?;
        }
        for (s, t) in &mt {
            if s.0 >= names.len() {
                return Err(ModelError::UnknownState(s.0));
            }
            if t.target.0 >= names.len() {
                return Err(ModelError::UnknownState(t.target.0));
            }
            if !t.rate.is_positive() {
                return Err(ModelError::NonPositiveRate {
                    state: names[s.0].clone(),
                    rate: t.rate.clone(),
                });
            }
        }
        let n = names.len();
        Ok(Self {
            pt: group(n, pt)?,
            mt: merge_rates(n, mt)?,
            names,
            actions,
            initial,
        })
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len()).map(StateId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        lookup(&self.names, name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn actions(&self) -> &BTreeSet<String> {
        &self.actions
    }

    pub fn probabilistic(&self, s: StateId) -> &[Transition] {
        &self.pt[s.0]
    }

    pub fn timed(&self, s: StateId) -> &[TimedTransition] {
        &self.mt[s.0]
    }

    /// A state is stable iff it has no emanating τ transition.
    pub fn is_stable(&self, s: StateId) -> bool {
        !self.pt[s.0].iter().any(|t| t.action.is_tau())
    }
}

/// A Markov automaton without timed transitions; actions may include χ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbAutomaton {
    names: Vec<String>,
    out: Vec<Vec<Transition>>,
    initial: StateId,
}

impl ProbAutomaton {
    pub fn new(
        names: Vec<String>,
        transitions: Vec<(StateId, Transition)>,
        initial: StateId,
    ) -> Result<Self, ModelError> {
        check_names(&names)?;
        if initial.0 >= names.len() {
            return Err(ModelError::UnknownState(initial.0));
        }
        for (s, t) in &transitions {
            if s.0 >= names.len() {
                return Err(ModelError::UnknownState(s.0));
            }
            if let Action::External(a) = &t.action {
                Action::external(a)?;
            }
            if let Action::Chi(r) = &t.action {
                if r.is_negative() {
                    return Err(ModelError::NonPositiveRate {
                        state: names[s.0].clone(),
                        rate: r.clone(),
                    });
                }
            }
            check_target(&names, *s, &t.target)?;
        }
        let n = names.len();
        Ok(Self {
            out: group(n, transitions)?,
            names,
            initial,
        })
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len()).map(StateId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s.0]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        lookup(&self.names, name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn outgoing(&self, s: StateId) -> &[Transition] {
        &self.out[s.0]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &Transition)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |t| (StateId(i), t)))
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// All actions labelling some transition, plus τ.
    pub fn actions(&self) -> BTreeSet<Action> {
        let mut acts: BTreeSet<Action> = self.transitions().map(|(_, t)| t.action.clone()).collect();
        acts.insert(Action::Tau);
        acts
    }

    pub fn is_stable(&self, s: StateId) -> bool {
        !self.out[s.0].iter().any(|t| t.action.is_tau())
    }

    /// States with a transition whose target has `s` in its support.
    pub fn has_incoming(&self, s: StateId) -> bool {
        self.transitions().any(|(_, t)| t.target.contains(s))
    }

    /// Same automaton with the transitions of `s` replaced.
    pub fn with_outgoing(&self, s: StateId, transitions: Vec<Transition>) -> ProbAutomaton {
        let mut p = self.clone();
        let mut transitions = transitions;
        transitions.sort();
        transitions.dedup();
        p.out[s.0] = transitions;
        p
    }

    pub fn with_initial(&self, s: StateId) -> ProbAutomaton {
        let mut p = self.clone();
        p.initial = s;
        p
    }

    /// Appends a fresh state with the given transitions.
    pub fn with_new_state(&self, name: String, transitions: Vec<Transition>) -> (ProbAutomaton, StateId) {
        let mut p = self.clone();
        let s = StateId(p.names.len());
        p.names.push(name);
        p.out.push(transitions);
        (p, s)
    }

    /// Removes `s`; no remaining transition may target it. Returns the old→new
    /// index map.
    pub fn without_state(&self, s: StateId) -> (ProbAutomaton, Vec<Option<StateId>>) {
        let map: Vec<Option<StateId>> = (0..self.names.len())
            .map(|i| match i.cmp(&s.0) {
                std::cmp::Ordering::Less => Some(StateId(i)),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(StateId(i - 1)),
            })
            .collect();
        let mut names = Vec::new();
        let mut out = Vec::new();
        for (i, ts) in self.out.iter().enumerate() {
            if i == s.0 {
                continue;
            }
            names.push(self.names[i].clone());
            out.push(
                ts.iter()
                    .map(|t| Transition {
                        action: t.action.clone(),
                        target: t
                            .target
                            .remap(|x| map[x.0])
                            .expect("removed state is still targeted"),
                    })
                    .collect(),
            );
        }
        let initial = map[self.initial.0].unwrap_or(StateId(0));
        (ProbAutomaton { names, out, initial }, map)
    }

    /// Disjoint union; states of `other` are offset by `self.num_states()`.
    /// Display names are prefixed when prefixes are given.
    pub fn direct_sum(&self, other: &ProbAutomaton, prefixes: Option<(&str, &str)>) -> ProbAutomaton {
        let offset = self.num_states();
        let rename = |p: &str, n: &str| match prefixes {
            Some(_) => format!("{p}.{n}"),
            None => n.to_string(),
        };
        let (pa, pb) = prefixes.unwrap_or(("", ""));
        let mut names: Vec<String> = self.names.iter().map(|n| rename(pa, n)).collect();
        names.extend(other.names.iter().map(|n| rename(pb, n)));
        let mut out = self.out.clone();
        for ts in &other.out {
            out.push(
                ts.iter()
                    .map(|t| Transition {
                        action: t.action.clone(),
                        target: t.target.remap(|x| Some(StateId(x.0 + offset))).unwrap(),
                    })
                    .collect(),
            );
        }
        ProbAutomaton {
            names,
            out,
            initial: self.initial,
        }
    }

    /// Permutes state indices; `order[new] = old`.
    pub fn reorder(&self, order: &[StateId]) -> ProbAutomaton {
        let mut inverse = vec![StateId(0); order.len()];
        for (new, old) in order.iter().enumerate() {
            inverse[old.0] = StateId(new);
        }
        let names = order.iter().map(|o| self.names[o.0].clone()).collect();
        let out = order
            .iter()
            .map(|o| {
                let mut ts: Vec<Transition> = self.out[o.0]
                    .iter()
                    .map(|t| Transition {
                        action: t.action.clone(),
                        target: t.target.remap(|x| Some(inverse[x.0])).unwrap(),
                    })
                    .collect();
                ts.sort();
                ts
            })
            .collect();
        ProbAutomaton {
            names,
            out,
            initial: inverse[self.initial.0],
        }
    }

    pub fn state_map(&self) -> HashMap<&str, StateId> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), StateId(i)))
            .collect()
    }
}

/// A parsed model: either a Markov automaton or an already-mapped PA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Model {
    Markov(MarkovAutomaton),
    Prob(ProbAutomaton),
}

impl Model {
    pub fn names(&self) -> &[String] {
        match self {
            Model::Markov(m) => m.names(),
            Model::Prob(p) => p.names(),
        }
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        lookup(self.names(), name)
    }

    pub fn initial(&self) -> StateId {
        match self {
            Model::Markov(m) => m.initial(),
            Model::Prob(p) => p.initial(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn tr(action: Action, target: SubDistribution) -> Transition {
        Transition { action, target }
    }

    #[test]
    fn stability() {
        let m = MarkovAutomaton::new(
            names(&["s", "t", "u", "v"]),
            BTreeSet::new(),
            vec![
                (StateId(1), tr(Action::Tau, SubDistribution::dirac(StateId(1)))),
                (StateId(2), tr(Action::external("a").unwrap(), SubDistribution::dirac(StateId(0)))),
            ],
            vec![(StateId(0), TimedTransition { rate: int(2), target: StateId(1) })],
            StateId(0),
        )
        .unwrap();
        assert!(m.is_stable(StateId(0)));
        assert!(!m.is_stable(StateId(1)));
        assert!(m.is_stable(StateId(2)));
        assert!(m.actions().contains("a"));
    }

    #[test]
    fn rejects_bad_models() {
        let half = SubDistribution::dirac(StateId(0)).scale(&ratio(1, 2)).unwrap();
        let err = ProbAutomaton::new(names(&["s"]), vec![(StateId(0), tr(Action::Tau, half))], StateId(0));
        assert!(matches!(err, Err(ModelError::NotADistribution { .. })));

        let err = MarkovAutomaton::new(
            names(&["s"]),
            BTreeSet::new(),
            vec![],
            vec![(StateId(0), TimedTransition { rate: int(0), target: StateId(0) })],
            StateId(0),
        );
        assert!(matches!(err, Err(ModelError::NonPositiveRate { .. })));

        assert!(matches!(Action::external("tau"), Err(ModelError::ReservedAction(_))));
        assert!(matches!(Action::external("chi(1)"), Err(ModelError::ReservedAction(_))));
        assert!(matches!(
            ProbAutomaton::new(names(&["s", "s"]), vec![], StateId(0)),
            Err(ModelError::DuplicateState(_))
        ));
    }

    #[test]
    fn parallel_rates_add_up() {
        let m = MarkovAutomaton::new(
            names(&["s", "t"]),
            BTreeSet::new(),
            vec![],
            vec![
                (StateId(0), TimedTransition { rate: int(2), target: StateId(1) }),
                (StateId(0), TimedTransition { rate: int(2), target: StateId(1) }),
            ],
            StateId(0),
        )
        .unwrap();
        assert_eq!(m.timed(StateId(0)), &[TimedTransition { rate: int(4), target: StateId(1) }]);
    }

    #[test]
    fn action_order() {
        let mut acts = vec![
            Action::Chi(int(0)),
            Action::External("b".into()),
            Action::Tau,
            Action::External("a".into()),
        ];
        acts.sort();
        assert_eq!(
            acts,
            vec![
                Action::Tau,
                Action::External("a".into()),
                Action::External("b".into()),
                Action::Chi(int(0))
            ]
        );
    }

    #[test]
    fn remove_state_reindexes() {
        let p = ProbAutomaton::new(
            names(&["a", "b", "c"]),
            vec![(StateId(0), tr(Action::Tau, SubDistribution::dirac(StateId(2))))],
            StateId(2),
        )
        .unwrap();
        let (q, map) = p.without_state(StateId(1));
        assert_eq!(q.names(), &names(&["a", "c"])[..]);
        assert_eq!(map, vec![Some(StateId(0)), None, Some(StateId(1))]);
        assert_eq!(q.initial(), StateId(1));
        assert!(q.outgoing(StateId(0))[0].target.is_dirac(StateId(1)));
    }
}
