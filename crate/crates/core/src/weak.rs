//! Weak (combined) transitions via Dirac determinate schedulers.
//!
//! A scheduler fixes, for every phase-state it can reach, either `Stop` or one
//! emanating transition. Under a fixed scheduler the automaton becomes a
//! finite Markov chain over phase-states, and the induced distribution is its
//! absorption distribution, solved exactly. Loops therefore need no unfolding.
//! Combined transitions are the convex hulls of these outcomes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{One, Zero};

use crate::dist::{StateId, SubDistribution};
use crate::error::WeakError;
use crate::model::{Action, ProbAutomaton};
use crate::polytope::hull_reduce;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    BeforeLabel,
    AfterLabel,
}

/// `Tau` is the hatted weak τ transition (zero steps allowed); `Visible(α)`
/// requires exactly one α on every path.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WeakLabel {
    Tau,
    Visible(Action),
}

impl WeakLabel {
    pub fn of(action: &Action) -> WeakLabel {
        match action {
            Action::Tau => WeakLabel::Tau,
            a => WeakLabel::Visible(a.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    Stop,
    /// Index into `p.outgoing(state)`.
    Fire(usize),
}

pub type PhaseState = (StateId, Phase);

/// Memoryless, non-randomized resolution of nondeterminism.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DiracScheduler {
    choice: BTreeMap<PhaseState, Choice>,
}

impl DiracScheduler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, s: StateId, phase: Phase, c: Choice) -> Self {
        self.choice.insert((s, phase), c);
        self
    }

    pub fn set(&mut self, s: StateId, phase: Phase, c: Choice) {
        self.choice.insert((s, phase), c);
    }

    pub fn get(&self, s: StateId, phase: Phase) -> Option<Choice> {
        self.choice.get(&(s, phase)).copied()
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Distribution(SubDistribution),
    /// Some mass is never absorbed (a bottom component without `Stop`).
    Divergent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WeakConfig {
    /// Upper bound on the number of complete schedulers enumerated per call.
    pub scheduler_limit: Option<usize>,
}

fn legal_choices(p: &ProbAutomaton, s: StateId, phase: Phase, label: &WeakLabel) -> Vec<Choice> {
    let mut out = Vec::new();
    let stop_allowed = match label {
        WeakLabel::Tau => true,
        WeakLabel::Visible(_) => phase == Phase::AfterLabel,
    };
    if stop_allowed {
        out.push(Choice::Stop);
    }
    for (i, t) in p.outgoing(s).iter().enumerate() {
        let ok = match (&t.action, label, phase) {
            (Action::Tau, _, _) => true,
            (a, WeakLabel::Visible(alpha), Phase::BeforeLabel) => a == alpha,
            _ => false,
        };
        if ok {
            out.push(Choice::Fire(i));
        }
    }
    out
}

fn next_phase(p: &ProbAutomaton, s: StateId, phase: Phase, i: usize) -> Phase {
    if p.outgoing(s)[i].action.is_tau() {
        phase
    } else {
        Phase::AfterLabel
    }
}

/// Absorption distribution of the chain induced by `sched` from
/// `(root, BeforeLabel)`.
pub fn scheduler_outcome(
    p: &ProbAutomaton,
    root: StateId,
    label: &WeakLabel,
    sched: &DiracScheduler,
) -> Result<Outcome, WeakError> {
    // Collect reachable phase-states and validate choices on the way.
    let start = (root, Phase::BeforeLabel);
    let mut order: Vec<PhaseState> = vec![start];
    let mut index: HashMap<PhaseState, usize> = HashMap::from([(start, 0)]);
    let mut k = 0;
    while k < order.len() {
        let (s, phase) = order[k];
        k += 1;
        if *label == WeakLabel::Tau && phase == Phase::AfterLabel {
            return Err(WeakError::IllFormedScheduler("after-label phase under a τ label".into()));
        }
        let c = sched.get(s, phase).ok_or_else(|| {
            WeakError::IllFormedScheduler(format!("no choice for reachable state {s} in {phase:?}"))
        })?;
        if !legal_choices(p, s, phase, label).contains(&c) {
            return Err(WeakError::IllFormedScheduler(format!(
                "choice {c:?} at {s} in {phase:?} violates the label discipline"
            )));
        }
        if let Choice::Fire(i) = c {
            let np = next_phase(p, s, phase, i);
            for t in p.outgoing(s)[i].target.support() {
                index.entry((t, np)).or_insert_with(|| {
                    order.push((t, np));
                    order.len() - 1
                });
            }
        }
    }
    Ok(absorb(p, &order, &index, sched))
}

fn absorb(
    p: &ProbAutomaton,
    order: &[PhaseState],
    index: &HashMap<PhaseState, usize>,
    sched: &DiracScheduler,
) -> Outcome {
    let n = order.len();
    let choice: Vec<Choice> = order.iter().map(|(s, ph)| sched.get(*s, *ph).unwrap()).collect();
    if choice[0] == Choice::Stop {
        return Outcome::Distribution(SubDistribution::dirac(order[0].0));
    }

    // Successor lists of firing nodes.
    let succ: Vec<Vec<(usize, Rational)>> = (0..n)
        .map(|k| match choice[k] {
            Choice::Stop => Vec::new(),
            Choice::Fire(i) => {
                let (s, ph) = order[k];
                let np = next_phase(p, s, ph, i);
                p.outgoing(s)[i]
                    .target
                    .iter()
                    .map(|(t, m)| (index[&(t, np)], m.clone()))
                    .collect()
            }
        })
        .collect();

    // Firing nodes that can reach a stop node; the rest absorb nothing.
    let mut reaches = vec![false; n];
    for k in 0..n {
        reaches[k] = choice[k] == Choice::Stop;
    }
    loop {
        let mut changed = false;
        for k in 0..n {
            if !reaches[k] && succ[k].iter().any(|(j, _)| reaches[*j]) {
                reaches[k] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !reaches[0] {
        return Outcome::Divergent;
    }

    let transient: Vec<usize> = (0..n).filter(|&k| reaches[k] && choice[k] != Choice::Stop).collect();
    let stops: Vec<usize> = (0..n).filter(|&k| choice[k] == Choice::Stop).collect();
    let tpos: HashMap<usize, usize> = transient.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let spos: HashMap<usize, usize> = stops.iter().enumerate().map(|(i, k)| (*k, i)).collect();

    // (I - Q) X = R, augmented as [I - Q | R].
    let t = transient.len();
    let width = t + stops.len();
    let mut mat: Vec<Vec<Rational>> = vec![vec![Rational::zero(); width]; t];
    for (row, &k) in transient.iter().enumerate() {
        mat[row][row] += Rational::one();
        for (j, m) in &succ[k] {
            if let Some(&c) = tpos.get(j) {
                mat[row][c] -= m;
            } else if let Some(&c) = spos.get(j) {
                mat[row][t + c] += m;
            }
        }
    }
    let solved = gauss_jordan(mat, t);
    let root_row = &solved[tpos[&0]];
    let mut pairs = Vec::new();
    for (i, &k) in stops.iter().enumerate() {
        let v = &root_row[t + i];
        if !v.is_zero() {
            pairs.push((order[k].0, v.clone()));
        }
    }
    let d = SubDistribution::from_pairs(pairs).expect("absorption probabilities are a subdistribution");
    if d.is_full() {
        Outcome::Distribution(d)
    } else {
        Outcome::Divergent
    }
}

/// Reduces `[A | B]` with nonsingular square `A` (first `n` columns) to
/// `[I | A⁻¹B]`.
fn gauss_jordan(mut m: Vec<Vec<Rational>>, n: usize) -> Vec<Vec<Rational>> {
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("absorption system is nonsingular");
        m.swap(col, piv);
        let p = m[col][col].clone();
        if !p.is_one() {
            for v in m[col].iter_mut() {
                *v /= &p;
            }
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
    }
    m
}

struct Enumeration<'a> {
    p: &'a ProbAutomaton,
    root: StateId,
    label: &'a WeakLabel,
    limit: Option<usize>,
    count: usize,
}

impl Enumeration<'_> {
    /// Depth-first over choices at reachable phase-states only, lowest
    /// undecided phase-state first. Branches that reach a phase-state with no
    /// legal choice cannot yield a full distribution and are cut.
    fn run<F>(&mut self, sched: &mut DiracScheduler, frontier: BTreeSet<PhaseState>, visit: &mut F) -> Result<(), WeakError>
    where
        F: FnMut(&DiracScheduler) -> Result<(), WeakError>,
    {
        let mut frontier = frontier;
        let Some(next) = frontier.pop_first() else {
            self.count += 1;
            if let Some(limit) = self.limit {
                if self.count > limit {
                    return Err(WeakError::SchedulerLimit(limit));
                }
            }
            return visit(sched);
        };
        let (s, phase) = next;
        for c in legal_choices(self.p, s, phase, self.label) {
            sched.set(s, phase, c);
            let mut f = frontier.clone();
            if let Choice::Fire(i) = c {
                let np = next_phase(self.p, s, phase, i);
                for t in self.p.outgoing(s)[i].target.support() {
                    if sched.get(t, np).is_none() {
                        f.insert((t, np));
                    }
                }
            }
            self.run(sched, f, visit)?;
            sched.choice.remove(&next);
        }
        Ok(())
    }
}

/// Calls `visit` for every well-formed Dirac scheduler rooted at `root`, in
/// deterministic construction order.
pub fn for_each_scheduler<F>(
    p: &ProbAutomaton,
    root: StateId,
    label: &WeakLabel,
    cfg: &WeakConfig,
    mut visit: F,
) -> Result<(), WeakError>
where
    F: FnMut(&DiracScheduler) -> Result<(), WeakError>,
{
    let mut e = Enumeration {
        p,
        root,
        label,
        limit: cfg.scheduler_limit,
        count: 0,
    };
    let frontier = BTreeSet::from([(e.root, Phase::BeforeLabel)]);
    e.run(&mut DiracScheduler::new(), frontier, &mut visit)
}

/// All non-divergent scheduler outcomes, deduplicated, in construction order.
pub fn scheduler_outcomes(
    p: &ProbAutomaton,
    s: StateId,
    label: &WeakLabel,
    cfg: &WeakConfig,
) -> Result<Vec<SubDistribution>, WeakError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for_each_scheduler(p, s, label, cfg, |sched| {
        if let Outcome::Distribution(d) = scheduler_outcome(p, s, label, sched)? {
            if seen.insert(d.clone()) {
                out.push(d);
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// `DiracDet(s, τ)`: every Dirac determinate weak τ outcome, not hull-reduced.
pub fn dirac_det_tau_targets(p: &ProbAutomaton, s: StateId, cfg: &WeakConfig) -> Result<Vec<SubDistribution>, WeakError> {
    scheduler_outcomes(p, s, &WeakLabel::Tau, cfg)
}

fn reduce(n: usize, dists: Vec<SubDistribution>) -> Vec<SubDistribution> {
    let points = dists.iter().map(|d| d.to_vector(n)).collect();
    hull_reduce(n, points)
        .expect("outcomes share the state dimension")
        .generators()
        .iter()
        .map(|v| SubDistribution::from_vector(v))
        .collect()
}

/// Generators of `S(s, α)`: extreme points of the weak combined α transitions
/// from `s`.
pub fn generator_set(p: &ProbAutomaton, s: StateId, alpha: &Action, cfg: &WeakConfig) -> Result<Vec<SubDistribution>, WeakError> {
    let outcomes = scheduler_outcomes(p, s, &WeakLabel::of(alpha), cfg)?;
    Ok(reduce(p.num_states(), outcomes))
}

/// Generators of the weak α transitions of a subdistribution: the weighted
/// Minkowski sum of the per-state generator sets.
pub fn lift_weak(p: &ProbAutomaton, mu: &SubDistribution, alpha: &Action, cfg: &WeakConfig) -> Result<Vec<SubDistribution>, WeakError> {
    let mut acc: Vec<SubDistribution> = vec![SubDistribution::empty()];
    for (s, w) in mu.iter() {
        let gens = generator_set(p, s, alpha, cfg)?;
        let mut next = Vec::new();
        for a in &acc {
            for g in &gens {
                let scaled = g.scale(w).expect("weight is at most one");
                next.push(a.sum(&scaled).expect("weights sum to |μ|"));
            }
        }
        acc = next;
        if acc.is_empty() {
            return Ok(acc);
        }
    }
    Ok(reduce(p.num_states(), acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Transition;
    use crate::rational::{int, ratio};

    fn pa(names: &[&str], ts: Vec<(usize, Action, Vec<(usize, Rational)>)>) -> ProbAutomaton {
        ProbAutomaton::new(
            names.iter().map(|s| s.to_string()).collect(),
            ts.into_iter()
                .map(|(s, a, d)| {
                    (
                        StateId(s),
                        Transition {
                            action: a,
                            target: SubDistribution::from_pairs(d.into_iter().map(|(t, m)| (StateId(t), m))).unwrap(),
                        },
                    )
                })
                .collect(),
            StateId(0),
        )
        .unwrap()
    }

    fn dist(pairs: &[(usize, Rational)]) -> SubDistribution {
        SubDistribution::from_pairs(pairs.iter().map(|(s, m)| (StateId(*s), m.clone()))).unwrap()
    }

    fn b() -> Action {
        Action::External("b".into())
    }

    #[test]
    fn stop_at_root_is_dirac() {
        let p = pa(&["s"], vec![]);
        let sched = DiracScheduler::new().with(StateId(0), Phase::BeforeLabel, Choice::Stop);
        assert_eq!(
            scheduler_outcome(&p, StateId(0), &WeakLabel::Tau, &sched).unwrap(),
            Outcome::Distribution(SubDistribution::dirac(StateId(0)))
        );
    }

    #[test]
    fn pure_self_loop_diverges() {
        let p = pa(&["s"], vec![(0, Action::Tau, vec![(0, int(1))])]);
        let sched = DiracScheduler::new().with(StateId(0), Phase::BeforeLabel, Choice::Fire(0));
        assert_eq!(
            scheduler_outcome(&p, StateId(0), &WeakLabel::Tau, &sched).unwrap(),
            Outcome::Divergent
        );
    }

    #[test]
    fn ill_formed_schedulers_are_rejected() {
        let p = pa(&["s", "t"], vec![(0, b(), vec![(1, int(1))])]);
        // b fired under a τ label
        let sched = DiracScheduler::new().with(StateId(0), Phase::BeforeLabel, Choice::Fire(0));
        assert!(matches!(
            scheduler_outcome(&p, StateId(0), &WeakLabel::Tau, &sched),
            Err(WeakError::IllFormedScheduler(_))
        ));
        // missing choice at a reachable phase-state
        assert!(matches!(
            scheduler_outcome(&p, StateId(0), &WeakLabel::Visible(b()), &sched),
            Err(WeakError::IllFormedScheduler(_))
        ));
        // stopping before the label
        let stop = DiracScheduler::new().with(StateId(0), Phase::BeforeLabel, Choice::Stop);
        assert!(matches!(
            scheduler_outcome(&p, StateId(0), &WeakLabel::Visible(b()), &stop),
            Err(WeakError::IllFormedScheduler(_))
        ));
    }

    #[test]
    fn generator_sets_of_trivial_states() {
        let p = pa(&["s", "t"], vec![]);
        assert_eq!(
            generator_set(&p, StateId(0), &Action::Tau, &WeakConfig::default()).unwrap(),
            vec![SubDistribution::dirac(StateId(0))]
        );
        assert!(generator_set(&p, StateId(0), &b(), &WeakConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn dirac_det_single_tau_step() {
        let p = pa(&["s", "t"], vec![(0, Action::Tau, vec![(1, int(1))])]);
        assert_eq!(
            dirac_det_tau_targets(&p, StateId(0), &WeakConfig::default()).unwrap(),
            vec![SubDistribution::dirac(StateId(0)), SubDistribution::dirac(StateId(1))]
        );
        let q = pa(&["s"], vec![]);
        assert_eq!(
            dirac_det_tau_targets(&q, StateId(0), &WeakConfig::default()).unwrap(),
            vec![SubDistribution::dirac(StateId(0))]
        );
    }

    #[test]
    fn visible_step_with_tau_prefix_and_suffix() {
        // s -τ-> t -b-> u -τ-> v
        let p = pa(
            &["s", "t", "u", "v"],
            vec![
                (0, Action::Tau, vec![(1, int(1))]),
                (1, b(), vec![(2, int(1))]),
                (2, Action::Tau, vec![(3, int(1))]),
            ],
        );
        let gens = scheduler_outcomes(&p, StateId(0), &WeakLabel::Visible(b()), &WeakConfig::default()).unwrap();
        assert_eq!(gens, vec![SubDistribution::dirac(StateId(2)), SubDistribution::dirac(StateId(3))]);
    }

    #[test]
    fn lifting_to_subdistributions() {
        // x -τ-> z, y has nothing
        let p = pa(&["x", "y", "z"], vec![(0, Action::Tau, vec![(2, int(1))])]);
        let mu = dist(&[(0, ratio(1, 2)), (1, ratio(1, 2))]);
        let mut gens = lift_weak(&p, &mu, &Action::Tau, &WeakConfig::default()).unwrap();
        gens.sort();
        let mut expected = vec![mu.clone(), dist(&[(2, ratio(1, 2)), (1, ratio(1, 2))])];
        expected.sort();
        assert_eq!(gens, expected);

        let single = lift_weak(&p, &SubDistribution::dirac(StateId(0)), &Action::Tau, &WeakConfig::default()).unwrap();
        assert_eq!(single, generator_set(&p, StateId(0), &Action::Tau, &WeakConfig::default()).unwrap());

        let q = pa(&["x", "y"], vec![]);
        assert_eq!(lift_weak(&q, &mu, &Action::Tau, &WeakConfig::default()).unwrap(), vec![mu]);
    }

    #[test]
    fn scheduler_limit_is_enforced() {
        let p = pa(
            &["s", "t", "u"],
            vec![
                (0, Action::Tau, vec![(1, int(1))]),
                (0, Action::Tau, vec![(2, int(1))]),
            ],
        );
        let cfg = WeakConfig { scheduler_limit: Some(2) };
        assert_eq!(
            dirac_det_tau_targets(&p, StateId(0), &cfg),
            Err(WeakError::SchedulerLimit(2))
        );
    }
}
