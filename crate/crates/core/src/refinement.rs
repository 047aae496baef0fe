//! Partition refinement for weak and naive weak bisimulation.
//!
//! Each round first settles which states are tangible and which carry a
//! vanishing representation under the current partition, then looks for a
//! block whose members have different restricted, quotiented weak transition
//! sets for some action, and splits it.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::Instant;

use log::{debug, warn};
use num::{One, Zero};

use crate::chi::ChiMode;
use crate::dist::{StateId, SubDistribution};
use crate::error::WeakError;
use crate::model::{Action, Model, ProbAutomaton, Transition};
use crate::partition::Partition;
use crate::polytope::{ConvexSet, Point};
use crate::weak::{dirac_det_tau_targets, generator_set, WeakConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Semantics {
    #[default]
    Weak,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub semantics: Semantics,
    pub chi_mode: ChiMode,
    pub preprocess: bool,
    pub scheduler_limit: Option<usize>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            semantics: Semantics::Weak,
            chi_mode: ChiMode::WithChiZero,
            preprocess: true,
            scheduler_limit: None,
        }
    }
}

impl DecideOptions {
    pub fn naive() -> Self {
        DecideOptions {
            semantics: Semantics::Naive,
            ..Self::default()
        }
    }

    fn weak_config(&self) -> WeakConfig {
        WeakConfig {
            scheduler_limit: self.scheduler_limit,
        }
    }
}

/// Evidence that block `block` must be split: the witnesses have different
/// sets for `action`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitter {
    pub block: usize,
    pub action: Action,
    pub witness: (StateId, StateId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementState {
    pub partition: Partition,
    pub tangible: BTreeSet<StateId>,
    pub vanishing: BTreeMap<StateId, SubDistribution>,
}

impl RefinementState {
    /// Coordinates zeroed by the restriction.
    pub fn restriction(&self) -> BTreeSet<usize> {
        self.vanishing.keys().map(|s| s.0).collect()
    }
}

/// Snapshot of one refinement round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub state: RefinementState,
    pub splitter: Option<Splitter>,
}

#[derive(Clone, Debug)]
pub struct DecisionReport {
    pub semantics: Semantics,
    /// The automaton that was refined (after preprocessing).
    pub automaton: ProbAutomaton,
    pub left: StateId,
    pub right: StateId,
    pub verdict: bool,
    pub partition: Partition,
    pub tangible: BTreeSet<StateId>,
    pub vanishing: BTreeMap<StateId, SubDistribution>,
    pub rounds: usize,
    pub history: Vec<Round>,
    pub elapsed_ms: f64,
}

impl DecisionReport {
    pub fn same_class(&self, a: &str, b: &str) -> Option<bool> {
        let (a, b) = (self.automaton.state(a)?, self.automaton.state(b)?);
        Some(self.partition.same_block(a, b))
    }

    pub fn partition_names(&self) -> Vec<Vec<String>> {
        let mut blocks: Vec<Vec<String>> = self
            .partition
            .blocks()
            .iter()
            .map(|b| b.iter().map(|s| self.automaton.name(*s).to_string()).collect())
            .collect();
        for b in &mut blocks {
            b.sort();
        }
        blocks.sort();
        blocks
    }

    pub fn tangible_names(&self) -> BTreeSet<String> {
        self.tangible.iter().map(|s| self.automaton.name(*s).to_string()).collect()
    }

    pub fn vanishing_names(&self) -> BTreeMap<String, String> {
        self.vanishing
            .iter()
            .map(|(s, nu)| {
                (
                    self.automaton.name(*s).to_string(),
                    nu.format_with(|x| self.automaton.name(x).to_string()),
                )
            })
            .collect()
    }
}

/// `P_(s,ν)`: every transition of `s` replaced by the single `(s, τ, ν)`.
/// The state keeps its index so coordinates stay aligned.
pub fn modified_automaton(p: &ProbAutomaton, s: StateId, nu: &SubDistribution) -> ProbAutomaton {
    p.with_outgoing(
        s,
        vec![Transition {
            action: Action::Tau,
            target: nu.clone(),
        }],
    )
}

/// Lazily computed generator sets, as dense vectors over the state space.
pub struct SetCache<'a> {
    p: &'a ProbAutomaton,
    cfg: WeakConfig,
    actions: Vec<Action>,
    base: HashMap<(StateId, Action), Vec<Point>>,
    modified: HashMap<(StateId, SubDistribution, Action), Vec<Point>>,
    tau_targets: HashMap<StateId, Vec<SubDistribution>>,
}

impl<'a> SetCache<'a> {
    pub fn new(p: &'a ProbAutomaton, cfg: WeakConfig) -> Self {
        SetCache {
            p,
            cfg,
            actions: p.actions().into_iter().collect(),
            base: HashMap::new(),
            modified: HashMap::new(),
            tau_targets: HashMap::new(),
        }
    }

    pub fn automaton(&self) -> &ProbAutomaton {
        self.p
    }

    /// The action alphabet in iteration order: τ, external names, χ by rate.
    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    fn vectors(n: usize, gens: Vec<SubDistribution>) -> Vec<Point> {
        gens.iter().map(|d| d.to_vector(n)).collect()
    }

    /// Generators of `S(s, α)`.
    pub fn base(&mut self, s: StateId, a: &Action) -> Result<&[Point], WeakError> {
        let key = (s, a.clone());
        if !self.base.contains_key(&key) {
            let gens = generator_set(self.p, s, a, &self.cfg)?;
            self.base.insert(key.clone(), Self::vectors(self.p.num_states(), gens));
        }
        Ok(&self.base[&key])
    }

    /// Generators of `S_ν(s, α)`, computed in `P_(s,ν)`.
    pub fn modified(&mut self, s: StateId, nu: &SubDistribution, a: &Action) -> Result<&[Point], WeakError> {
        let key = (s, nu.clone(), a.clone());
        if !self.modified.contains_key(&key) {
            let q = modified_automaton(self.p, s, nu);
            let gens = generator_set(&q, s, a, &self.cfg)?;
            self.modified.insert(key.clone(), Self::vectors(self.p.num_states(), gens));
        }
        Ok(&self.modified[&key])
    }

    /// Vanishing-representation candidates of `s`, in scheduler construction
    /// order.
    pub fn tau_targets(&mut self, s: StateId) -> Result<&[SubDistribution], WeakError> {
        if !self.tau_targets.contains_key(&s) {
            let t = dirac_det_tau_targets(self.p, s, &self.cfg)?;
            self.tau_targets.insert(s, t);
        }
        Ok(&self.tau_targets[&s])
    }
}

/// `(C|_R)/W` in canonical form (sorted extreme points).
pub fn restricted_quotient(dim: usize, gens: &[Point], zero: &BTreeSet<usize>, part: &Partition) -> Vec<Point> {
    ConvexSet::from_generators(dim, gens.to_vec())
        .expect("generators have the state dimension")
        .restrict_zero(zero)
        .quotient_project(part)
        .generators()
        .to_vec()
}

fn leaves_class(part: &Partition, s: StateId, nu: &SubDistribution) -> bool {
    nu.support().any(|x| !part.same_block(x, s))
}

/// Whether `ν` passes the set comparison for every action.
fn representation_valid(
    cache: &mut SetCache,
    part: &Partition,
    zero: &BTreeSet<usize>,
    s: StateId,
    nu: &SubDistribution,
) -> Result<bool, WeakError> {
    let n = cache.automaton().num_states();
    for a in cache.actions().to_vec() {
        let orig = restricted_quotient(n, cache.base(s, &a)?, zero, part);
        let modi = restricted_quotient(n, cache.modified(s, nu, &a)?, zero, part);
        if orig != modi {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first candidate in `DiracDet(s, τ)` that leaves the class of `s` and
/// leaves every restricted, quotiented set of `s` unchanged.
pub fn find_vanishing_representation(
    cache: &mut SetCache,
    part: &Partition,
    zero: &BTreeSet<usize>,
    s: StateId,
) -> Result<Option<SubDistribution>, WeakError> {
    let candidates: Vec<SubDistribution> = cache
        .tau_targets(s)?
        .iter()
        .filter(|nu| leaves_class(part, s, nu))
        .cloned()
        .collect();
    for nu in candidates {
        if representation_valid(cache, part, zero, s, &nu)? {
            return Ok(Some(nu));
        }
    }
    Ok(None)
}

/// Settles tangible and vanishing states for a fixed partition. The
/// restriction zeroes the coordinates of the vanishing states found so far.
pub fn tangible_fixpoint(
    cache: &mut SetCache,
    part: &Partition,
    always_tangible: &BTreeSet<StateId>,
) -> Result<RefinementState, WeakError> {
    let n = cache.automaton().num_states();
    let mut tangible = always_tangible.clone();
    let mut vanishing: BTreeMap<StateId, SubDistribution> = BTreeMap::new();
    let mut seen: HashSet<(BTreeSet<StateId>, BTreeSet<StateId>)> = HashSet::new();
    loop {
        let before = (tangible.clone(), vanishing.keys().copied().collect::<BTreeSet<_>>());

        let dom: BTreeSet<usize> = vanishing.keys().map(|s| s.0).collect();
        let mut demoted = Vec::new();
        for (s, nu) in &vanishing {
            let mut zero = dom.clone();
            zero.remove(&s.0);
            if !leaves_class(part, *s, nu) || !representation_valid(cache, part, &zero, *s, nu)? {
                demoted.push(*s);
            }
        }
        for s in demoted {
            debug!("representation of {s} no longer valid");
            vanishing.remove(&s);
        }

        for i in 0..n {
            let s = StateId(i);
            if tangible.contains(&s) || vanishing.contains_key(&s) {
                continue;
            }
            let zero: BTreeSet<usize> = vanishing.keys().map(|s| s.0).collect();
            match find_vanishing_representation(cache, part, &zero, s)? {
                Some(nu) => {
                    vanishing.insert(s, nu);
                }
                None => {
                    tangible.insert(s);
                }
            }
        }

        let after = (tangible.clone(), vanishing.keys().copied().collect::<BTreeSet<_>>());
        if after == before {
            break;
        }
        if !seen.insert(after) {
            warn!("tangible fixpoint revisited a configuration; stopping");
            break;
        }
    }
    Ok(RefinementState {
        partition: part.clone(),
        tangible,
        vanishing,
    })
}

fn state_key(cache: &mut SetCache, rs: &RefinementState, zero: &BTreeSet<usize>, s: StateId, a: &Action) -> Result<Vec<Point>, WeakError> {
    let n = cache.automaton().num_states();
    Ok(restricted_quotient(n, cache.base(s, a)?, zero, &rs.partition))
}

/// The first block, action and pair of states whose restricted, quotiented
/// sets differ.
pub fn find_weak_split(cache: &mut SetCache, rs: &RefinementState) -> Result<Option<Splitter>, WeakError> {
    let zero = rs.restriction();
    for (b, block) in rs.partition.blocks().iter().enumerate() {
        if block.len() < 2 {
            continue;
        }
        for a in cache.actions().to_vec() {
            let first = state_key(cache, rs, &zero, block[0], &a)?;
            for &t in &block[1..] {
                if state_key(cache, rs, &zero, t, &a)? != first {
                    return Ok(Some(Splitter {
                        block: b,
                        action: a,
                        witness: (block[0], t),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Splits the splitter's block by equality of the sets for its action.
pub fn refine(cache: &mut SetCache, rs: &RefinementState, splitter: &Splitter) -> Result<Partition, WeakError> {
    let zero = rs.restriction();
    let mut keys = BTreeMap::new();
    for &s in rs.partition.block(splitter.block) {
        keys.insert(s, state_key(cache, rs, &zero, s, &splitter.action)?);
    }
    Ok(rs.partition.split_block(splitter.block, |s| keys[&s].clone()))
}

/// States with exactly one transition, a τ step, have incoming arcs routed
/// directly through that step. The states themselves are kept, so the
/// partition still covers them. States whose τ behaviour is only a self-loop
/// are returned as always tangible.
pub fn preprocess(p: &ProbAutomaton, keep: &[StateId]) -> (ProbAutomaton, BTreeSet<StateId>) {
    let mut always_tangible = BTreeSet::new();
    for s in p.states() {
        let taus: Vec<&Transition> = p.outgoing(s).iter().filter(|t| t.action.is_tau()).collect();
        if taus.len() == 1 && taus[0].target.is_dirac(s) {
            always_tangible.insert(s);
        }
    }

    let mut out: Vec<Vec<Transition>> = p.states().map(|s| p.outgoing(s).to_vec()).collect();
    for s in p.states() {
        if keep.contains(&s) {
            continue;
        }
        let [only] = out[s.0].as_slice() else {
            continue;
        };
        if !only.action.is_tau() {
            continue;
        }
        let self_mass = only.target.get(s);
        if self_mass.is_one() {
            continue;
        }
        let nu = if self_mass.is_zero() {
            only.target.clone()
        } else {
            let rest = only.target.minus(s).expect("s is in the support");
            let f = (num::one::<crate::rational::Rational>() - &self_mass).recip();
            rest.scale(&f).expect("rescaled mass is one")
        };
        debug!("routing arcs around {s}");
        for (i, ts) in out.iter_mut().enumerate() {
            if i == s.0 {
                continue;
            }
            for t in ts.iter_mut() {
                if t.target.contains(s) {
                    t.target = t.target.substitute(s, &nu);
                }
            }
        }
    }

    let mut q = p.clone();
    for (i, ts) in out.into_iter().enumerate() {
        q = q.with_outgoing(StateId(i), ts);
    }
    (q, always_tangible)
}

/// Decides whether `left` and `right` of one automaton are related.
pub fn decide_weak_states(
    p: &ProbAutomaton,
    left: StateId,
    right: StateId,
    opts: &DecideOptions,
) -> Result<DecisionReport, WeakError> {
    let start = Instant::now();
    let (q, always_tangible) = if opts.preprocess && opts.semantics == Semantics::Weak {
        preprocess(p, &[left, right, p.initial()])
    } else {
        (p.clone(), BTreeSet::new())
    };
    let n = q.num_states();
    let mut cache = SetCache::new(&q, opts.weak_config());
    let mut part = Partition::coarsest(n);
    let mut history = Vec::new();
    let all: BTreeSet<StateId> = q.states().collect();

    let final_state = loop {
        let rs = match opts.semantics {
            Semantics::Weak => tangible_fixpoint(&mut cache, &part, &always_tangible)?,
            Semantics::Naive => RefinementState {
                partition: part.clone(),
                tangible: all.clone(),
                vanishing: BTreeMap::new(),
            },
        };
        let splitter = find_weak_split(&mut cache, &rs)?;
        history.push(Round {
            state: rs.clone(),
            splitter: splitter.clone(),
        });
        let Some(sp) = splitter else {
            break rs;
        };
        debug!("round {}: splitting block {} on {}", history.len(), sp.block, sp.action);
        let next = refine(&mut cache, &rs, &sp)?;
        assert!(next.len() > part.len(), "refinement must split the block");
        part = next;
    };

    Ok(DecisionReport {
        semantics: opts.semantics,
        verdict: final_state.partition.same_block(left, right),
        partition: final_state.partition,
        tangible: final_state.tangible,
        vanishing: final_state.vanishing,
        rounds: history.len(),
        history,
        automaton: q,
        left,
        right,
        elapsed_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Compares two states of one model.
pub fn decide_states(m: &Model, left: StateId, right: StateId, opts: &DecideOptions) -> Result<DecisionReport, WeakError> {
    decide_weak_states(&m.to_pa(opts.chi_mode), left, right, opts)
}

/// Compares the initial states of two models in their direct sum, whose
/// states are prefixed `A.` and `B.`.
pub fn decide(m1: &Model, m2: &Model, opts: &DecideOptions) -> Result<DecisionReport, WeakError> {
    let p1 = m1.to_pa(opts.chi_mode);
    let p2 = m2.to_pa(opts.chi_mode);
    let sum = p1.direct_sum(&p2, Some(("A", "B")));
    let right = StateId(p1.num_states() + p2.initial().0);
    decide_weak_states(&sum, p1.initial(), right, opts)
}

pub fn decide_weak(m1: &Model, m2: &Model, mode: ChiMode) -> Result<DecisionReport, WeakError> {
    decide(
        m1,
        m2,
        &DecideOptions {
            chi_mode: mode,
            ..DecideOptions::default()
        },
    )
}

pub fn decide_naive(m1: &Model, m2: &Model, mode: ChiMode) -> Result<DecisionReport, WeakError> {
    decide(
        m1,
        m2,
        &DecideOptions {
            chi_mode: mode,
            ..DecideOptions::naive()
        },
    )
}
