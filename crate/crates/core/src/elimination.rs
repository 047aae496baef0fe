//! Elimination of vanishing states and the resulting normal form.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::chi::ChiMode;
use crate::dist::{StateId, SubDistribution};
use crate::error::{EquivError, WeakError};
use crate::model::{Action, Model, ProbAutomaton, Transition};
use crate::rational::Rational;
use crate::refinement::{decide_weak_states, modified_automaton, DecideOptions, DecisionReport};

/// Which structural case an elimination step took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EliminationCase {
    /// The state was removed and its incoming arcs redirected.
    Removed,
    /// The initial state had incoming arcs; a fresh initial state replaced it.
    FreshInitial,
    /// The initial state had no incoming arcs and stays in representation form.
    KeptInitial,
    /// The representation was a pure self-loop; the state lost its transitions.
    SelfLoop,
}

/// Drops the self-mass of the single τ transition of `s`. Returns `None` and
/// removes the transition when `ν = Δ_s`.
pub fn rescale(p: &ProbAutomaton, s: StateId, nu: &SubDistribution) -> (ProbAutomaton, Option<SubDistribution>) {
    let self_mass = nu.get(s);
    if self_mass.is_one() {
        return (p.with_outgoing(s, Vec::new()), None);
    }
    let res = if self_mass.is_zero() {
        nu.clone()
    } else {
        let f = (Rational::one() - self_mass).recip();
        nu.minus(s).expect("s is in the support").scale(&f).expect("rescaled mass is one")
    };
    (modified_automaton(p, s, &res), Some(res))
}

/// Outcome of one elimination step.
#[derive(Clone, Debug)]
pub struct Eliminated {
    pub automaton: ProbAutomaton,
    /// Old index to new index; `None` for the removed state.
    pub map: Vec<Option<StateId>>,
    pub case: EliminationCase,
    pub rescaled: Option<SubDistribution>,
}

fn fresh_name(p: &ProbAutomaton, base: &str) -> String {
    let mut name = format!("{base}°");
    while p.state(&name).is_some() {
        name.push('°');
    }
    name
}

/// Rescales, then eliminates `s`, whose only transition must be `(s, τ, ν)`.
pub fn eliminate(p: &ProbAutomaton, s: StateId, nu: &SubDistribution) -> Eliminated {
    let identity: Vec<Option<StateId>> = p.states().map(Some).collect();
    let (q, res) = rescale(p, s, nu);
    let Some(res) = res else {
        return Eliminated {
            automaton: q,
            map: identity,
            case: EliminationCase::SelfLoop,
            rescaled: None,
        };
    };
    let is_initial = s == q.initial();
    let incoming = q.transitions().any(|(src, t)| src != s && t.target.contains(s));
    if is_initial && !incoming {
        return Eliminated {
            automaton: q,
            map: identity,
            case: EliminationCase::KeptInitial,
            rescaled: Some(res),
        };
    }

    let mut r = q.clone();
    for x in q.states() {
        if x == s || !q.outgoing(x).iter().any(|t| t.target.contains(s)) {
            continue;
        }
        let ts = q
            .outgoing(x)
            .iter()
            .map(|t| Transition {
                action: t.action.clone(),
                target: t.target.substitute(s, &res),
            })
            .collect();
        r = r.with_outgoing(x, ts);
    }
    let r = r.with_outgoing(s, Vec::new());

    if is_initial {
        let name = fresh_name(&r, r.name(s));
        let (with_fresh, fresh) = r.with_new_state(
            name,
            vec![Transition {
                action: Action::Tau,
                target: res.clone(),
            }],
        );
        let (out, map) = with_fresh.with_initial(fresh).without_state(s);
        let map = map[..p.num_states()].to_vec();
        return Eliminated {
            automaton: out,
            map,
            case: EliminationCase::FreshInitial,
            rescaled: Some(res),
        };
    }
    let (out, map) = r.without_state(s);
    Eliminated {
        automaton: out,
        map,
        case: EliminationCase::Removed,
        rescaled: Some(res),
    }
}

/// The automaton after eliminating `s` with representation `ν`.
pub fn eliminate_state(p: &ProbAutomaton, s: StateId, nu: &SubDistribution) -> ProbAutomaton {
    eliminate(&modified_automaton(p, s, nu), s, nu).automaton
}

/// One step of a complete elimination, in the indices of the original
/// automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationStep {
    pub state: StateId,
    /// Representation as found by the decision run.
    pub representation: SubDistribution,
    /// Rescaled representation at the time of elimination, after earlier
    /// substitutions.
    pub substituted: Option<SubDistribution>,
    pub case: EliminationCase,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EliminationPlan {
    pub steps: Vec<EliminationStep>,
}

impl EliminationPlan {
    /// Rewrites a distribution over original states through every
    /// substitution of the plan.
    pub fn rewrite(&self, mu: &SubDistribution) -> SubDistribution {
        let mut d = mu.clone();
        for step in &self.steps {
            if let Some(nu) = &step.substituted {
                if d.contains(step.state) {
                    d = d.substitute(step.state, nu);
                }
            }
        }
        d
    }
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    /// The original automaton as a PA.
    pub original: ProbAutomaton,
    pub automaton: ProbAutomaton,
    pub report: DecisionReport,
    pub plan: EliminationPlan,
    /// Original index of each normal-form state; `None` for a fresh initial
    /// state.
    pub origin: Vec<Option<StateId>>,
}

/// Eliminates every nn-vanishing state, in ascending index order.
pub fn normal_form(m: &Model, mode: ChiMode) -> Result<NormalForm, WeakError> {
    let p = m.to_pa(mode);
    let opts = DecideOptions {
        chi_mode: mode,
        preprocess: false,
        ..DecideOptions::default()
    };
    let report = decide_weak_states(&p, p.initial(), p.initial(), &opts)?;

    let mut current = p.clone();
    let mut origin: Vec<Option<StateId>> = p.states().map(Some).collect();
    let mut pending: BTreeMap<StateId, SubDistribution> = report.vanishing.clone();
    let mut plan = EliminationPlan::default();

    let order: Vec<StateId> = pending.keys().copied().collect();
    for s in order {
        let nu = pending.remove(&s).expect("pending representation");
        let cur = StateId(origin.iter().position(|o| *o == Some(s)).expect("state still present"));
        let to_cur = |d: &SubDistribution, origin: &[Option<StateId>]| {
            d.remap(|x| origin.iter().position(|o| *o == Some(x)).map(StateId))
                .expect("representations only mention present states")
        };
        let nu_cur = to_cur(&nu, &origin);
        assert!(!nu_cur.is_dirac(cur), "a valid representation reaches other states");

        let step = eliminate(&modified_automaton(&current, cur, &nu_cur), cur, &nu_cur);
        let substituted_orig = step
            .rescaled
            .as_ref()
            .map(|d| d.remap(|x| origin[x.0]).expect("rescaled target lies in the original states"));

        if let (Some(res), EliminationCase::Removed | EliminationCase::FreshInitial) = (&substituted_orig, step.case) {
            for other in pending.values_mut() {
                if other.contains(s) {
                    *other = other.substitute(s, res);
                }
            }
        }

        let mut next_origin = vec![None; step.automaton.num_states()];
        for (old, new) in step.map.iter().enumerate() {
            if let Some(new) = new {
                next_origin[new.0] = origin[old];
            }
        }
        origin = next_origin;
        current = step.automaton;
        plan.steps.push(EliminationStep {
            state: s,
            representation: report.vanishing[&s].clone(),
            substituted: substituted_orig,
            case: step.case,
        });
    }

    Ok(NormalForm {
        original: p,
        automaton: current,
        report,
        plan,
        origin,
    })
}

/// Distribution-level weak bisimilarity via block masses on the normal form.
/// Inputs are over the original states.
pub fn dist_equiv_on_normal_form(nf: &NormalForm, mu: &SubDistribution, gamma: &SubDistribution) -> Result<bool, EquivError> {
    if mu.mass() != gamma.mass() {
        return Err(EquivError::MassMismatch(mu.mass(), gamma.mass()));
    }
    let part = &nf.report.partition;
    let masses = |d: &SubDistribution| {
        let mut v = vec![Rational::zero(); part.len()];
        for (s, m) in nf.plan.rewrite(d).iter() {
            v[part.block_of(s)] += m;
        }
        v
    };
    Ok(masses(mu) == masses(gamma))
}
