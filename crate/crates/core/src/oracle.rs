//! Brute-force checks for naive weak bisimulation on small automata.

use std::collections::HashMap;

use crate::dist::StateId;
use crate::error::{OracleError, WeakError};
use crate::model::{Action, ProbAutomaton};
use crate::partition::Partition;
use crate::polytope::{in_hull, project_point, Point};
use crate::weak::{generator_set, WeakConfig};

pub const DEFAULT_BOUND: usize = 6;

/// Weak generator sets of every state and action, as dense vectors.
pub struct Responses {
    sets: HashMap<(StateId, Action), Vec<Point>>,
}

impl Responses {
    pub fn compute(p: &ProbAutomaton, cfg: &WeakConfig) -> Result<Responses, WeakError> {
        let n = p.num_states();
        let mut sets = HashMap::new();
        for s in p.states() {
            for a in p.actions() {
                let gens = generator_set(p, s, &a, cfg)?;
                sets.insert((s, a), gens.iter().map(|d| d.to_vector(n)).collect());
            }
        }
        Ok(Responses { sets })
    }
}

fn check_with(p: &ProbAutomaton, part: &Partition, resp: &Responses) -> bool {
    let n = p.num_states();
    for block in part.blocks() {
        for &x in block {
            for t in p.outgoing(x) {
                let want = project_point(&t.target.to_vector(n), part);
                for &y in block {
                    if y == x {
                        continue;
                    }
                    let gens: Vec<Point> = resp.sets[&(y, t.action.clone())]
                        .iter()
                        .map(|g| project_point(g, part))
                        .collect();
                    if !in_hull(&gens, &want) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Whether every strong step of a state can be answered by each state of its
/// block with a combined weak step of equal block masses.
pub fn check_naive_partition(p: &ProbAutomaton, part: &Partition, cfg: &WeakConfig) -> Result<bool, WeakError> {
    Ok(check_with(p, part, &Responses::compute(p, cfg)?))
}

/// Calls `f` with the block label vector of every set partition of `0..n`
/// (restricted growth strings).
fn for_each_partition<F: FnMut(&[usize])>(n: usize, f: &mut F) {
    fn rec<F: FnMut(&[usize])>(labels: &mut Vec<usize>, n: usize, max: usize, f: &mut F) {
        if labels.len() == n {
            f(labels);
            return;
        }
        let next = if labels.is_empty() { 0 } else { max + 1 };
        for l in 0..=next {
            labels.push(l);
            rec(labels, n, max.max(l), f);
            labels.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, 0, f);
}

/// The coarsest partition passing [`check_naive_partition`], by exhaustive
/// search over all set partitions.
pub fn coarsest_naive_partition_bruteforce(p: &ProbAutomaton, bound: usize, cfg: &WeakConfig) -> Result<Partition, OracleError> {
    let n = p.num_states();
    if n > bound {
        return Err(OracleError::TooLarge { states: n, bound });
    }
    let resp = Responses::compute(p, cfg)?;
    let mut passing: Vec<Partition> = Vec::new();
    for_each_partition(n, &mut |labels| {
        let part = Partition::from_labels(labels);
        if check_with(p, &part, &resp) {
            passing.push(part);
        }
    });
    passing.sort_by_key(Partition::len);
    let coarsest = passing.first().cloned().expect("the discrete partition always passes");
    if passing.iter().any(|q| !q.refines(&coarsest)) {
        return Err(OracleError::NoCoarsest);
    }
    Ok(coarsest)
}
