//! JSON and text rendering of decision and normal-form reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::dist::{StateId, SubDistribution};
use crate::elimination::{EliminationCase, NormalForm};
use crate::model::ProbAutomaton;
use crate::partition::Partition;
use crate::refinement::{DecisionReport, RefinementState, Semantics, Splitter};

pub const BISIMILAR: &str = "BISIMILAR";
pub const NOT_BISIMILAR: &str = "NOT BISIMILAR";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitterJson {
    pub block: Vec<String>,
    pub action: String,
    pub witness: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundJson {
    pub partition: Vec<Vec<String>>,
    pub tangible: Vec<String>,
    pub vanishing: BTreeMap<String, String>,
    pub splitter: Option<SplitterJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportJson {
    pub verdict: String,
    pub bisimilar: bool,
    pub semantics: String,
    pub compared: [String; 2],
    pub partition: Vec<Vec<String>>,
    pub tangible: Vec<String>,
    pub vanishing: BTreeMap<String, String>,
    pub rounds: usize,
    pub history: Vec<RoundJson>,
    pub timings: Timings,
}

fn names_of(p: &ProbAutomaton, states: impl IntoIterator<Item = StateId>) -> Vec<String> {
    let mut v: Vec<String> = states.into_iter().map(|s| p.name(s).to_string()).collect();
    v.sort();
    v
}

fn partition_names(p: &ProbAutomaton, part: &Partition) -> Vec<Vec<String>> {
    let mut blocks: Vec<Vec<String>> = part.blocks().iter().map(|b| names_of(p, b.iter().copied())).collect();
    blocks.sort();
    blocks
}

fn dist_text(p: &ProbAutomaton, d: &SubDistribution) -> String {
    d.format_with(|x| p.name(x).to_string())
}

fn vanishing_names(p: &ProbAutomaton, v: &BTreeMap<StateId, SubDistribution>) -> BTreeMap<String, String> {
    v.iter().map(|(s, d)| (p.name(*s).to_string(), dist_text(p, d))).collect()
}

fn splitter_json(p: &ProbAutomaton, rs: &RefinementState, sp: &Splitter) -> SplitterJson {
    SplitterJson {
        block: names_of(p, rs.partition.block(sp.block).iter().copied()),
        action: sp.action.to_string(),
        witness: [p.name(sp.witness.0).to_string(), p.name(sp.witness.1).to_string()],
    }
}

pub fn verdict_text(bisimilar: bool) -> &'static str {
    if bisimilar {
        BISIMILAR
    } else {
        NOT_BISIMILAR
    }
}

fn semantics_text(s: Semantics) -> &'static str {
    match s {
        Semantics::Weak => "weak",
        Semantics::Naive => "naive",
    }
}

pub fn report_json(r: &DecisionReport) -> ReportJson {
    let p = &r.automaton;
    ReportJson {
        verdict: if r.verdict { "bisimilar" } else { "not bisimilar" }.to_string(),
        bisimilar: r.verdict,
        semantics: semantics_text(r.semantics).to_string(),
        compared: [p.name(r.left).to_string(), p.name(r.right).to_string()],
        partition: partition_names(p, &r.partition),
        tangible: names_of(p, r.tangible.iter().copied()),
        vanishing: vanishing_names(p, &r.vanishing),
        rounds: r.rounds,
        history: r
            .history
            .iter()
            .map(|round| RoundJson {
                partition: partition_names(p, &round.state.partition),
                tangible: names_of(p, round.state.tangible.iter().copied()),
                vanishing: vanishing_names(p, &round.state.vanishing),
                splitter: round.splitter.as_ref().map(|sp| splitter_json(p, &round.state, sp)),
            })
            .collect(),
        timings: Timings { total_ms: r.elapsed_ms },
    }
}

fn blocks_text(blocks: &[Vec<String>]) -> String {
    blocks
        .iter()
        .map(|b| format!("{{{}}}", b.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn report_text(r: &DecisionReport) -> String {
    let j = report_json(r);
    let mut out = String::new();
    writeln!(out, "{}", verdict_text(r.verdict)).unwrap();
    writeln!(out, "semantics: {}", j.semantics).unwrap();
    writeln!(out, "compared: {} vs {}", j.compared[0], j.compared[1]).unwrap();
    writeln!(out, "rounds: {}", j.rounds).unwrap();
    writeln!(out, "partition: {}", blocks_text(&j.partition)).unwrap();
    if r.semantics == Semantics::Weak {
        writeln!(out, "tangible: {}", j.tangible.join(", ")).unwrap();
        if j.vanishing.is_empty() {
            writeln!(out, "vanishing: none").unwrap();
        }
        for (s, d) in &j.vanishing {
            writeln!(out, "vanishing: {s} -> {d}").unwrap();
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepJson {
    pub state: String,
    pub representation: String,
    pub substituted: Option<String>,
    pub case: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormJson {
    pub states: Vec<String>,
    pub initial: String,
    pub eliminated: Vec<StepJson>,
    pub report: ReportJson,
}

fn case_text(c: EliminationCase) -> &'static str {
    match c {
        EliminationCase::Removed => "removed",
        EliminationCase::FreshInitial => "fresh_initial",
        EliminationCase::KeptInitial => "kept_initial",
        EliminationCase::SelfLoop => "self_loop",
    }
}

pub fn normal_form_json(nf: &NormalForm) -> NormalFormJson {
    let o = &nf.original;
    NormalFormJson {
        states: nf.automaton.names().to_vec(),
        initial: nf.automaton.name(nf.automaton.initial()).to_string(),
        eliminated: nf
            .plan
            .steps
            .iter()
            .map(|s| StepJson {
                state: o.name(s.state).to_string(),
                representation: dist_text(o, &s.representation),
                substituted: s.substituted.as_ref().map(|d| dist_text(o, d)),
                case: case_text(s.case).to_string(),
            })
            .collect(),
        report: report_json(&nf.report),
    }
}
