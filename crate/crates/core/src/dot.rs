//! Graphviz export.

use std::fmt::Write;

use crate::dist::{StateId, SubDistribution};
use crate::model::{Action, Model, ProbAutomaton};
use crate::partition::Partition;
use crate::rational::format_rational;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn edge_style(a: &Action) -> &'static str {
    match a {
        Action::Tau => "style=dashed",
        Action::External(_) => "style=solid",
        Action::Chi(_) => "style=bold, color=blue",
    }
}

struct View<'a> {
    names: &'a [String],
    initial: StateId,
    probabilistic: Vec<(StateId, Action, &'a SubDistribution)>,
    timed: Vec<(StateId, String, StateId)>,
}

fn render(v: &View, part: Option<&Partition>) -> String {
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
    let node = |s: StateId| format!("n{}", s.0);
    let decl = |s: StateId| {
        let shape = if s == v.initial { ", shape=doublecircle" } else { "" };
        format!("{} [label={}{}];", node(s), quote(&v.names[s.0]), shape)
    };
    match part {
        Some(part) => {
            for (i, block) in part.blocks().iter().enumerate() {
                writeln!(out, "  subgraph cluster_{i} {{\n    label=\"block {i}\";").unwrap();
                for &s in block {
                    writeln!(out, "    {}", decl(s)).unwrap();
                }
                out.push_str("  }\n");
            }
        }
        None => {
            for i in 0..v.names.len() {
                writeln!(out, "  {}", decl(StateId(i))).unwrap();
            }
        }
    }
    for (k, (src, action, target)) in v.probabilistic.iter().enumerate() {
        let label = quote(&action.to_string());
        let style = edge_style(action);
        match target.iter().next() {
            Some((t, _)) if target.len() == 1 => {
                writeln!(out, "  {} -> {} [label={label}, {style}];", node(*src), node(t)).unwrap();
            }
            _ => {
                let hub = format!("h{k}");
                writeln!(out, "  {hub} [shape=point];").unwrap();
                writeln!(out, "  {} -> {hub} [label={label}, {style}, arrowhead=none];", node(*src)).unwrap();
                for (t, m) in target.iter() {
                    writeln!(out, "  {hub} -> {} [label={}];", node(t), quote(&format_rational(m))).unwrap();
                }
            }
        }
    }
    for (src, rate, tgt) in &v.timed {
        writeln!(out, "  {} -> {} [label={}, style=dotted];", node(*src), node(*tgt), quote(rate)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// DOT text with one node per state, clustered by block when a partition is
/// given. Probabilistic branching goes through a point-shaped hub node.
pub fn export_dot(m: &Model, part: Option<&Partition>) -> String {
    match m {
        Model::Prob(p) => export_dot_pa(p, part),
        Model::Markov(ma) => {
            let v = View {
                names: ma.names(),
                initial: ma.initial(),
                probabilistic: ma
                    .states()
                    .flat_map(|s| ma.probabilistic(s).iter().map(move |t| (s, t.action.clone(), &t.target)))
                    .collect(),
                timed: ma
                    .states()
                    .flat_map(|s| ma.timed(s).iter().map(move |t| (s, format_rational(&t.rate), t.target)))
                    .collect(),
            };
            render(&v, part)
        }
    }
}

pub fn export_dot_pa(p: &ProbAutomaton, part: Option<&Partition>) -> String {
    let v = View {
        names: p.names(),
        initial: p.initial(),
        probabilistic: p.transitions().map(|(s, t)| (s, t.action.clone(), &t.target)).collect(),
        timed: Vec::new(),
    };
    render(&v, part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_model;

    fn edges(dot: &str) -> usize {
        dot.lines().filter(|l| l.contains("->")).count()
    }

    #[test]
    fn single_state() {
        let m = parse_model("markov_automaton\nstates s\ninitial s\n").unwrap();
        let dot = export_dot(&m, None);
        assert_eq!(dot.lines().filter(|l| l.contains("[label=")).count(), 1);
        assert_eq!(edges(&dot), 0);
    }

    #[test]
    fn tau_self_loop() {
        let m = parse_model("markov_automaton\nstates s\ninitial s\nprob s tau : 1 s\n").unwrap();
        let dot = export_dot(&m, None);
        assert!(dot.contains("n0 -> n0 [label=\"tau\", style=dashed]"));
    }

    #[test]
    fn clusters_and_hubs() {
        let m = parse_model("markov_automaton\nstates s t u\ninitial s\nprob s a : 1/2 t, 1/2 u\nmarkov t 3 u\n").unwrap();
        let part = Partition::from_labels(&[0, 1, 1]);
        let dot = export_dot(&m, Some(&part));
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert!(dot.contains("h0 [shape=point]"));
        assert!(dot.contains("h0 -> n1 [label=\"1/2\"]"));
        assert!(dot.contains("n1 -> n2 [label=\"3\", style=dotted]"));
    }
}
