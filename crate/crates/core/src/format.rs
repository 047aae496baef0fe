//! Line-oriented `.ma` text format.
//!
//! ```text
//! markov_automaton            # or prob_automaton
//! states s t u
//! initial s
//! actions a                   # optional
//! prob s tau : 1/2 t, 1/2 u
//! markov t 3 u
//! ```

use std::collections::{BTreeSet, HashMap};

use num::{Signed, Zero};

use crate::dist::{StateId, SubDistribution};
use crate::error::FormatError;
use crate::model::{Action, MarkovAutomaton, Model, ProbAutomaton, TimedTransition, Transition, CHI_PREFIX, TAU};
use crate::rational::{format_rational, parse_rational, Rational};

pub const MA_HEADER: &str = "markov_automaton";
pub const PA_HEADER: &str = "prob_automaton";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let col = |byte: usize| line[..byte].chars().count() + 1;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        let sep = c.is_whitespace() || c == ',' || c == ':';
        if sep {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: col(s) });
            }
            if !c.is_whitespace() {
                out.push(Tok { text: &line[i..i + 1], col: col(i) });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: col(s) });
    }
    out
}

fn parse_err(line: usize, col: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        column: col,
        message: message.into(),
    }
}

fn sem_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Semantic {
        line,
        message: message.into(),
    }
}

fn is_separator(t: &Tok) -> bool {
    t.text == "," || t.text == ":"
}

fn name_tok<'a>(line: usize, toks: &[Tok<'a>], i: usize, what: &str, end_col: usize) -> Result<Tok<'a>, FormatError> {
    match toks.get(i) {
        Some(t) if !is_separator(t) => Ok(*t),
        Some(t) => Err(parse_err(line, t.col, format!("expected {what}, found `{}`", t.text))),
        None => Err(parse_err(line, end_col, format!("expected {what}"))),
    }
}

fn rational_tok(line: usize, t: Tok) -> Result<Rational, FormatError> {
    parse_rational(t.text).ok_or_else(|| parse_err(line, t.col, format!("`{}` is not a rational number", t.text)))
}

struct ProbLine<'a> {
    line: usize,
    src: Tok<'a>,
    action: Tok<'a>,
    branches: Vec<(Rational, Tok<'a>)>,
}

struct MarkovLine<'a> {
    line: usize,
    src: Tok<'a>,
    rate: Rational,
    tgt: Tok<'a>,
}

/// Parses either flavour of the format.
pub fn parse_model(text: &str) -> Result<Model, FormatError> {
    let mut header: Option<(usize, bool)> = None;
    let mut states: Vec<(usize, Tok)> = Vec::new();
    let mut initial: Option<(usize, Tok)> = None;
    let mut actions: Vec<(usize, Tok)> = Vec::new();
    let mut probs: Vec<ProbLine> = Vec::new();
    let mut markovs: Vec<MarkovLine> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content);
        let Some(first) = toks.first() else {
            continue;
        };
        last_line = line;
        let end_col = content.trim_end().chars().count() + 1;

        let Some((_, is_pa)) = header else {
            let pa = match first.text {
                MA_HEADER => false,
                PA_HEADER => true,
                other => {
                    return Err(parse_err(
                        line,
                        first.col,
                        format!("expected `{MA_HEADER}` or `{PA_HEADER}`, found `{other}`"),
                    ))
                }
            };
            if let Some(t) = toks.get(1) {
                return Err(parse_err(line, t.col, "unexpected token after header"));
            }
            header = Some((line, pa));
            continue;
        };

        match first.text {
            "states" | "actions" => {
                if toks.len() < 2 {
                    return Err(parse_err(line, end_col, "expected at least one name"));
                }
                for t in &toks[1..] {
                    if is_separator(t) {
                        return Err(parse_err(line, t.col, format!("unexpected `{}`", t.text)));
                    }
                    if first.text == "states" {
                        states.push((line, *t));
                    } else {
                        actions.push((line, *t));
                    }
                }
            }
            "initial" => {
                let t = name_tok(line, &toks, 1, "a state name", end_col)?;
                if let Some(extra) = toks.get(2) {
                    return Err(parse_err(line, extra.col, "unexpected token after initial state"));
                }
                if initial.is_some() {
                    return Err(sem_err(line, "initial state declared twice"));
                }
                initial = Some((line, t));
            }
            "prob" => {
                let src = name_tok(line, &toks, 1, "a source state", end_col)?;
                let action = name_tok(line, &toks, 2, "an action", end_col)?;
                match toks.get(3) {
                    Some(t) if t.text == ":" => {}
                    Some(t) => return Err(parse_err(line, t.col, format!("expected `:`, found `{}`", t.text))),
                    None => return Err(parse_err(line, end_col, "expected `:`")),
                }
                let mut branches = Vec::new();
                let mut i = 4;
                loop {
                    let q = name_tok(line, &toks, i, "a probability", end_col)?;
                    let q = rational_tok(line, q)?;
                    let tgt = name_tok(line, &toks, i + 1, "a target state", end_col)?;
                    branches.push((q, tgt));
                    match toks.get(i + 2) {
                        None => break,
                        Some(t) if t.text == "," => i += 3,
                        Some(t) => return Err(parse_err(line, t.col, format!("expected `,`, found `{}`", t.text))),
                    }
                }
                probs.push(ProbLine { line, src, action, branches });
            }
            "markov" => {
                let src = name_tok(line, &toks, 1, "a source state", end_col)?;
                let rate = rational_tok(line, name_tok(line, &toks, 2, "a rate", end_col)?)?;
                let tgt = name_tok(line, &toks, 3, "a target state", end_col)?;
                if let Some(extra) = toks.get(4) {
                    return Err(parse_err(line, extra.col, "unexpected token after target state"));
                }
                if is_pa {
                    return Err(sem_err(line, "`markov` lines are not allowed in a prob_automaton"));
                }
                markovs.push(MarkovLine { line, src, rate, tgt });
            }
            other => return Err(parse_err(line, first.col, format!("unknown keyword `{other}`"))),
        }
    }

    let Some((header_line, is_pa)) = header else {
        return Err(parse_err(last_line.max(1), 1, format!("missing `{MA_HEADER}` or `{PA_HEADER}` header")));
    };
    if states.is_empty() {
        return Err(sem_err(header_line, "no states declared"));
    }

    let mut index: HashMap<&str, StateId> = HashMap::new();
    let mut names = Vec::new();
    for (line, t) in &states {
        if index.insert(t.text, StateId(names.len())).is_some() {
            return Err(sem_err(*line, format!("duplicate state `{}`", t.text)));
        }
        names.push(t.text.to_string());
    }
    let resolve = |line: usize, t: &Tok| -> Result<StateId, FormatError> {
        index
            .get(t.text)
            .copied()
            .ok_or_else(|| sem_err(line, format!("unknown state `{}`", t.text)))
    };

    let Some((init_line, init_tok)) = initial else {
        return Err(sem_err(last_line, "no initial state declared"));
    };
    let init = resolve(init_line, &init_tok)?;

    let mut declared = BTreeSet::new();
    for (line, t) in &actions {
        check_external(*line, t.text)?;
        declared.insert(t.text.to_string());
    }

    let mut transitions = Vec::new();
    for pl in &probs {
        let src = resolve(pl.line, &pl.src)?;
        let action = parse_action(pl.line, pl.action.text, is_pa)?;
        let mut pairs = Vec::new();
        for (q, t) in &pl.branches {
            if q.is_negative() {
                return Err(sem_err(pl.line, format!("negative probability {}", format_rational(q))));
            }
            pairs.push((resolve(pl.line, t)?, q.clone()));
        }
        let total: Rational = pairs.iter().map(|(_, q)| q).sum();
        if total != num::one() {
            return Err(sem_err(pl.line, format!("probabilities sum to mass {}, not 1", format_rational(&total))));
        }
        let target = SubDistribution::from_pairs(pairs).expect("mass checked above");
        transitions.push((src, Transition { action, target }));
    }

    if is_pa {
        let p = ProbAutomaton::new(names, transitions, init)?;
        return Ok(Model::Prob(p));
    }

    let mut timed = Vec::new();
    for ml in &markovs {
        let src = resolve(ml.line, &ml.src)?;
        let tgt = resolve(ml.line, &ml.tgt)?;
        if ml.rate.is_zero() {
            return Err(sem_err(ml.line, "zero rate on a Markovian transition"));
        }
        if ml.rate.is_negative() {
            return Err(sem_err(ml.line, format!("negative rate {}", format_rational(&ml.rate))));
        }
        timed.push((src, TimedTransition { rate: ml.rate.clone(), target: tgt }));
    }
    Ok(Model::Markov(MarkovAutomaton::new(names, declared, transitions, timed, init)?))
}

fn check_external(line: usize, name: &str) -> Result<(), FormatError> {
    if name == TAU || name.starts_with(CHI_PREFIX) {
        return Err(sem_err(line, format!("reserved action name `{name}`")));
    }
    Ok(())
}

fn parse_action(line: usize, text: &str, is_pa: bool) -> Result<Action, FormatError> {
    if text == TAU {
        return Ok(Action::Tau);
    }
    if let Some(rest) = text.strip_prefix(CHI_PREFIX) {
        if !is_pa {
            return Err(sem_err(line, format!("reserved action name `{text}`")));
        }
        let rate = rest
            .strip_suffix(')')
            .and_then(parse_rational)
            .ok_or_else(|| sem_err(line, format!("malformed timed action `{text}`")))?;
        if rate.is_negative() {
            return Err(sem_err(line, format!("negative rate in `{text}`")));
        }
        return Ok(Action::Chi(rate));
    }
    check_external(line, text)?;
    Ok(Action::External(text.to_string()))
}

/// Parses a Markov automaton; `prob_automaton` input is rejected.
pub fn parse_ma(text: &str) -> Result<MarkovAutomaton, FormatError> {
    match parse_model(text)? {
        Model::Markov(m) => Ok(m),
        Model::Prob(_) => Err(sem_err(1, format!("expected `{MA_HEADER}`"))),
    }
}

/// Parses `q1 n1, q2 n2, ...` over the given state names.
pub fn parse_distribution(text: &str, names: &[String]) -> Result<SubDistribution, FormatError> {
    let toks = tokenize(text);
    let mut pairs = Vec::new();
    let mut i = 0;
    let end = text.trim_end().chars().count() + 1;
    while i < toks.len() {
        let q = rational_tok(1, name_tok(1, &toks, i, "a probability", end)?)?;
        let t = name_tok(1, &toks, i + 1, "a state name", end)?;
        if q.is_negative() {
            return Err(sem_err(1, "negative probability"));
        }
        let s = names
            .iter()
            .position(|n| n == t.text)
            .ok_or_else(|| sem_err(1, format!("unknown state `{}`", t.text)))?;
        pairs.push((StateId(s), q));
        match toks.get(i + 2) {
            None => break,
            Some(c) if c.text == "," => i += 3,
            Some(c) => return Err(parse_err(1, c.col, format!("expected `,`, found `{}`", c.text))),
        }
    }
    SubDistribution::from_pairs(pairs).map_err(|e| sem_err(1, e.to_string()))
}

fn print_transitions(out: &mut String, names: &[String], src: StateId, ts: &[Transition]) {
    for t in ts {
        out.push_str(&format!(
            "prob {} {} : {}\n",
            names[src.0],
            t.action,
            t.target.format_with(|x| names[x.0].clone())
        ));
    }
}

pub fn print_ma(m: &MarkovAutomaton) -> String {
    let mut out = format!("{MA_HEADER}\nstates {}\ninitial {}\n", m.names().join(" "), m.name(m.initial()));
    if !m.actions().is_empty() {
        out.push_str(&format!("actions {}\n", m.actions().iter().cloned().collect::<Vec<_>>().join(" ")));
    }
    for s in m.states() {
        print_transitions(&mut out, m.names(), s, m.probabilistic(s));
    }
    for s in m.states() {
        for t in m.timed(s) {
            out.push_str(&format!(
                "markov {} {} {}\n",
                m.name(s),
                format_rational(&t.rate),
                m.name(t.target)
            ));
        }
    }
    out
}

pub fn print_pa(p: &ProbAutomaton) -> String {
    let mut out = format!("{PA_HEADER}\nstates {}\ninitial {}\n", p.names().join(" "), p.name(p.initial()));
    for s in p.states() {
        print_transitions(&mut out, p.names(), s, p.outgoing(s));
    }
    out
}

pub fn print_model(m: &Model) -> String {
    match m {
        Model::Markov(m) => print_ma(m),
        Model::Prob(p) => print_pa(p),
    }
}
