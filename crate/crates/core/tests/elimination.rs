mod common;

use mabisim::chi::ChiMode;
use mabisim::dist::SubDistribution;
use mabisim::elimination::{dist_equiv_on_normal_form, eliminate_state, normal_form, EliminationCase};
use mabisim::format::parse_distribution;
use mabisim::model::Model;
use mabisim::rational::{int, ratio};
use mabisim::refinement::{decide_naive, decide_states, decide_weak, DecideOptions};
use num::One;

const MODE: ChiMode = ChiMode::WithChiZero;

fn nf(m: &Model) -> Model {
    Model::Prob(normal_form(m, MODE).unwrap().automaton)
}

#[test]
fn verdicts_survive_normal_forms() {
    for (label, a, b) in common::corpus_pairs() {
        let weak = decide_weak(&a, &b, MODE).unwrap().verdict;
        let (na, nb) = (nf(&a), nf(&b));
        assert_eq!(decide_weak(&na, &nb, MODE).unwrap().verdict, weak, "{label}: weak on normal forms");
        assert_eq!(decide_naive(&na, &nb, MODE).unwrap().verdict, weak, "{label}: naive on normal forms");
    }
}

#[test]
fn single_eliminations_preserve_bisimilarity() {
    for name in common::corpus_names() {
        let m = common::load(&name);
        let form = normal_form(&m, MODE).unwrap();
        for (s, nu) in &form.report.vanishing {
            let q = Model::Prob(eliminate_state(&form.original, *s, nu));
            assert!(
                decide_weak(&m, &q, MODE).unwrap().verdict,
                "{name}: eliminating {}",
                form.original.name(*s)
            );
        }
    }
}

#[test]
fn normal_forms_have_no_eliminable_states_left() {
    for name in common::corpus_names() {
        let form = normal_form(&common::load(&name), MODE).unwrap();
        let p = &form.automaton;
        let again = decide_states(&Model::Prob(p.clone()), p.initial(), p.initial(), &DecideOptions { preprocess: false, ..Default::default() }).unwrap();
        let leftover: Vec<_> = again.vanishing.keys().filter(|s| **s != p.initial()).collect();
        assert!(leftover.is_empty(), "{name}: {leftover:?} still vanishing");
        for (_, t) in p.transitions() {
            assert!(t.target.mass().is_one(), "{name}: mass not conserved");
        }
    }
}

#[test]
fn worked_example_normal_form_drops_s2() {
    let m = common::load("fig7_example");
    let form = normal_form(&m, MODE).unwrap();
    assert_eq!(form.plan.steps.len(), 1);
    assert_eq!(form.original.name(form.plan.steps[0].state), "s2");
    assert_eq!(form.plan.steps[0].case, EliminationCase::Removed);
    assert!(form.automaton.state("s2").is_none());
    let p = &form.automaton;
    let s1 = p.state("s1").unwrap();
    let want = parse_distribution("1/4 s1, 1/2 A, 1/4 B", p.names()).unwrap();
    assert!(p.outgoing(s1).iter().any(|t| t.target == want));
    assert!(decide_weak(&m, &Model::Prob(p.clone()), MODE).unwrap().verdict);
}

#[test]
fn trivially_vanishing_state_pushes_weights_to_predecessors() {
    let m = common::load("fig5c");
    let form = normal_form(&m, MODE).unwrap();
    let p = &form.automaton;
    assert!(p.state("E").is_none());
    let s0 = p.state("s0").unwrap();
    let want = parse_distribution("1/3 C, 2/3 D", p.names()).unwrap();
    assert_eq!(p.outgoing(s0)[0].target, want);
}

#[test]
fn distribution_equivalence_on_normal_forms() {
    let m = common::load("fig8_nondet");
    let form = normal_form(&m, MODE).unwrap();
    let id = |n: &str| form.original.state(n).unwrap();
    let s1 = SubDistribution::dirac(id("s1"));
    for c in [int(0), ratio(1, 3), ratio(1, 2), int(1)] {
        let mix = SubDistribution::from_pairs([(id("E"), c.clone()), (id("F"), int(1) - c)]).unwrap();
        assert!(!dist_equiv_on_normal_form(&form, &s1, &mix).unwrap());
    }
    assert!(dist_equiv_on_normal_form(&form, &s1, &s1).unwrap());

    let m = common::load("fig5_ef");
    let form = normal_form(&m, MODE).unwrap();
    let id = |n: &str| form.original.state(n).unwrap();
    let e = SubDistribution::dirac(id("E"));
    let f = SubDistribution::dirac(id("F"));
    let cd = SubDistribution::from_pairs([(id("C"), ratio(1, 3)), (id("D"), ratio(2, 3))]).unwrap();
    assert!(dist_equiv_on_normal_form(&form, &e, &f).unwrap());
    assert!(dist_equiv_on_normal_form(&form, &e, &cd).unwrap());
    assert!(!dist_equiv_on_normal_form(&form, &e, &SubDistribution::dirac(id("D"))).unwrap());
}
