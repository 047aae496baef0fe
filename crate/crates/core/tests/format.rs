mod common;

use mabisim::chi::ChiMode;
use mabisim::error::FormatError;
use mabisim::format::{parse_model, print_ma, print_model, print_pa};
use mabisim::model::Model;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_parses_and_round_trips() {
    let names = common::corpus_names();
    for expected in [
        "fig1_m1", "fig1_m2", "fig1_m3", "fig2_m1", "fig2_m2", "fig3_ab", "fig5a", "fig5b", "fig5c", "fig5_ef", "fig6_rescale",
        "fig7_example", "fig8_nondet", "fig10_m4",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    for name in names {
        let m = common::load(&name);
        assert_eq!(parse_model(&print_model(&m)).unwrap(), m, "{name}");
        for mode in [ChiMode::WithChiZero, ChiMode::LegacyNoChiZero] {
            let p = m.to_pa(mode);
            assert_eq!(parse_model(&print_pa(&p)).unwrap(), Model::Prob(p), "{name}");
        }
    }
}

#[test]
fn diagnostics_carry_positions() {
    let err = parse_model("markov_automaton\nstates s\ninitial s\nprob s a : 0.5 s\n").unwrap_err();
    assert!(matches!(err, FormatError::Parse { line: 4, column: 12, .. }), "{err:?}");
    let err = parse_model("markov_automaton\nstates s t\ninitial s\nprob s a : 1 u\n").unwrap_err();
    assert!(matches!(err, FormatError::Semantic { line: 4, .. }), "{err:?}");
    let err = parse_model("markov_automaton\nstates s\ninitial s\nactions a chi(2)\n").unwrap_err();
    assert!(err.to_string().contains("reserved"), "{err}");
    let err = parse_model("markov_automaton\nstates s\ninitial s\nmarkov s -1 s\n").unwrap_err();
    assert!(err.to_string().contains("negative rate"), "{err}");
    let err = parse_model("prob_automaton\nstates s\ninitial s\nmarkov s 1 s\n").unwrap_err();
    assert!(err.to_string().contains("not allowed"), "{err}");
    let err = parse_model("markov_automaton\nstates s\ninitial s\nprob s chi(1) : 1 s\n").unwrap_err();
    assert!(matches!(err, FormatError::Semantic { line: 4, .. } | FormatError::Parse { line: 4, .. }), "{err:?}");
}

proptest! {
    #[test]
    fn random_models_round_trip(seed in any::<u64>()) {
        let m = common::random_ma(&mut ChaCha8Rng::seed_from_u64(seed), 5, 8);
        let text = print_ma(&m);
        prop_assert_eq!(parse_model(&text).unwrap(), Model::Markov(m.clone()));
        let p = Model::Markov(m).to_pa(ChiMode::WithChiZero);
        prop_assert_eq!(parse_model(&print_pa(&p)).unwrap(), Model::Prob(p));
    }
}
