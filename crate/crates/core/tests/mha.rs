mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{anbncn, intersection_mismatches, random_mha, random_nfa};
use pgasrob::mha::{intersect, is_empty, witness, words_up_to, MultiheadedAutomaton, Nfa};

#[test]
fn random_pairs_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nonempty = 0;
    for i in 0..150 {
        let u = random_mha(&mut rng);
        let v = random_nfa(&mut rng, &u.alphabet);
        let bad = intersection_mismatches(&u, &v, 6);
        assert!(bad.is_empty(), "pair {i}:\n{u}\n{v}\n{bad:?}");
        nonempty += !is_empty(&intersect(&u, &v)) as usize;
    }
    assert!(nonempty > 10, "{nonempty}");
}

#[test]
fn anbncn_against_counting_frames() {
    // a⁺b⁺c⁺ with at most 8 letters, brute forced
    let fixture = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/aplus_bplus_cplus.nfa"
    ))
    .unwrap();
    let frame = Nfa::from_fixture(&fixture).unwrap();
    let frame: Nfa<char> = Nfa {
        states: frame.states,
        alphabet: vec!['a', 'b', 'c'],
        transitions: frame
            .transitions
            .iter()
            .map(|(p, l, q)| (*p, l.as_ref().map(|s| s.chars().next().unwrap()), *q))
            .collect(),
        initial: frame.initial,
        finals: frame.finals.clone(),
    };
    let bad = intersection_mismatches(&anbncn(), &frame, 8);
    assert!(bad.is_empty(), "{bad:?}");
    let w = intersect(&anbncn(), &frame);
    assert_eq!(witness(&w).unwrap().word, vec!['a', 'b', 'c']);
}

#[test]
fn fixture_file_matches_constructor() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/anbncn.mha"
    ))
    .unwrap();
    let m = MultiheadedAutomaton::from_fixture(&text).unwrap();
    let words: Vec<String> = words_up_to(&m, 9).into_iter().map(|w| w.concat()).collect();
    assert_eq!(words, vec!["", "aaabbbccc", "aabbcc", "abc"]);
}
