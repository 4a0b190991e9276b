#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pgasrob::mha::{Label, MultiheadedAutomaton, Nfa};

pub mod programs;

pub const LETTERS: [char; 3] = ['a', 'b', 'c'];

pub fn random_mha(rng: &mut ChaCha8Rng) -> MultiheadedAutomaton<char> {
    let heads = rng.gen_range(1..=3);
    let states = rng.gen_range(1..=4);
    let sigma = rng.gen_range(1..=3);
    let count = rng.gen_range(0..=8);
    let transitions = (0..count)
        .map(|_| {
            let p = rng.gen_range(0..states);
            let q = rng.gen_range(0..states);
            let l = if rng.gen_bool(0.2) {
                Label::Eps
            } else {
                Label::Read(rng.gen_range(1..=heads), LETTERS[rng.gen_range(0..sigma)])
            };
            (p, l, q)
        })
        .collect();
    let finals = (0..states).filter(|_| rng.gen_bool(0.5)).collect();
    MultiheadedAutomaton {
        heads,
        states,
        alphabet: LETTERS[..sigma].to_vec(),
        transitions,
        initial: 0,
        finals,
    }
}

pub fn random_nfa(rng: &mut ChaCha8Rng, alphabet: &[char]) -> Nfa<char> {
    let states = rng.gen_range(1..=3);
    let count = rng.gen_range(0..=6);
    let transitions = (0..count)
        .map(|_| {
            let p = rng.gen_range(0..states);
            let q = rng.gen_range(0..states);
            let l = if rng.gen_bool(0.2) {
                None
            } else {
                Some(alphabet[rng.gen_range(0..alphabet.len())])
            };
            (p, l, q)
        })
        .collect();
    let finals: BTreeSet<usize> = (0..states).filter(|_| rng.gen_bool(0.5)).collect();
    Nfa {
        states,
        alphabet: alphabet.to_vec(),
        transitions,
        initial: 0,
        finals,
    }
}

/// Every word over `alphabet` of length at most `max_len`.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| {
                alphabet.iter().map(move |&a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn anbncn() -> MultiheadedAutomaton<char> {
    MultiheadedAutomaton {
        heads: 3,
        states: 3,
        alphabet: LETTERS.to_vec(),
        transitions: vec![
            (0, Label::Read(1, 'a'), 1),
            (1, Label::Read(2, 'b'), 2),
            (2, Label::Read(3, 'c'), 0),
        ],
        initial: 0,
        finals: BTreeSet::from([0]),
    }
}

/// Mismatches between the intersection constructions and pointwise
/// membership on all words up to `max_len`; empty means agreement.
pub fn intersection_mismatches(
    u: &MultiheadedAutomaton<char>,
    v: &Nfa<char>,
    max_len: usize,
) -> Vec<String> {
    use pgasrob::mha::{intersect, intersect_lazy, is_empty, witness, words_up_to, NfaLike};
    let w = intersect(u, v);
    let frame = [v.clone()];
    let lazy = intersect_lazy(u, &frame);
    let mut bad = Vec::new();
    let expected: BTreeSet<Vec<char>> = words_up_to(u, max_len)
        .into_iter()
        .filter(|x| v.accepts(x))
        .collect();
    if words_up_to(&w, max_len) != expected {
        bad.push("bounded language of intersect differs".into());
    }
    if words_up_to(&lazy, max_len) != expected {
        bad.push("bounded language of lazy intersect differs".into());
    }
    let empty = is_empty(&w);
    if empty != is_empty(&lazy) {
        bad.push("emptiness differs between constructions".into());
    }
    if empty && !expected.is_empty() {
        bad.push("reported empty but words exist".into());
    }
    match witness(&w) {
        None if !empty => bad.push("no witness for a nonempty language".into()),
        Some(x) if !(u.accepts(&x.word) && v.accepts(&x.word)) => {
            bad.push(format!("bad witness {:?}", x.word))
        }
        _ => {}
    }
    if let Some(x) = witness(&lazy) {
        if !(u.accepts(&x.word) && v.accepts(&x.word)) {
            bad.push(format!("bad lazy witness {:?}", x.word));
        }
    }
    bad
}

fn words_up_to_contains(u: &MultiheadedAutomaton<char>, word: &[char]) -> bool {
    pgasrob::mha::words_up_to(u, word.len()).contains(word)
}
