//! Line-based fixture format and Graphviz export.
//!
//! ```text
//! heads 3
//! initial 0
//! final 0
//! 0 -> 1 : 1 a      // head 1 reads `a`
//! 1 -> 0 : eps
//! ```
//!
//! NFAs use the same format without `heads` and with bare letters.

use std::collections::BTreeSet;
use std::fmt::{self, Display, Write as _};

use thiserror::Error;

use super::{Label, MultiheadedAutomaton, Nfa};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FixtureError {
    pub line: usize,
    pub message: String,
}

struct Header {
    heads: Option<usize>,
    initial: usize,
    finals: BTreeSet<usize>,
    states: usize,
    edges: Vec<(usize, usize, Vec<String>)>,
}

fn parse_lines(text: &str) -> Result<Header, FixtureError> {
    let mut h = Header {
        heads: None,
        initial: 0,
        finals: BTreeSet::new(),
        states: 1,
        edges: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |m: &str| FixtureError {
            line,
            message: m.to_string(),
        };
        let content = raw
            .split(['#'])
            .next()
            .unwrap_or("")
            .split("//")
            .next()
            .unwrap_or("")
            .trim();
        if content.is_empty() {
            continue;
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(&format!("expected a number, got `{s}`")))
        };
        let words: Vec<&str> = content.split_whitespace().collect();
        match words[0] {
            "heads" if words.len() == 2 => h.heads = Some(num(words[1])?),
            "initial" if words.len() == 2 => h.initial = num(words[1])?,
            "final" => {
                for w in &words[1..] {
                    h.finals.insert(num(w)?);
                }
            }
            "states" if words.len() == 2 => h.states = h.states.max(num(words[1])?),
            _ => {
                let (lhs, rhs) = content
                    .split_once(':')
                    .ok_or_else(|| err("expected `p -> q : label`"))?;
                let (p, q) = lhs
                    .split_once("->")
                    .ok_or_else(|| err("expected `p -> q : label`"))?;
                let (p, q) = (num(p.trim())?, num(q.trim())?);
                h.edges
                    .push((p, q, rhs.split_whitespace().map(String::from).collect()));
                h.states = h.states.max(p + 1).max(q + 1);
            }
        }
    }
    h.states = h.states.max(h.initial + 1);
    if let Some(&f) = h.finals.iter().next_back() {
        h.states = h.states.max(f + 1);
    }
    Ok(h)
}

fn edge_line(text: &str, p: usize, q: usize) -> usize {
    text.lines()
        .position(|l| {
            l.contains("->")
                && l.split("->")
                    .next()
                    .is_some_and(|x| x.trim() == p.to_string())
                && l.contains(&q.to_string())
        })
        .map_or(0, |i| i + 1)
}

impl MultiheadedAutomaton<String> {
    pub fn from_fixture(text: &str) -> Result<Self, FixtureError> {
        let h = parse_lines(text)?;
        let heads = h.heads.ok_or(FixtureError {
            line: 0,
            message: "missing `heads`".into(),
        })?;
        let mut alphabet = BTreeSet::new();
        let mut transitions = Vec::new();
        for (p, q, label) in h.edges {
            let bad = || FixtureError {
                line: edge_line(text, p, q),
                message: "label must be `eps` or `<head> <letter>`".into(),
            };
            let l = match label.as_slice() {
                [e] if e == "eps" => Label::Eps,
                [k, a] => {
                    let k: usize = k.parse().map_err(|_| bad())?;
                    alphabet.insert(a.clone());
                    Label::Read(k, a.clone())
                }
                _ => return Err(bad()),
            };
            transitions.push((p, l, q));
        }
        let m = MultiheadedAutomaton {
            heads,
            states: h.states,
            alphabet: alphabet.into_iter().collect(),
            transitions,
            initial: h.initial,
            finals: h.finals,
        };
        m.validate().map_err(|e| FixtureError {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(m)
    }
}

impl Nfa<String> {
    pub fn from_fixture(text: &str) -> Result<Self, FixtureError> {
        let h = parse_lines(text)?;
        let mut alphabet = BTreeSet::new();
        let mut transitions = Vec::new();
        for (p, q, label) in h.edges {
            let l = match label.as_slice() {
                [e] if e == "eps" => None,
                [a] => {
                    alphabet.insert(a.clone());
                    Some(a.clone())
                }
                _ => {
                    return Err(FixtureError {
                        line: edge_line(text, p, q),
                        message: "label must be `eps` or a letter".into(),
                    })
                }
            };
            transitions.push((p, l, q));
        }
        Ok(Nfa {
            states: h.states,
            alphabet: alphabet.into_iter().collect(),
            transitions,
            initial: h.initial,
            finals: h.finals,
        })
    }
}

fn join(finals: &BTreeSet<usize>) -> String {
    finals
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

impl<L: Display> Display for MultiheadedAutomaton<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "heads {}", self.heads)?;
        writeln!(f, "states {}", self.states)?;
        writeln!(f, "initial {}", self.initial)?;
        writeln!(f, "final {}", join(&self.finals))?;
        for (p, l, q) in &self.transitions {
            match l {
                Label::Eps => writeln!(f, "{p} -> {q} : eps")?,
                Label::Read(k, a) => writeln!(f, "{p} -> {q} : {k} {a}")?,
            }
        }
        Ok(())
    }
}

impl<L: Display> Display for Nfa<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.states)?;
        writeln!(f, "initial {}", self.initial)?;
        writeln!(f, "final {}", join(&self.finals))?;
        for (p, l, q) in &self.transitions {
            match l {
                None => writeln!(f, "{p} -> {q} : eps")?,
                Some(a) => writeln!(f, "{p} -> {q} : {a}")?,
            }
        }
        Ok(())
    }
}

impl<L: Display> MultiheadedAutomaton<L> {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph mha {\n  rankdir=LR;\n  start [shape=point];\n");
        for s in 0..self.states {
            let shape = if self.finals.contains(&s) {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  s{s} [shape={shape}];");
        }
        let _ = writeln!(out, "  start -> s{};", self.initial);
        for (p, l, q) in &self.transitions {
            let label = match l {
                Label::Eps => "ε".to_string(),
                Label::Read(k, a) => format!("({k},{a})"),
            };
            let _ = writeln!(out, "  s{p} -> s{q} [label=\"{label}\"];");
        }
        out.push_str("}\n");
        out
    }
}
