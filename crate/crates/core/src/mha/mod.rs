//! Multiheaded finite automata. A run tags every letter with a head; the
//! word of a run is the head-1 letters, then the head-2 letters, and so on.

mod intersect;
mod text;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use indexmap::map::Entry;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use intersect::{intersect, intersect_lazy, LazyIntersection, Tracker};
pub use text::FixtureError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label<L> {
    Eps,
    /// Head (1-based) and letter.
    Read(usize, L),
}

impl<L> Label<L> {
    pub fn head(&self) -> Option<usize> {
        match self {
            Label::Eps => None,
            Label::Read(h, _) => Some(*h),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MhaError {
    #[error("transition {index}: state {state} out of range")]
    BadState { index: usize, state: usize },
    #[error("transition {index}: head {head} out of range 1..={heads}")]
    BadHead {
        index: usize,
        head: usize,
        heads: usize,
    },
    #[error("transition {index}: letter not in the alphabet")]
    BadLetter { index: usize },
    #[error("head count must be at least 1")]
    NoHeads,
}

/// `comp(σ)`: the per-head projections of a run, concatenated.
pub fn comp<L: Clone>(heads: usize, run: &[Label<L>]) -> Vec<L> {
    let mut out = Vec::new();
    for k in 1..=heads {
        out.extend(run.iter().filter_map(|l| match l {
            Label::Read(h, a) if *h == k => Some(a.clone()),
            _ => None,
        }));
    }
    out
}

/// An automaton given by its successor function.
pub trait LazyMha {
    type State: Clone + Eq + Hash;
    type Letter: Clone + Ord + Debug;

    fn heads(&self) -> usize;
    fn initial_states(&self) -> Vec<Self::State>;
    fn is_final(&self, s: &Self::State) -> bool;
    fn successors(&self, s: &Self::State) -> Vec<(Label<Self::Letter>, Self::State)>;
}

type Edges<M> = Vec<(Label<<M as LazyMha>::Letter>, <M as LazyMha>::State)>;
/// A state with the output of each head so far.
type Config<M> = (<M as LazyMha>::State, Vec<Vec<<M as LazyMha>::Letter>>);
/// Predecessor index and label, `None` for initial states.
type Parents<M> = IndexMap<<M as LazyMha>::State, Option<(usize, Label<<M as LazyMha>::Letter>)>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiheadedAutomaton<L> {
    pub heads: usize,
    pub states: usize,
    pub alphabet: Vec<L>,
    pub transitions: Vec<(usize, Label<L>, usize)>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
}

impl<L: Clone + Ord + Debug> MultiheadedAutomaton<L> {
    pub fn validate(&self) -> Result<(), MhaError> {
        if self.heads == 0 {
            return Err(MhaError::NoHeads);
        }
        for (index, (p, l, q)) in self.transitions.iter().enumerate() {
            for &state in [p, q] {
                if state >= self.states {
                    return Err(MhaError::BadState { index, state });
                }
            }
            if let Label::Read(head, a) = l {
                if *head == 0 || *head > self.heads {
                    return Err(MhaError::BadHead {
                        index,
                        head: *head,
                        heads: self.heads,
                    });
                }
                if !self.alphabet.contains(a) {
                    return Err(MhaError::BadLetter { index });
                }
            }
        }
        if self.initial >= self.states {
            return Err(MhaError::BadState {
                index: usize::MAX,
                state: self.initial,
            });
        }
        Ok(())
    }

    pub fn accepts(&self, word: &[L]) -> bool {
        accepts(self, word)
    }
}

impl<L: Clone + Ord + Debug> LazyMha for MultiheadedAutomaton<L> {
    type State = usize;
    type Letter = L;

    fn heads(&self) -> usize {
        self.heads
    }
    fn initial_states(&self) -> Vec<usize> {
        vec![self.initial]
    }
    fn is_final(&self, s: &usize) -> bool {
        self.finals.contains(s)
    }
    fn successors(&self, s: &usize) -> Vec<(Label<L>, usize)> {
        self.transitions
            .iter()
            .filter(|t| t.0 == *s)
            .map(|(_, l, q)| (l.clone(), *q))
            .collect()
    }
}

/// Finite automaton with ε-transitions; `None` labels are ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nfa<L> {
    pub states: usize,
    pub alphabet: Vec<L>,
    pub transitions: Vec<(usize, Option<L>, usize)>,
    pub initial: usize,
    pub finals: BTreeSet<usize>,
}

/// Index-addressed automaton interface used by the intersections.
pub trait NfaLike {
    type Letter;

    fn state_count(&self) -> usize;
    fn initial(&self) -> usize;
    fn is_final(&self, s: usize) -> bool;
    fn step(&self, s: usize, a: &Self::Letter) -> Vec<usize>;
    fn eps(&self, s: usize) -> Vec<usize>;

    fn closure(&self, states: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut seen = vec![false; self.state_count()];
        let mut stack: Vec<usize> = states.into_iter().collect();
        let mut out = Vec::new();
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            out.push(s);
            stack.extend(self.eps(s));
        }
        out.sort_unstable();
        out
    }

    fn accepts(&self, word: &[Self::Letter]) -> bool {
        let mut cur = self.closure([self.initial()]);
        for a in word {
            let next: Vec<usize> = cur.iter().flat_map(|&s| self.step(s, a)).collect();
            cur = self.closure(next);
        }
        cur.iter().any(|&s| self.is_final(s))
    }
}

impl<L: PartialEq> NfaLike for Nfa<L> {
    type Letter = L;

    fn state_count(&self) -> usize {
        self.states
    }
    fn initial(&self) -> usize {
        self.initial
    }
    fn is_final(&self, s: usize) -> bool {
        self.finals.contains(&s)
    }
    fn step(&self, s: usize, a: &L) -> Vec<usize> {
        self.transitions
            .iter()
            .filter(|(p, l, _)| *p == s && l.as_ref() == Some(a))
            .map(|t| t.2)
            .collect()
    }
    fn eps(&self, s: usize) -> Vec<usize> {
        self.transitions
            .iter()
            .filter(|(p, l, _)| *p == s && l.is_none())
            .map(|t| t.2)
            .collect()
    }
}

impl<L: Clone + PartialEq> Nfa<L> {
    pub fn validate(&self) -> Result<(), MhaError> {
        for (index, (p, l, q)) in self.transitions.iter().enumerate() {
            for &state in [p, q] {
                if state >= self.states {
                    return Err(MhaError::BadState { index, state });
                }
            }
            if l.as_ref().is_some_and(|a| !self.alphabet.contains(a)) {
                return Err(MhaError::BadLetter { index });
            }
        }
        Ok(())
    }

    /// The single-head automaton with the same language.
    pub fn as_single_head(&self) -> MultiheadedAutomaton<L> {
        MultiheadedAutomaton {
            heads: 1,
            states: self.states,
            alphabet: self.alphabet.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|(p, l, q)| (*p, l.clone().map_or(Label::Eps, |a| Label::Read(1, a)), *q))
                .collect(),
            initial: self.initial,
            finals: self.finals.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness<L> {
    pub run: Vec<Label<L>>,
    pub word: Vec<L>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Search<L> {
    Empty {
        explored: usize,
    },
    Found {
        witness: Witness<L>,
        explored: usize,
    },
    /// More than `cap` states were discovered before a decision.
    Exceeded {
        cap: usize,
    },
}

/// Breadth-first reachability of a final state. The run found has the
/// fewest transitions; among those, the smallest label sequence.
pub fn search<M: LazyMha>(m: &M, max_states: Option<usize>) -> Search<M::Letter> {
    search_until(m, max_states, &|| false).expect("never cancelled")
}

/// [`search`] that gives up, returning `None`, once `cancel` returns true.
/// `cancel` is polled every few thousand states.
pub fn search_until<M: LazyMha>(
    m: &M,
    max_states: Option<usize>,
    cancel: &dyn Fn() -> bool,
) -> Option<Search<M::Letter>> {
    let mut table: Parents<M> = IndexMap::new();
    let mut queue = VecDeque::new();
    for s in m.initial_states() {
        if let Entry::Vacant(v) = table.entry(s) {
            queue.push_back(v.index());
            v.insert(None);
        }
    }
    while let Some(i) = queue.pop_front() {
        if i % 4096 == 0 && cancel() {
            return None;
        }
        let (s, _) = table.get_index(i).expect("queued state");
        if m.is_final(s) {
            let mut run = Vec::new();
            let mut cur = i;
            while let Some((p, l)) = table[cur].clone() {
                run.push(l);
                cur = p;
            }
            run.reverse();
            let word = comp(m.heads(), &run);
            return Some(Search::Found {
                witness: Witness { run, word },
                explored: table.len(),
            });
        }
        let mut succ = m.successors(s);
        succ.sort_by(|a, b| a.0.cmp(&b.0));
        for (l, t) in succ {
            if let Entry::Vacant(v) = table.entry(t) {
                queue.push_back(v.index());
                v.insert(Some((i, l)));
            }
        }
        if max_states.is_some_and(|cap| table.len() > cap) {
            return Some(Search::Exceeded {
                cap: max_states.unwrap_or(0),
            });
        }
    }
    Some(Search::Empty {
        explored: table.len(),
    })
}

pub fn is_empty<M: LazyMha>(m: &M) -> bool {
    matches!(search(m, None), Search::Empty { .. })
}

pub fn witness<M: LazyMha>(m: &M) -> Option<Witness<M::Letter>> {
    match search(m, None) {
        Search::Found { witness, .. } => Some(witness),
        _ => None,
    }
}

/// Whether some accepting run has `word` as its comp-word. Guesses where
/// each head's part of the word begins and tracks every head's position.
pub fn accepts<M: LazyMha>(m: &M, word: &[M::Letter]) -> bool {
    let n = m.heads();
    let len = word.len();
    // head k reads word[starts[k-1]..ends[k-1]]; the parts are contiguous
    let mut cuts = vec![0usize; n + 1];
    cuts[n] = len;
    fn each_split(cuts: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if k == cuts.len() - 1 {
            return f(cuts);
        }
        let lo = cuts[k - 1];
        let hi = cuts[cuts.len() - 1];
        for c in lo..=hi {
            cuts[k] = c;
            if each_split(cuts, k + 1, f) {
                return true;
            }
        }
        false
    }
    let mut cache: HashMap<M::State, Edges<M>> = HashMap::new();
    let mut try_split = |cuts: &[usize]| {
        let start: Vec<usize> = cuts[..n].to_vec();
        let mut seen: HashSet<(M::State, Vec<usize>)> = HashSet::new();
        let mut stack: Vec<(M::State, Vec<usize>)> = m
            .initial_states()
            .into_iter()
            .map(|s| (s, start.clone()))
            .collect();
        while let Some((s, pos)) = stack.pop() {
            if !seen.insert((s.clone(), pos.clone())) {
                continue;
            }
            if m.is_final(&s) && (0..n).all(|k| pos[k] == cuts[k + 1]) {
                return true;
            }
            let succ = cache.entry(s.clone()).or_insert_with(|| m.successors(&s));
            for (l, t) in succ.iter().cloned() {
                match l {
                    Label::Eps => stack.push((t, pos.clone())),
                    Label::Read(h, a) => {
                        let k = h - 1;
                        if pos[k] < cuts[k + 1] && word[pos[k]] == a {
                            let mut p = pos.clone();
                            p[k] += 1;
                            stack.push((t, p));
                        }
                    }
                }
            }
        }
        false
    };
    if n == 1 {
        return try_split(&cuts);
    }
    each_split(&mut cuts, 1, &mut try_split)
}

/// All comp-words of length at most `max_len`. Explores configurations
/// (state, per-head output) so it terminates in the presence of ε-cycles.
pub fn words_up_to<M: LazyMha>(m: &M, max_len: usize) -> BTreeSet<Vec<M::Letter>>
where
    M::Letter: Hash,
{
    let n = m.heads();
    let mut out = BTreeSet::new();
    let mut seen: HashSet<Config<M>> = HashSet::new();
    let mut cache: HashMap<M::State, Edges<M>> = HashMap::new();
    let mut stack: Vec<Config<M>> = m
        .initial_states()
        .into_iter()
        .map(|s| (s, vec![Vec::new(); n]))
        .collect();
    while let Some((s, outs)) = stack.pop() {
        if seen.contains(&(s.clone(), outs.clone())) {
            continue;
        }
        seen.insert((s.clone(), outs.clone()));
        if m.is_final(&s) {
            out.insert(outs.concat());
        }
        let total: usize = outs.iter().map(Vec::len).sum();
        let succ = cache.entry(s.clone()).or_insert_with(|| m.successors(&s));
        for (l, t) in succ.iter().cloned() {
            match l {
                Label::Eps => stack.push((t, outs.clone())),
                Label::Read(h, a) if total < max_len => {
                    let mut o = outs.clone();
                    o[h - 1].push(a);
                    stack.push((t, o));
                }
                Label::Read(..) => {}
            }
        }
    }
    out
}
