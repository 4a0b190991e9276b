use std::collections::{BTreeSet, VecDeque};
use std::fmt::Debug;

use indexmap::IndexSet;

use super::{Label, LazyMha, MultiheadedAutomaton, NfaLike};

/// Product of a multiheaded automaton with an NFA. Besides the control
/// state of `u`, a state holds the guessed NFA state at the start of every
/// head's part and the current NFA state of every head. A run is accepting
/// when each head ends where the next head's guess started and the last
/// head ends in a final state.
pub fn intersect<L, V>(u: &MultiheadedAutomaton<L>, v: &V) -> MultiheadedAutomaton<L>
where
    L: Clone + Ord + Debug,
    V: NfaLike<Letter = L>,
{
    let n = u.heads;
    // states of v reachable from its initial state
    let mut reach = vec![false; v.state_count()];
    let mut stack = vec![v.initial()];
    while let Some(s) = stack.pop() {
        if std::mem::replace(&mut reach[s], true) {
            continue;
        }
        stack.extend(v.eps(s));
        for a in &u.alphabet {
            stack.extend(v.step(s, a));
        }
    }
    let reachable: Vec<usize> = (0..v.state_count()).filter(|&s| reach[s]).collect();

    type Node = (usize, Vec<usize>, Vec<usize>);
    let mut nodes: IndexSet<Option<Node>> = IndexSet::new();
    nodes.insert(None);
    let mut transitions = Vec::new();
    let mut queue = VecDeque::new();
    let add = |nodes: &mut IndexSet<Option<Node>>, queue: &mut VecDeque<usize>, node: Node| {
        let (i, fresh) = nodes.insert_full(Some(node));
        if fresh {
            queue.push_back(i);
        }
        i
    };

    // initial guesses: head 1 starts in the initial state of v
    let mut guess = vec![v.initial(); n];
    loop {
        let i = add(
            &mut nodes,
            &mut queue,
            (u.initial, guess.clone(), guess.clone()),
        );
        transitions.push((0, Label::Eps, i));
        // next tuple over heads 2..n
        let mut k = n;
        loop {
            if k <= 1 {
                break;
            }
            let pos = reachable
                .iter()
                .position(|&s| s == guess[k - 1])
                .unwrap_or(0);
            if pos + 1 < reachable.len() {
                guess[k - 1] = reachable[pos + 1];
                break;
            }
            guess[k - 1] = reachable[0];
            k -= 1;
        }
        if k <= 1 {
            break;
        }
    }

    while let Some(i) = queue.pop_front() {
        let (q, start, cur) = nodes.get_index(i).cloned().flatten().expect("product node");
        for (p, l, q2) in u.transitions.iter().filter(|t| t.0 == q) {
            debug_assert_eq!(*p, q);
            match l {
                Label::Eps => {
                    let j = add(&mut nodes, &mut queue, (*q2, start.clone(), cur.clone()));
                    transitions.push((i, Label::Eps, j));
                }
                Label::Read(h, a) => {
                    for s in v.step(cur[h - 1], a) {
                        let mut c = cur.clone();
                        c[h - 1] = s;
                        let j = add(&mut nodes, &mut queue, (*q2, start.clone(), c));
                        transitions.push((i, l.clone(), j));
                    }
                }
            }
        }
        // ε-moves of v on a single head
        for h in 0..n {
            for s in v.eps(cur[h]) {
                let mut c = cur.clone();
                c[h] = s;
                let j = add(&mut nodes, &mut queue, (q, start.clone(), c));
                transitions.push((i, Label::Eps, j));
            }
        }
    }

    let finals: BTreeSet<usize> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, node)| {
            let (q, start, cur) = node.as_ref()?;
            let chained = (0..n - 1).all(|k| cur[k] == start[k + 1]);
            (u.finals.contains(q) && chained && v.is_final(cur[n - 1])).then_some(i)
        })
        .collect();
    transitions.sort();
    transitions.dedup();
    MultiheadedAutomaton {
        heads: n,
        states: nodes.len(),
        alphabet: u.alphabet.clone(),
        transitions,
        initial: 0,
        finals,
    }
}

/// What one NFA knows about a partially generated word: the states head 1
/// can be in, and for every later head the pairs (state where its part
/// began, state now).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tracker {
    pub head1: Vec<u32>,
    pub rel: Vec<Vec<(u32, u32)>>,
}

/// Product of a lazy multiheaded automaton with several NFAs, exploring
/// only reachable states. Instead of guessing the NFA state at every head
/// boundary up front, each later head carries a relation from start to
/// current state, so the product stays deterministic on the NFA side.
pub struct LazyIntersection<'a, M, V> {
    mha: &'a M,
    components: &'a [V],
    initial: Vec<Tracker>,
}

pub fn intersect_lazy<'a, M, V>(mha: &'a M, components: &'a [V]) -> LazyIntersection<'a, M, V>
where
    M: LazyMha,
    V: NfaLike<Letter = M::Letter>,
{
    let heads = mha.heads();
    let initial = components
        .iter()
        .map(|v| {
            let head1 = v
                .closure([v.initial()])
                .into_iter()
                .map(|s| s as u32)
                .collect();
            let identity: Vec<(u32, u32)> = (0..v.state_count())
                .flat_map(|p| {
                    v.closure([p])
                        .into_iter()
                        .map(move |q| (p as u32, q as u32))
                })
                .collect();
            Tracker {
                head1,
                rel: vec![identity; heads - 1],
            }
        })
        .collect();
    LazyIntersection {
        mha,
        components,
        initial,
    }
}

impl<M, V> LazyIntersection<'_, M, V>
where
    M: LazyMha,
    V: NfaLike<Letter = M::Letter>,
{
    fn advance(v: &V, t: &Tracker, head: usize, a: &M::Letter) -> Option<Tracker> {
        let mut t2 = t.clone();
        if head == 1 {
            let next: Vec<usize> = t
                .head1
                .iter()
                .flat_map(|&s| v.step(s as usize, a))
                .collect();
            t2.head1 = v.closure(next).into_iter().map(|s| s as u32).collect();
            if t2.head1.is_empty() {
                return None;
            }
        } else {
            let rel = &t.rel[head - 2];
            let mut next: Vec<(u32, u32)> = rel
                .iter()
                .flat_map(|&(p, q)| {
                    v.closure(v.step(q as usize, a))
                        .into_iter()
                        .map(move |q2| (p, q2 as u32))
                })
                .collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return None;
            }
            t2.rel[head - 2] = next;
        }
        Some(t2)
    }

    fn tracker_final(v: &V, t: &Tracker) -> bool {
        let mut reach: Vec<u32> = t.head1.clone();
        for rel in &t.rel {
            let mut next: Vec<u32> = rel
                .iter()
                .filter(|(p, _)| reach.binary_search(p).is_ok())
                .map(|&(_, q)| q)
                .collect();
            next.sort_unstable();
            next.dedup();
            reach = next;
        }
        reach.iter().any(|&s| v.is_final(s as usize))
    }
}

impl<M, V> LazyMha for LazyIntersection<'_, M, V>
where
    M: LazyMha,
    V: NfaLike<Letter = M::Letter>,
{
    type State = (M::State, Vec<Tracker>);
    type Letter = M::Letter;

    fn heads(&self) -> usize {
        self.mha.heads()
    }

    fn initial_states(&self) -> Vec<Self::State> {
        self.mha
            .initial_states()
            .into_iter()
            .map(|s| (s, self.initial.clone()))
            .collect()
    }

    fn is_final(&self, (s, ts): &Self::State) -> bool {
        self.mha.is_final(s)
            && self
                .components
                .iter()
                .zip(ts)
                .all(|(v, t)| Self::tracker_final(v, t))
    }

    fn successors(&self, (s, ts): &Self::State) -> Vec<(Label<M::Letter>, Self::State)> {
        let mut out = Vec::new();
        for (l, s2) in self.mha.successors(s) {
            match &l {
                Label::Eps => out.push((l, (s2, ts.clone()))),
                Label::Read(h, a) => {
                    let next: Option<Vec<Tracker>> = self
                        .components
                        .iter()
                        .zip(ts)
                        .map(|(v, t)| Self::advance(v, t, *h, a))
                        .collect();
                    if let Some(next) = next {
                        out.push((l, (s2, next)));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mha::{accepts, is_empty, witness, words_up_to, Nfa};

    fn anbncn() -> MultiheadedAutomaton<char> {
        MultiheadedAutomaton {
            heads: 3,
            states: 3,
            alphabet: vec!['a', 'b', 'c'],
            transitions: vec![
                (0, Label::Read(1, 'a'), 1),
                (1, Label::Read(2, 'b'), 2),
                (2, Label::Read(3, 'c'), 0),
            ],
            initial: 0,
            finals: BTreeSet::from([0]),
        }
    }

    /// a* b* c*
    fn abc_star() -> Nfa<char> {
        Nfa {
            states: 3,
            alphabet: vec!['a', 'b', 'c'],
            transitions: vec![
                (0, Some('a'), 0),
                (0, None, 1),
                (1, Some('b'), 1),
                (1, None, 2),
                (2, Some('c'), 2),
            ],
            initial: 0,
            finals: BTreeSet::from([2]),
        }
    }

    fn word(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn anbncn_with_regular_frame() {
        let w = intersect(&anbncn(), &abc_star());
        w.validate().unwrap();
        assert!(!is_empty(&w));
        assert_eq!(witness(&w).unwrap().word, Vec::<char>::new());
        assert_eq!(
            words_up_to(&w, 6),
            BTreeSet::from([vec![], word("abc"), word("aabbcc")])
        );
        let u = anbncn();
        let lazy_frame = [abc_star()];
        let lazy = intersect_lazy(&u, &lazy_frame);
        assert_eq!(words_up_to(&lazy, 6), words_up_to(&w, 6));
    }

    #[test]
    fn empty_nfa_gives_empty_product() {
        let v = Nfa {
            states: 1,
            alphabet: vec!['a', 'b', 'c'],
            transitions: vec![],
            initial: 0,
            finals: BTreeSet::new(),
        };
        assert!(is_empty(&intersect(&anbncn(), &v)));
        let frame = [v];
        assert!(is_empty(&intersect_lazy(&anbncn(), &frame)));
    }

    #[test]
    fn single_head_copy() {
        let v = abc_star();
        let u = v.as_single_head();
        let w = intersect(&u, &v);
        assert_eq!(words_up_to(&w, 5), words_up_to(&u, 5));
    }

    #[test]
    fn odd_length_frame() {
        // words with an odd number of letters: only aⁿbⁿcⁿ with n odd survive
        let v = Nfa {
            states: 2,
            alphabet: vec!['a', 'b', 'c'],
            transitions: ['a', 'b', 'c']
                .iter()
                .flat_map(|&x| [(0, Some(x), 1), (1, Some(x), 0)])
                .collect(),
            initial: 0,
            finals: BTreeSet::from([1]),
        };
        let w = intersect(&anbncn(), &v);
        assert_eq!(witness(&w).unwrap().word, word("abc"));
        assert!(!accepts(&w, &word("aabbcc")));
        assert!(accepts(&w, &word("aaabbbccc")));
        let u = anbncn();
        let frame = [v];
        let lazy = intersect_lazy(&u, &frame);
        assert_eq!(witness(&lazy).unwrap().word, word("abc"));
        assert!(accepts(&lazy, &word("aaabbbccc")));
        assert!(!accepts(&lazy, &word("aabbcc")));
    }
}
