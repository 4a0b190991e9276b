//! Happens-before over computations: program order, conflict order and
//! identity; violation detection, normal-form recognition and extraction of
//! cycles in which every process is entered and left once.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::Value;
use crate::semantics::{format_event, sequence_numbers, Event, EventKind, Rank};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("event {index}: {kind} without a matching {missing}")]
    UnmatchedPop {
        index: usize,
        kind: &'static str,
        missing: &'static str,
    },
    #[error("cuts ({0}, {1}, {2}) out of range for a computation of length {3}")]
    BadCuts(usize, usize, usize, usize),
}

/// Identity classes: events of one read/write command, or of one barrier
/// round, share a group. Every other event is alone in its group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Groups {
    pub of: Vec<usize>,
    pub count: usize,
}

impl Groups {
    pub fn new(events: &[Event]) -> Result<Groups, TraceError> {
        let seqs = sequence_numbers(events);
        let mut issues: HashMap<(Rank, Value, u32), usize> = HashMap::new();
        let mut popped_a: HashMap<(Rank, Value), u32> = HashMap::new();
        let mut blocks: HashMap<u32, usize> = HashMap::new();
        let mut of = Vec::with_capacity(events.len());
        let mut count = 0;
        let mut fresh = || {
            count += 1;
            count - 1
        };
        for (i, (e, seq)) in events.iter().zip(seqs).enumerate() {
            let q = e.queue.unwrap_or(0);
            let g = match e.kind {
                EventKind::Read | EventKind::Write => {
                    let g = fresh();
                    issues.insert((e.rank, q, seq.unwrap_or(0)), g);
                    g
                }
                EventKind::PopA => {
                    *popped_a.entry((e.rank, q)).or_insert(0) += 1;
                    *issues
                        .get(&(e.rank, q, seq.unwrap_or(0)))
                        .ok_or(TraceError::UnmatchedPop {
                            index: i,
                            kind: "popA",
                            missing: "read or write",
                        })?
                }
                EventKind::PopB => {
                    let s = seq.unwrap_or(0);
                    if s >= popped_a.get(&(e.rank, q)).copied().unwrap_or(0) {
                        return Err(TraceError::UnmatchedPop {
                            index: i,
                            kind: "popB",
                            missing: "popA",
                        });
                    }
                    issues[&(e.rank, q, s)]
                }
                EventKind::Barrier => *blocks.entry(seq.unwrap_or(0)).or_insert_with(&mut fresh),
                _ => fresh(),
            };
            of.push(g);
        }
        Ok(Groups { of, count })
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.count];
        for (i, &g) in self.of.iter().enumerate() {
            m[g].push(i);
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Po,
    Cf,
    Eq,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Po => "po",
            EdgeKind::Cf => "cf",
            EdgeKind::Eq => "eq",
        }
    }
}

/// `hb = po ∪ cf ≡` over event indices. `eq` holds both directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HbRelation {
    pub len: usize,
    pub po: Vec<(usize, usize)>,
    pub cf: Vec<(usize, usize)>,
    pub eq: Vec<(usize, usize)>,
    pub groups: Groups,
    adjacency: Vec<Vec<(usize, EdgeKind)>>,
}

pub fn happens_before(events: &[Event]) -> Result<HbRelation, TraceError> {
    let groups = Groups::new(events)?;
    let n = events.len();

    let mut po = Vec::new();
    let mut last: HashMap<Rank, usize> = HashMap::new();
    for (i, e) in events.iter().enumerate() {
        if e.is_pop() {
            continue;
        }
        if let Some(p) = last.insert(e.rank, i) {
            po.push((p, i));
        }
    }

    let mut cf = Vec::new();
    for i in 0..n {
        let Some(cell) = events[i].addr else { continue };
        for j in i + 1..n {
            if events[j].addr != Some(cell) {
                continue;
            }
            if events[i].kind.is_write() || events[j].kind.is_write() {
                cf.push((i, j));
            }
            if events[j].kind.is_write() {
                break;
            }
        }
    }

    po.sort_unstable();
    cf.sort_unstable();

    let mut eq = Vec::new();
    for m in groups.members() {
        for &a in &m {
            for &b in &m {
                if a != b {
                    eq.push((a, b));
                }
            }
        }
    }
    eq.sort_unstable();

    let mut adjacency = vec![Vec::new(); n];
    for (list, kind) in [
        (&po, EdgeKind::Po),
        (&cf, EdgeKind::Cf),
        (&eq, EdgeKind::Eq),
    ] {
        for &(a, b) in list {
            adjacency[a].push((b, kind));
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(HbRelation {
        len: n,
        po,
        cf,
        eq,
        groups,
        adjacency,
    })
}

/// A cycle `nodes[0] → nodes[1] → … → nodes[0]`; `edges[i]` labels the edge
/// leaving `nodes[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HbCycle {
    pub nodes: Vec<usize>,
    pub edges: Vec<EdgeKind>,
}

impl HbRelation {
    pub fn successors(&self, v: usize) -> &[(usize, EdgeKind)] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize, kind: EdgeKind) -> bool {
        self.adjacency[a].binary_search(&(b, kind)).is_ok()
    }

    fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<(usize, EdgeKind)>> {
        let mut parent: Vec<Option<(usize, EdgeKind)>> = vec![None; self.len];
        let mut seen = vec![false; self.len];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, k) = parent[cur].expect("bfs parent");
                    path.push((p, k));
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(w, k) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, k));
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Shortest cycle that uses a po or cf edge. Ties go to the first such
    /// edge in index order.
    pub fn violation_cycle(&self) -> Option<HbCycle> {
        let mut best: Option<HbCycle> = None;
        let mut links: Vec<(usize, usize, EdgeKind)> = self
            .po
            .iter()
            .map(|&(a, b)| (a, b, EdgeKind::Po))
            .chain(self.cf.iter().map(|&(a, b)| (a, b, EdgeKind::Cf)))
            .collect();
        links.sort_unstable();
        for (u, v, k) in links {
            let Some(back) = self.shortest_path(v, u) else {
                continue;
            };
            if best
                .as_ref()
                .is_some_and(|b| b.nodes.len() <= back.len() + 1)
            {
                continue;
            }
            let mut nodes = vec![u];
            let mut edges = vec![k];
            for (p, pk) in back {
                if p != v || !nodes.contains(&v) {
                    nodes.push(p);
                    edges.push(pk);
                }
            }
            best = Some(HbCycle { nodes, edges });
        }
        best
    }

    pub fn is_violating(&self) -> bool {
        self.po
            .iter()
            .chain(self.cf.iter())
            .any(|&(u, v)| self.shortest_path(v, u).is_some())
    }
}

/// Whether the happens-before relation of `events` has a cycle that is not
/// contained in the identity relation.
pub fn is_violating(events: &[Event]) -> Result<bool, TraceError> {
    Ok(happens_before(events)?.is_violating())
}

/// Normal-form structure of one computation: for every pair of identity
/// classes that must stay ordered, the positions where they appear the
/// wrong way round.
struct NormalFormInfo {
    len: usize,
    // first index from which on only pops occur
    pops_from: usize,
    // (h, g): h < g, must not lie in the same part
    inversions: Vec<(usize, usize)>,
}

fn normal_form_info(events: &[Event], groups: &Groups) -> NormalFormInfo {
    let len = events.len();
    let pops_from = events
        .iter()
        .rposition(|e| !e.is_pop())
        .map_or(0, |i| i + 1);
    let members = groups.members();
    // non-pop extent of every group
    let mut span: Vec<Option<(usize, usize)>> = vec![None; groups.count];
    for (i, e) in events.iter().enumerate() {
        if !e.is_pop() {
            let g = groups.of[i];
            span[g] = Some(span[g].map_or((i, i), |(lo, _)| (lo, i)));
        }
    }
    let mut inversions = Vec::new();
    for (g, gs) in span.iter().enumerate() {
        let Some((g_lo, _)) = gs else { continue };
        for (h, hs) in span.iter().enumerate() {
            let Some((_, h_hi)) = hs else { continue };
            if g == h || g_lo >= h_hi {
                continue;
            }
            // some non-pop of g precedes some non-pop of h: every member of g
            // must precede every member of h within a part
            for &x in &members[h] {
                for &y in &members[g] {
                    if x < y {
                        inversions.push((x, y));
                    }
                }
            }
        }
    }
    inversions.sort_unstable();
    inversions.dedup();
    NormalFormInfo {
        len,
        pops_from,
        inversions,
    }
}

/// Whether `events` split at `cuts` into `τ1 τ2 τ3 τ4` is in normal form.
pub fn is_normal_form(events: &[Event], cuts: (usize, usize, usize)) -> Result<bool, TraceError> {
    let (c1, c2, c3) = cuts;
    if !(c1 <= c2 && c2 <= c3 && c3 <= events.len()) {
        return Err(TraceError::BadCuts(c1, c2, c3, events.len()));
    }
    let groups = Groups::new(events)?;
    let info = normal_form_info(events, &groups);
    if c1 < info.pops_from {
        return Ok(false);
    }
    let part = |i: usize| [c1, c2, c3].iter().filter(|&&c| c <= i).count();
    Ok(info.inversions.iter().all(|&(h, g)| part(h) != part(g)))
}

/// Cut positions under which `events` is in normal form, if any. Picks
/// the fewest cuts, each as late as possible; unused cuts sit at the end.
pub fn normal_form_cuts(events: &[Event]) -> Result<Option<(usize, usize, usize)>, TraceError> {
    let groups = Groups::new(events)?;
    let info = normal_form_info(events, &groups);
    // every inversion (h, g] needs a cut c with h < c <= g, and c1 >= pops_from
    let mut intervals: Vec<(usize, usize)> = info
        .inversions
        .iter()
        .map(|&(h, g)| (g, (h + 1).max(info.pops_from)))
        .collect();
    intervals.sort_unstable();
    let mut cuts: Vec<usize> = Vec::new();
    for (hi, lo) in intervals {
        if lo > hi {
            return Ok(None);
        }
        if cuts.last().is_some_and(|&c| c >= lo) {
            continue;
        }
        cuts.push(hi);
        if cuts.len() > 3 {
            return Ok(None);
        }
    }
    let c1 = cuts.first().copied().unwrap_or(info.len);
    let c2 = cuts.get(1).copied().unwrap_or(info.len);
    let c3 = cuts.get(2).copied().unwrap_or(info.len);
    Ok(Some((c1.max(info.pops_from), c2, c3)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Cf,
    Eq,
}

/// `a ≡* b po* c ≡* d` on one rank, linked from `d` to the next segment's `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycSegment {
    pub rank: Rank,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub link: LinkKind,
}

/// A happens-before cycle visiting each rank at most once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycCycle {
    pub segments: Vec<CycSegment>,
}

impl CycCycle {
    pub fn ranks(&self) -> Vec<Rank> {
        self.segments.iter().map(|s| s.rank).collect()
    }

    /// Checks the shape against the relation: segment conditions, links,
    /// distinct ranks, and at least one po step or cf link.
    pub fn verify(&self, events: &[Event], hb: &HbRelation) -> bool {
        let k = self.segments.len();
        if k == 0 {
            return false;
        }
        let same_group = |x: usize, y: usize| hb.groups.of[x] == hb.groups.of[y];
        let mut nontrivial = false;
        for (i, s) in self.segments.iter().enumerate() {
            let idx = [s.a, s.b, s.c, s.d];
            if idx
                .iter()
                .any(|&x| x >= events.len() || events[x].rank != s.rank)
            {
                return false;
            }
            if events[s.b].is_pop() || events[s.c].is_pop() || s.b > s.c {
                return false;
            }
            if !same_group(s.a, s.b) || !same_group(s.c, s.d) {
                return false;
            }
            if s.b != s.c {
                nontrivial = true;
            }
            let next = &self.segments[(i + 1) % k];
            let ok = match s.link {
                LinkKind::Cf => {
                    nontrivial = true;
                    hb.has_edge(s.d, next.a, EdgeKind::Cf)
                }
                LinkKind::Eq => {
                    hb.has_edge(s.d, next.a, EdgeKind::Eq)
                        && events[s.d].kind == EventKind::Barrier
                        && events[next.a].kind == EventKind::Barrier
                }
            };
            if !ok {
                return false;
            }
        }
        let mut ranks = self.ranks();
        ranks.sort_unstable();
        ranks.dedup();
        ranks.len() == k && nontrivial
    }
}

/// Turns the shortest violation cycle into one that enters and leaves every
/// rank once, merging segments of repeated ranks.
pub fn extract_cyc_cycle(events: &[Event]) -> Result<Option<CycCycle>, TraceError> {
    let hb = happens_before(events)?;
    let Some(cycle) = hb.violation_cycle() else {
        return Ok(None);
    };
    Ok(cyc_from_cycle(events, &hb, &cycle))
}

pub fn cyc_from_cycle(events: &[Event], hb: &HbRelation, cycle: &HbCycle) -> Option<CycCycle> {
    let m = cycle.nodes.len();
    let is_link = |i: usize| {
        let (u, v) = (cycle.nodes[i], cycle.nodes[(i + 1) % m]);
        match cycle.edges[i] {
            EdgeKind::Cf => Some(LinkKind::Cf),
            EdgeKind::Eq if events[u].rank != events[v].rank => Some(LinkKind::Eq),
            _ => None,
        }
    };
    let first_link = (0..m).find(|&i| is_link(i).is_some())?;
    // walk the cycle starting right after a link
    let mut segments = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for step in 1..=m {
        let i = (first_link + step) % m;
        current.push(cycle.nodes[i]);
        if let Some(link) = is_link(i) {
            let issue_of = |x: usize| {
                let g = hb.groups.of[x];
                (0..events.len())
                    .find(|&y| hb.groups.of[y] == g && !events[y].is_pop())
                    .unwrap_or(x)
            };
            let non_pops: Vec<usize> = current
                .iter()
                .copied()
                .filter(|&x| !events[x].is_pop())
                .collect();
            let a = current[0];
            let d = *current.last().unwrap();
            let (b, c) = match (non_pops.first(), non_pops.last()) {
                (Some(&b), Some(&c)) => (b, c),
                _ => (issue_of(a), issue_of(a)),
            };
            segments.push(CycSegment {
                rank: events[a].rank,
                a,
                b,
                c,
                d,
                link,
            });
            current.clear();
        }
    }
    // merge repeated ranks
    'merge: loop {
        let k = segments.len();
        for i in 0..k {
            for j in i + 1..k {
                if segments[i].rank != segments[j].rank {
                    continue;
                }
                let (si, sj) = (segments[i], segments[j]);
                if si.b <= sj.c {
                    let merged = CycSegment {
                        rank: si.rank,
                        a: si.a,
                        b: si.b,
                        c: sj.c,
                        d: sj.d,
                        link: sj.link,
                    };
                    let mut next = segments[..i].to_vec();
                    next.push(merged);
                    next.extend_from_slice(&segments[j + 1..]);
                    segments = next;
                } else {
                    let merged = CycSegment {
                        rank: si.rank,
                        a: sj.a,
                        b: sj.b,
                        c: si.c,
                        d: si.d,
                        link: si.link,
                    };
                    let mut next = vec![merged];
                    next.extend_from_slice(&segments[i + 1..j]);
                    segments = next;
                }
                continue 'merge;
            }
        }
        break;
    }
    let start = (0..segments.len()).min_by_key(|&i| segments[i].rank)?;
    segments.rotate_left(start);
    let cyc = CycCycle { segments };
    cyc.verify(events, hb).then_some(cyc)
}

/// The computation obtained by deleting the last non-pop event together
/// with everything identified with it. `None` for computations without
/// non-pop events.
pub fn cancel_last(events: &[Event]) -> Result<Option<Vec<Event>>, TraceError> {
    let groups = Groups::new(events)?;
    let Some(last) = events.iter().rposition(|e| !e.is_pop()) else {
        return Ok(None);
    };
    let g = groups.of[last];
    Ok(Some(
        events
            .iter()
            .enumerate()
            .filter(|(i, _)| groups.of[*i] != g)
            .map(|(_, e)| *e)
            .collect(),
    ))
}

/// Graphviz rendering of the happens-before graph; `eq` is drawn once per
/// unordered pair.
pub fn to_dot(events: &[Event], hb: &HbRelation) -> String {
    let seqs = sequence_numbers(events);
    let mut out =
        String::from("digraph hb {\n  rankdir=TB;\n  node [shape=box, fontname=monospace];\n");
    for (i, e) in events.iter().enumerate() {
        let _ = writeln!(out, "  e{i} [label=\"{i}: {}\"];", format_event(e, seqs[i]));
    }
    for &(a, b) in &hb.po {
        let _ = writeln!(out, "  e{a} -> e{b} [label=po];");
    }
    for &(a, b) in &hb.cf {
        let _ = writeln!(out, "  e{a} -> e{b} [label=cf, color=red];");
    }
    for &(a, b) in &hb.eq {
        if a < b {
            let _ = writeln!(out, "  e{a} -> e{b} [label=eq, dir=both, style=dashed];");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Cell;

    fn w(rank: Rank) -> Event {
        Event::new(EventKind::Write, rank, None, Some(0))
    }
    fn pa(rank: Rank, cell: (Rank, Value)) -> Event {
        Event::new(
            EventKind::PopA,
            rank,
            Some(Cell::new(cell.0, cell.1)),
            Some(0),
        )
    }
    fn pb(rank: Rank, cell: (Rank, Value)) -> Event {
        Event::new(
            EventKind::PopB,
            rank,
            Some(Cell::new(cell.0, cell.1)),
            Some(0),
        )
    }
    fn ld(rank: Rank, addr: Value) -> Event {
        Event::new(EventKind::Load, rank, Some(Cell::new(rank, addr)), None)
    }

    /// The violating computation of the introductory example (x = 0, y = 1).
    pub(crate) fn tau_onetoone() -> Vec<Event> {
        vec![
            w(1),
            w(2),
            pa(2, (2, 0)),
            pa(1, (1, 0)),
            Event::barrier(1),
            Event::barrier(2),
            ld(1, 1),
            pb(2, (1, 1)),
            pb(1, (2, 1)),
        ]
    }

    /// Its normal-form rearrangement.
    fn tau_onetoone_nf() -> Vec<Event> {
        vec![
            w(1),
            pa(1, (1, 0)),
            w(2),
            pa(2, (2, 0)),
            Event::barrier(1),
            Event::barrier(2),
            ld(1, 1),
            pb(1, (2, 1)),
            pb(2, (1, 1)),
        ]
    }

    #[test]
    fn onetoone_relation() {
        let t = tau_onetoone();
        let hb = happens_before(&t).unwrap();
        assert_eq!(hb.po, vec![(0, 4), (1, 5), (4, 6)]);
        assert_eq!(hb.cf, vec![(6, 7)]);
        for (a, b) in [(0, 3), (0, 8), (3, 8), (1, 2), (1, 7), (2, 7), (4, 5)] {
            assert!(hb.has_edge(a, b, EdgeKind::Eq) && hb.has_edge(b, a, EdgeKind::Eq));
        }
        assert_eq!(hb.eq.len(), 14);
        assert!(hb.is_violating());
        let cyc = hb.violation_cycle().unwrap();
        assert_eq!(cyc.nodes.len(), 5);
    }

    #[test]
    fn empty_and_independent() {
        let hb = happens_before(&[]).unwrap();
        assert!(hb.po.is_empty() && hb.cf.is_empty() && hb.eq.is_empty());
        assert!(!is_violating(&[]).unwrap());
        let s = |a| Event::new(EventKind::Store, 1, Some(Cell::new(1, a)), None);
        let hb = happens_before(&[s(0), s(1)]).unwrap();
        assert!(hb.cf.is_empty());
    }

    #[test]
    fn unmatched_pop_is_an_error() {
        assert!(matches!(
            happens_before(&[pa(1, (1, 0))]),
            Err(TraceError::UnmatchedPop { index: 0, .. })
        ));
        assert!(matches!(
            happens_before(&[w(1), pb(1, (1, 0))]),
            Err(TraceError::UnmatchedPop { index: 1, .. })
        ));
    }

    #[test]
    fn onetoone_cyc_cycle() {
        let t = tau_onetoone();
        let cyc = extract_cyc_cycle(&t).unwrap().unwrap();
        assert_eq!(
            cyc.segments,
            vec![
                CycSegment {
                    rank: 1,
                    a: 4,
                    b: 4,
                    c: 6,
                    d: 6,
                    link: LinkKind::Cf
                },
                CycSegment {
                    rank: 2,
                    a: 7,
                    b: 1,
                    c: 5,
                    d: 5,
                    link: LinkKind::Eq
                },
            ]
        );
        let nf = tau_onetoone_nf();
        let cyc = extract_cyc_cycle(&nf).unwrap().unwrap();
        assert_eq!(cyc.ranks(), vec![1, 2]);
    }

    #[test]
    fn normal_form_of_the_example() {
        let nf = tau_onetoone_nf();
        assert!(is_normal_form(&nf, (7, 9, 9)).unwrap());
        assert!(is_normal_form(&nf, (7, 8, 9)).unwrap());
        assert!(!is_normal_form(&nf, (6, 9, 9)).unwrap());
        assert_eq!(normal_form_cuts(&nf).unwrap(), Some((7, 9, 9)));
        let t = tau_onetoone();
        for c1 in 0..=9 {
            for c2 in c1..=9 {
                for c3 in c2..=9 {
                    assert!(!is_normal_form(&t, (c1, c2, c3)).unwrap());
                }
            }
        }
        assert_eq!(normal_form_cuts(&t).unwrap(), None);
        assert!(is_normal_form(&[], (0, 0, 0)).unwrap());
        assert!(is_normal_form(&nf, (3, 2, 9)).is_err());
        assert!(is_normal_form(&nf, (0, 0, 10)).is_err());
    }

    #[test]
    fn pops_need_separate_parts_when_reordered() {
        // pops of w2 before those of w1 must not share a part with them
        let t = vec![
            w(1),
            w(2),
            pa(2, (2, 0)),
            pb(2, (1, 1)),
            pa(1, (1, 0)),
            pb(1, (2, 1)),
        ];
        assert_eq!(normal_form_cuts(&t).unwrap(), Some((4, 6, 6)));
        assert!(!is_normal_form(&t, (2, 6, 6)).unwrap());
    }

    #[test]
    fn cancellation_drops_identity_class() {
        let t = tau_onetoone();
        let c = cancel_last(&t).unwrap().unwrap();
        assert_eq!(c.len(), 8);
        assert!(!c.iter().any(|e| e.kind == EventKind::Load));
        let c2 = cancel_last(&c).unwrap().unwrap();
        assert_eq!(c2.len(), 6);
        assert!(cancel_last(&[]).unwrap().is_none());
    }

    #[test]
    fn dot_mentions_every_edge() {
        let t = tau_onetoone();
        let hb = happens_before(&t).unwrap();
        let dot = to_dot(&t, &hb);
        assert_eq!(dot.matches("label=po").count(), 3);
        assert_eq!(dot.matches("label=cf").count(), 1);
        assert_eq!(dot.matches("label=eq").count(), 7);
    }
}
