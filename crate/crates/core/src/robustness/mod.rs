//! The decision procedure. A program is robust iff, for every cycle type,
//! no marked normal-form computation is accepted by all hb automata of
//! the type.

mod hb;
mod ws;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info};

use crate::dsl::Instance;
use crate::mha::{intersect_lazy, search_until, Label, Search};
use crate::semantics::{
    computation_to_json, Computation, EventJson, EventKind, Machine, Rank, SemanticsError,
};
use crate::traces::{happens_before, is_normal_form, CycCycle, CycSegment, EdgeKind, LinkKind};

pub use hb::{build_hb_nfa, HbNfa, HbState};
pub use ws::{
    build_marked_language, build_ws_language, GuessMode, Marked, MarkedAutomaton, MarkedState, Mu,
    WsAutomaton, WsState, PARTS,
};

/// Sequences of distinct ranks, each starting with its smallest rank, by
/// length and then lexicographically.
pub fn cycle_types(nodes: u32) -> Vec<Vec<Rank>> {
    fn extend(prefix: &mut Vec<Rank>, nodes: u32, len: usize, out: &mut Vec<Vec<Rank>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for r in prefix[0] + 1..=nodes {
            if !prefix.contains(&r) {
                prefix.push(r);
                extend(prefix, nodes, len, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    for len in 1..=nodes as usize {
        for first in 1..=nodes {
            extend(&mut vec![first], nodes, len, &mut out);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Cap on product states per cycle type.
    pub max_states: Option<usize>,
    pub guess: GuessMode,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_states: Some(500_000),
            guess: GuessMode::AtIssue,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub cycle_type: Vec<Rank>,
    /// The accepting run: head and marked letter per step.
    pub marked_run: Vec<(usize, Marked)>,
    pub computation: Computation,
    pub cuts: (usize, usize, usize),
    pub hb_cycle: CycCycle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Robust { explored: usize },
    NotRobust(Box<Counterexample>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RobustnessError {
    #[error(transparent)]
    Invalid(#[from] SemanticsError),
    #[error("resource bound exceeded: more than {cap} states for cycle type {cycle_type:?}")]
    ResourceBound { cycle_type: Vec<Rank>, cap: usize },
    #[error("internal error: witness for cycle type {cycle_type:?} rejected: {reason}")]
    WitnessRejected {
        cycle_type: Vec<Rank>,
        reason: String,
    },
}

enum TypeOutcome {
    Empty(usize),
    Found(Box<Counterexample>),
    /// Skipped because an earlier cycle type already has a counterexample.
    Cancelled,
}

/// Decides robustness of `inst`. Cycle types are checked in parallel on
/// the current rayon pool; the reported counterexample is the one of the
/// first cycle type in [`cycle_types`] order that has one. Types after a
/// found counterexample are abandoned, so a resource bound there does not
/// hide the verdict.
pub fn check_robustness(
    inst: &Instance,
    options: &CheckOptions,
) -> Result<Verdict, RobustnessError> {
    let marked = build_marked_language(inst, options.guess)?;
    let types = cycle_types(inst.nodes);
    info!(
        types = types.len(),
        nodes = inst.nodes,
        domain = inst.domain,
        "checking robustness"
    );
    let first_found = AtomicUsize::new(usize::MAX);
    let results: Vec<Result<TypeOutcome, RobustnessError>> = types
        .par_iter()
        .enumerate()
        .map(|(i, theta)| {
            let cancel = || first_found.load(Ordering::Relaxed) < i;
            if cancel() {
                return Ok(TypeOutcome::Cancelled);
            }
            let r = check_cycle_type(inst, &marked, theta, options, &cancel);
            if matches!(r, Ok(TypeOutcome::Found(_))) {
                first_found.fetch_min(i, Ordering::Relaxed);
            }
            r
        })
        .collect();
    let mut explored = 0;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(TypeOutcome::Found(c)) => return Ok(Verdict::NotRobust(c)),
            Ok(TypeOutcome::Empty(n)) => explored += n,
            Ok(TypeOutcome::Cancelled) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(Verdict::Robust { explored }),
    }
}

fn check_cycle_type(
    inst: &Instance,
    marked: &MarkedAutomaton,
    theta: &[Rank],
    options: &CheckOptions,
    cancel: &dyn Fn() -> bool,
) -> Result<TypeOutcome, RobustnessError> {
    let w = marked.clone().restricted_to(theta);
    let k = theta.len();
    let components: Vec<HbNfa> = (0..k)
        .map(|i| build_hb_nfa(theta[i], theta[(i + 1) % k], inst.nodes, inst.domain))
        .collect();
    let product = intersect_lazy(&w, &components);
    match search_until(&product, options.max_states, cancel) {
        None => Ok(TypeOutcome::Cancelled),
        Some(Search::Empty { explored }) => {
            debug!(?theta, explored, "no cycle");
            Ok(TypeOutcome::Empty(explored))
        }
        Some(Search::Exceeded { cap }) => Err(RobustnessError::ResourceBound {
            cycle_type: theta.to_vec(),
            cap,
        }),
        Some(Search::Found { witness, explored }) => {
            debug!(?theta, explored, len = witness.word.len(), "cycle found");
            let run: Vec<(usize, Marked)> = witness
                .run
                .into_iter()
                .filter_map(|l| match l {
                    Label::Eps => None,
                    Label::Read(h, m) => Some((h, m)),
                })
                .collect();
            let ce =
                reconstruct(w.ws().machine(), theta, run, &witness.word).map_err(|reason| {
                    RobustnessError::WitnessRejected {
                        cycle_type: theta.to_vec(),
                        reason,
                    }
                })?;
            Ok(TypeOutcome::Found(Box::new(ce)))
        }
    }
}

/// Checks the shape of a run of the marked automaton: pops come right
/// after their issue, the popB no earlier part than the popA, and nothing
/// else is emitted off head 1.
pub fn check_run_invariants(run: &[(usize, Marked)]) -> Result<(), String> {
    let mut i = 0;
    while i < run.len() {
        let (h, m) = run[i];
        let e = m.event;
        if e.is_pop() {
            return Err(format!(
                "step {i}: {} not preceded by its issue",
                e.kind.name()
            ));
        }
        if h != 1 {
            return Err(format!("step {i}: {} emitted on head {h}", e.kind.name()));
        }
        if e.kind.is_issue() {
            let ok = match (run.get(i + 1), run.get(i + 2)) {
                (Some(&(ha, a)), Some(&(hb, b))) => {
                    a.event.kind == EventKind::PopA
                        && b.event.kind == EventKind::PopB
                        && a.event.rank == e.rank
                        && b.event.rank == e.rank
                        && a.event.queue == e.queue
                        && b.event.queue == e.queue
                        && ha <= hb
                }
                _ => false,
            };
            if !ok {
                return Err(format!("step {i}: issue not followed by its popA and popB"));
            }
            i += 3;
        } else {
            i += 1;
        }
    }
    Ok(())
}

fn reconstruct(
    machine: &Machine,
    theta: &[Rank],
    run: Vec<(usize, Marked)>,
    word: &[Marked],
) -> Result<Counterexample, String> {
    check_run_invariants(&run)?;
    let computation: Computation = word.iter().map(|m| m.event).collect();
    if !machine.accepts(&computation) {
        return Err("not a computation of the program".into());
    }
    let mut sizes = [0usize; PARTS as usize];
    for (h, _) in &run {
        sizes[h - 1] += 1;
    }
    let cuts = (
        sizes[0],
        sizes[0] + sizes[1],
        sizes[0] + sizes[1] + sizes[2],
    );
    if !is_normal_form(&computation, cuts).map_err(|e| e.to_string())? {
        return Err(format!("not in normal form at cuts {cuts:?}"));
    }
    let hb = happens_before(&computation).map_err(|e| e.to_string())?;
    if !hb.is_violating() {
        return Err("happens-before relation is acyclic".into());
    }
    let find = |rank: Rank, enter: bool| {
        word.iter()
            .position(|m| m.event.rank == rank && if enter { m.enter } else { m.leave })
            .ok_or_else(|| {
                format!(
                    "rank {rank} has no {} mark",
                    if enter { "enter" } else { "leave" }
                )
            })
    };
    let non_pop_of = |x: usize| {
        let g = hb.groups.of[x];
        (0..computation.len())
            .filter(|&y| {
                hb.groups.of[y] == g
                    && !computation[y].is_pop()
                    && computation[y].rank == computation[x].rank
            })
            .min()
            .ok_or_else(|| format!("event {x} has no issuing event"))
    };
    let k = theta.len();
    let mut segments = Vec::with_capacity(k);
    for (i, &r) in theta.iter().enumerate() {
        let a = find(r, true)?;
        let d = find(r, false)?;
        let next_a = find(theta[(i + 1) % k], true)?;
        let link = if hb.has_edge(d, next_a, EdgeKind::Cf) {
            LinkKind::Cf
        } else {
            LinkKind::Eq
        };
        segments.push(CycSegment {
            rank: r,
            a,
            b: non_pop_of(a)?,
            c: non_pop_of(d)?,
            d,
            link,
        });
    }
    let hb_cycle = CycCycle { segments };
    if !hb_cycle.verify(&computation, &hb) {
        return Err(format!("marked events do not form a cycle: {hb_cycle:?}"));
    }
    Ok(Counterexample {
        cycle_type: theta.to_vec(),
        marked_run: run,
        computation,
        cuts,
        hb_cycle,
    })
}

/// JSON shape of a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub verdict: String,
    pub cycle_type: Option<Vec<Rank>>,
    pub computation: Option<Vec<EventJson>>,
    pub hb_cycle: Option<Vec<CycSegment>>,
    /// Search bound for verdicts that only hold up to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

impl Verdict {
    pub fn is_robust(&self) -> bool {
        matches!(self, Verdict::Robust { .. })
    }

    pub fn to_json(&self) -> VerdictJson {
        match self {
            Verdict::Robust { .. } => VerdictJson {
                verdict: "robust".into(),
                cycle_type: None,
                computation: None,
                hb_cycle: None,
                bound: None,
            },
            Verdict::NotRobust(c) => VerdictJson {
                verdict: "not_robust".into(),
                cycle_type: Some(c.cycle_type.clone()),
                computation: Some(computation_to_json(&c.computation)),
                hb_cycle: Some(c.hb_cycle.segments.clone()),
                bound: None,
            },
        }
    }
}

pub fn strip_marks(word: &[Marked]) -> Computation {
    word.iter().map(|m| m.event).collect()
}
