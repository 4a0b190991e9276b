//! `B^{r1,r2}`: accepts marked computations in which the event where the
//! cycle leaves `r1` is linked to the event where it enters `r2`, by a
//! conflict or by belonging to the same barrier round.

use crate::dsl::Value;
use crate::mha::NfaLike;
use crate::semantics::{Cell, EventKind, Rank};

use super::ws::Marked;

const ADDRESSED: [EventKind; 4] = [
    EventKind::Load,
    EventKind::Store,
    EventKind::PopA,
    EventKind::PopB,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbState {
    Init,
    Accept,
    /// Seen the leave event of `r1`: its kind and cell.
    Watch(EventKind, Cell),
    /// Inside a barrier round after one endpoint; the rank seen last.
    Barrier(Rank),
}

#[derive(Clone, Debug)]
pub struct HbNfa {
    pub r1: Rank,
    pub r2: Rank,
    nodes: u32,
    domain: u32,
}

pub fn build_hb_nfa(r1: Rank, r2: Rank, nodes: u32, domain: u32) -> HbNfa {
    HbNfa {
        r1,
        r2,
        nodes,
        domain,
    }
}

impl HbNfa {
    pub fn index(&self, s: HbState) -> usize {
        let cells = (self.nodes * self.domain) as usize;
        match s {
            HbState::Init => 0,
            HbState::Accept => 1,
            HbState::Watch(k, c) => {
                let ki = ADDRESSED
                    .iter()
                    .position(|&x| x == k)
                    .expect("addressed kind");
                2 + ki * cells + ((c.rank - 1) * self.domain + c.addr) as usize
            }
            HbState::Barrier(r) => 2 + 4 * cells + (r - 1) as usize,
        }
    }

    pub fn state(&self, i: usize) -> HbState {
        let cells = (self.nodes * self.domain) as usize;
        match i {
            0 => HbState::Init,
            1 => HbState::Accept,
            _ if i < 2 + 4 * cells => {
                let j = i - 2;
                let c = (j % cells) as u32;
                HbState::Watch(
                    ADDRESSED[j / cells],
                    Cell::new(c / self.domain + 1, (c % self.domain) as Value),
                )
            }
            _ => HbState::Barrier((i - 2 - 4 * cells) as Rank + 1),
        }
    }

    fn endpoint(&self, m: &Marked) -> bool {
        (m.event.rank == self.r1 && m.leave) || (m.event.rank == self.r2 && m.enter)
    }

    pub fn next(&self, s: HbState, m: &Marked) -> Vec<HbState> {
        let e = &m.event;
        let writes = |k: EventKind| matches!(k, EventKind::Store | EventKind::PopB);
        let mut out = Vec::new();
        match s {
            HbState::Init => {
                if e.rank != self.r1 || !m.leave {
                    out.push(HbState::Init);
                }
                if e.rank == self.r1 && m.leave && e.kind != EventKind::Barrier {
                    if let Some(c) = e.addr {
                        out.push(HbState::Watch(e.kind, c));
                    }
                }
                if e.kind == EventKind::Barrier && self.endpoint(m) {
                    out.push(HbState::Barrier(e.rank));
                }
            }
            HbState::Watch(k, c) => {
                if e.addr != Some(c) || !writes(e.kind) {
                    out.push(s);
                }
                if e.addr == Some(c)
                    && e.rank == self.r2
                    && m.enter
                    && (writes(k) || writes(e.kind))
                {
                    out.push(HbState::Accept);
                }
            }
            HbState::Accept => out.push(HbState::Accept),
            HbState::Barrier(last) => {
                // a round lists its barriers by increasing rank; a smaller
                // rank starts the next round
                if e.kind == EventKind::Barrier && e.rank > last {
                    if self.endpoint(m) {
                        out.push(HbState::Accept);
                    } else if e.rank != self.r1 && e.rank != self.r2 {
                        out.push(HbState::Barrier(e.rank));
                    }
                }
            }
        }
        out
    }
}

impl NfaLike for HbNfa {
    type Letter = Marked;

    fn state_count(&self) -> usize {
        2 + 4 * (self.nodes * self.domain) as usize + self.nodes as usize
    }
    fn initial(&self) -> usize {
        0
    }
    fn is_final(&self, s: usize) -> bool {
        s == 1
    }
    fn step(&self, s: usize, a: &Marked) -> Vec<usize> {
        self.next(self.state(s), a)
            .into_iter()
            .map(|t| self.index(t))
            .collect()
    }
    fn eps(&self, _: usize) -> Vec<usize> {
        Vec::new()
    }
}
