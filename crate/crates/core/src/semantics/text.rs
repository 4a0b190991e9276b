//! Text and JSON forms of computations.
//!
//! Text: one event per line, `kind rank (r,a)|⊥ [q=<id>] [#<seq>]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{sequence_numbers, Cell, Event, EventKind, Rank};
use crate::dsl::Value;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TextError {
    pub line: usize,
    pub message: String,
}

pub fn format_event(e: &Event, seq: Option<u32>) -> String {
    let mut s = format!("{} {} ", e.kind.name(), e.rank);
    match e.addr {
        Some(c) => s.push_str(&format!("({},{})", c.rank, c.addr)),
        None => s.push('⊥'),
    }
    if let Some(q) = e.queue {
        s.push_str(&format!(" q={q}"));
    }
    if let Some(n) = seq {
        s.push_str(&format!(" #{n}"));
    }
    s
}

pub fn format_computation(events: &[Event]) -> String {
    let seqs = sequence_numbers(events);
    let mut out = String::new();
    for (e, n) in events.iter().zip(seqs) {
        out.push_str(&format_event(e, n));
        out.push('\n');
    }
    out
}

fn parse_kind(s: &str) -> Option<EventKind> {
    EventKind::ALL.into_iter().find(|k| k.name() == s)
}

/// Parses the text form. Blank lines and `//` comments are skipped;
/// sequence annotations, when present, must match their position.
pub fn parse_computation(text: &str) -> Result<Vec<Event>, TextError> {
    let mut events = Vec::new();
    let mut given = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split("//").next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |m: String| TextError { line, message: m };
        let mut parts = content.split_whitespace();
        let kind_s = parts.next().unwrap_or_default();
        let kind =
            parse_kind(kind_s).ok_or_else(|| err(format!("unknown event kind `{kind_s}`")))?;
        let rank: Rank = parts
            .next()
            .and_then(|r| r.parse().ok())
            .filter(|&r| r >= 1)
            .ok_or_else(|| err("expected a rank >= 1".into()))?;
        let addr_s = parts
            .next()
            .ok_or_else(|| err("expected an address or ⊥".into()))?;
        let addr = if addr_s == "⊥" || addr_s == "_" {
            None
        } else {
            let inner = addr_s
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err(format!("bad address `{addr_s}`")))?;
            let (r, a) = inner
                .split_once(',')
                .ok_or_else(|| err(format!("bad address `{addr_s}`")))?;
            let r: Rank = r
                .trim()
                .parse()
                .map_err(|_| err(format!("bad address `{addr_s}`")))?;
            let a: Value = a
                .trim()
                .parse()
                .map_err(|_| err(format!("bad address `{addr_s}`")))?;
            Some(Cell::new(r, a))
        };
        let mut queue = None;
        let mut seq = None;
        for p in parts {
            if let Some(q) = p.strip_prefix("q=") {
                queue = Some(
                    q.parse::<Value>()
                        .map_err(|_| err(format!("bad queue `{p}`")))?,
                );
            } else if let Some(n) = p.strip_prefix('#') {
                seq = Some(
                    n.parse::<u32>()
                        .map_err(|_| err(format!("bad sequence number `{p}`")))?,
                );
            } else {
                return Err(err(format!("unexpected `{p}`")));
            }
        }
        let needs_addr = matches!(
            kind,
            EventKind::Load | EventKind::Store | EventKind::PopA | EventKind::PopB
        );
        if needs_addr != addr.is_some() {
            return Err(err(format!(
                "`{}` {} an address",
                kind.name(),
                if needs_addr { "needs" } else { "takes no" }
            )));
        }
        if kind.uses_queue() != queue.is_some() {
            return Err(err(format!(
                "`{}` {} a queue",
                kind.name(),
                if kind.uses_queue() {
                    "needs"
                } else {
                    "takes no"
                }
            )));
        }
        events.push(Event::new(kind, rank, addr, queue));
        given.push((line, seq));
    }
    let derived = sequence_numbers(&events);
    for ((line, g), d) in given.into_iter().zip(derived) {
        if let Some(g) = g {
            if Some(g) != d {
                return Err(TextError {
                    line,
                    message: format!("sequence number #{g} does not match position"),
                });
            }
        }
    }
    Ok(events)
}

/// JSON shape of one event: `{kind, rank, addr: [r, a] | null, queue, seq}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventJson {
    pub kind: EventKind,
    pub rank: Rank,
    pub addr: Option<(Rank, Value)>,
    pub queue: Option<Value>,
    pub seq: Option<u32>,
}

pub fn computation_to_json(events: &[Event]) -> Vec<EventJson> {
    events
        .iter()
        .zip(sequence_numbers(events))
        .map(|(e, seq)| EventJson {
            kind: e.kind,
            rank: e.rank,
            addr: e.addr.map(|c| (c.rank, c.addr)),
            queue: e.queue,
            seq,
        })
        .collect()
}

pub fn computation_from_json(items: &[EventJson]) -> Vec<Event> {
    items
        .iter()
        .map(|j| {
            Event::new(
                j.kind,
                j.rank,
                j.addr.map(|(r, a)| Cell::new(r, a)),
                j.queue,
            )
        })
        .collect()
}
