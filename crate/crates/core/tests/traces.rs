use pgasrob::corpus;
use pgasrob::dsl::{parse_program, Instance};
use pgasrob::semantics::Machine;
use pgasrob::traces::{
    cancel_last, extract_cyc_cycle, happens_before, is_normal_form, is_violating, normal_form_cuts,
};

fn machine(src: &str, n: u32) -> Machine {
    Machine::new(&Instance::with_default_domain(
        parse_program(src).unwrap(),
        n,
    ))
    .unwrap()
}

fn brute_cuts(events: &[pgasrob::Event]) -> bool {
    let n = events.len();
    (0..=n).any(|c1| {
        (c1..=n).any(|c2| (c2..=n).any(|c3| is_normal_form(events, (c1, c2, c3)).unwrap()))
    })
}

#[test]
fn cut_search_agrees_with_brute_force() {
    for (src, n, len) in [
        (corpus::ONETOONE_BARE, 2, 9),
        (corpus::RING3, 2, 8),
        (corpus::GPI_TWO_QUEUES, 2, 9),
    ] {
        let m = machine(src, n);
        for c in m.enumerate_computations(len) {
            let found = normal_form_cuts(&c).unwrap();
            if let Some(cuts) = found {
                assert!(is_normal_form(&c, cuts).unwrap(), "{c:?} {cuts:?}");
            }
            assert_eq!(found.is_some(), brute_cuts(&c), "{c:?}");
        }
    }
}

#[test]
fn violation_iff_cyc_cycle() {
    let mut violating = 0;
    for (src, n, len) in [
        (corpus::ONETOONE_BARE, 2, 9),
        (corpus::RING3, 2, 8),
        (corpus::PRODUCER_CONSUMER, 2, 10),
    ] {
        let m = machine(src, n);
        for c in m.enumerate_computations(len) {
            let v = is_violating(&c).unwrap();
            let cyc = extract_cyc_cycle(&c).unwrap();
            assert_eq!(v, cyc.is_some(), "{c:?}");
            violating += v as usize;
        }
    }
    assert!(violating > 0);
}

#[test]
fn cancellation_keeps_the_relation_on_survivors() {
    let m = machine(corpus::ONETOONE_BARE, 2);
    for c in m.enumerate_computations(9) {
        let Some(shorter) = cancel_last(&c).unwrap() else {
            continue;
        };
        assert!(m.accepts(&shorter), "{c:?}");
        let full = happens_before(&c).unwrap();
        let part = happens_before(&shorter).unwrap();
        // map surviving events to their positions in the shorter computation
        let g = full.groups.of[c.iter().rposition(|e| !e.is_pop()).unwrap()];
        let keep: Vec<usize> = (0..c.len()).filter(|&i| full.groups.of[i] != g).collect();
        let pos = |i: usize| keep.iter().position(|&k| k == i);
        let project = |edges: &[(usize, usize)]| {
            let mut v: Vec<_> = edges
                .iter()
                .filter_map(|&(a, b)| Some((pos(a)?, pos(b)?)))
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(project(&full.po), part.po);
        assert_eq!(project(&full.eq), part.eq);
        assert_eq!(project(&full.cf), part.cf);
    }
}
