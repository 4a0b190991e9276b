mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::programs::random_instance;
use pgasrob::corpus;
use pgasrob::dsl::{parse_program, Instance};
use pgasrob::oracle::{oracle_check, OracleVerdict};
use pgasrob::robustness::{
    check_robustness, check_run_invariants, strip_marks, CheckOptions, GuessMode, Verdict,
};
use pgasrob::semantics::Machine;
use pgasrob::traces::{is_normal_form, is_violating};

fn inst(src: &str, n: u32) -> Instance {
    Instance::with_default_domain(parse_program(src).unwrap(), n)
}

fn check(i: &Instance) -> Verdict {
    check_robustness(i, &CheckOptions::default()).unwrap()
}

fn assert_genuine(i: &Instance, v: &Verdict) {
    let Verdict::NotRobust(c) = v else { return };
    let m = Machine::new(i).unwrap();
    assert!(m.accepts(&c.computation));
    assert!(is_normal_form(&c.computation, c.cuts).unwrap());
    assert!(is_violating(&c.computation).unwrap());
    assert_eq!(c.hb_cycle.ranks(), c.cycle_type);
    check_run_invariants(&c.marked_run).unwrap();
    let word: Vec<_> = c.marked_run.iter().map(|(_, m)| *m).collect();
    let mut sorted = strip_marks(&word);
    sorted.sort();
    let mut comp = c.computation.clone();
    comp.sort();
    assert_eq!(sorted, comp);
}

#[test]
fn producer_consumer_is_robust() {
    let i = inst(corpus::PRODUCER_CONSUMER, 2);
    assert!(check(&i).is_robust());
    assert_eq!(
        oracle_check(&i, 12, None).unwrap(),
        OracleVerdict::NoViolationWithin { bound: 12 }
    );
}

#[test]
fn gpi_two_queues_is_not_robust() {
    let i = inst(corpus::GPI_TWO_QUEUES, 2);
    let v = check(&i);
    let Verdict::NotRobust(c) = &v else {
        panic!("expected a violation")
    };
    assert_genuine(&i, &v);
    // the flag overtakes the data only after both stores and both writes
    assert_eq!(c.computation.len(), 13);
    assert!(!oracle_check(&i, 12, None).unwrap().is_violation());
    assert!(oracle_check(&i, 13, None).unwrap().is_violation());
}

#[test]
fn polling_wait_still_admits_a_violation() {
    // the poller may load the shadow cell before its own read has landed
    let i = inst(corpus::ONETOONE_WITH_WAIT, 2);
    let v = check(&i);
    let Verdict::NotRobust(c) = &v else {
        panic!("expected a violation")
    };
    assert_genuine(&i, &v);
    let OracleVerdict::ViolationFound { computation, .. } =
        oracle_check(&i, c.computation.len(), Some(5_000_000)).unwrap()
    else {
        panic!(
            "oracle misses a violation of length {}",
            c.computation.len()
        )
    };
    assert!(computation.len() <= c.computation.len());
}

#[test]
fn every_corpus_witness_is_genuine() {
    for (name, src) in corpus::ALL {
        let i = inst(src, 2);
        match check_robustness(&i, &CheckOptions::default()) {
            Ok(v) => assert_genuine(&i, &v),
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn single_rank_programs() {
    assert!(check(&inst(corpus::EMPTY, 1)).is_robust());
    // a rank reading its own memory through the queues races with itself
    let src = "regs r; write(0, myrank, 1, 0); r := mem[1];";
    let i = inst(src, 1);
    let v = check(&i);
    assert_eq!(
        v.is_robust(),
        !oracle_check(&i, 8, None).unwrap().is_violation()
    );
    assert_genuine(&i, &v);
}

#[test]
fn guess_modes_agree_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    while compared < 12 {
        let i = random_instance(&mut rng);
        let capped = |guess| {
            check_robustness(
                &i,
                &CheckOptions {
                    max_states: Some(100_000),
                    guess,
                },
            )
        };
        let (Ok(a), Ok(b)) = (capped(GuessMode::AtIssue), capped(GuessMode::Literal)) else {
            continue;
        };
        assert_eq!(a.is_robust(), b.is_robust(), "{}", i.code);
        assert_genuine(&i, &a);
        assert_genuine(&i, &b);
        compared += 1;
    }
}
