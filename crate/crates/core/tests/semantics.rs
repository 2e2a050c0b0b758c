mod common;

use std::collections::HashMap;

use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rarrival::flow::Flow;
use rarrival::gen::{random_instance, recursive_instance, GenParams};
use rarrival::semantics::{run, run_profile, Event, Limits, RunOutcome, Runner, State};
use rarrival::{Error, OverflowPoly};

#[test]
fn mutual_fixture_hand_trace() {
    let inst = fixture(MUTUAL);
    let g1 = inst.component(0);
    let s0 = State::initial(&inst);
    let s1 = rarrival::semantics::step(&inst, &s0).unwrap();
    assert_eq!(g1.vertex_name(s1.vertex), "b1:o2");
    assert!(s1.stack.is_empty());
    assert_eq!(s1.switches.get(g1, g1.entry_vertex()), Some(true));
    let s2 = rarrival::semantics::step(&inst, &s1).unwrap();
    assert_eq!(s2.stack.len(), 1);
    assert_eq!(s2.component, 1);
    assert_eq!(inst.component(1).vertex_name(s2.vertex), "o2");

    let report = run(&inst, Limits::default()).unwrap();
    assert_eq!(report.outcome, RunOutcome::StackBlowup { time: 4, depth: 2 });
}

#[test]
fn mutual_profile_at_two() {
    let inst = fixture(MUTUAL);
    let p = run_profile(&inst, 2, Limits::default()).unwrap();
    let g1 = inst.component(0);
    let mut expect = Flow::zero(&inst);
    expect.set(0, g1.edge_by_key("o1->b1:o2").unwrap(), 1);
    assert_eq!(p.flow, expect);
    assert_eq!(definitional_profiles(&inst, 2)[2], expect);
}

#[test]
fn alternation_profiles() {
    let inst = fixture(ALTERNATION);
    let c = inst.component(0);
    assert!(run_profile(&inst, 0, Limits::default()).unwrap().flow.is_zero());
    let p = run_profile(&inst, 3, Limits::default()).unwrap();
    let mut expect = Flow::zero(&inst);
    for k in ["s->o", "o->w", "w->o"] {
        expect.set(0, c.edge_by_key(k).unwrap(), 1);
    }
    assert_eq!(p.flow, expect);
    // After termination the profile is constant.
    let late = run_profile(&inst, 1000, Limits::default()).unwrap();
    assert_eq!(late.exit_time[0], Some(4));
}

#[test]
fn self_loop_overflows() {
    let inst = fixture(SELF_LOOP);
    let report = run(&inst, Limits::default()).unwrap();
    let v = inst.component(0).edge_by_key("v->v").unwrap();
    assert!(matches!(report.outcome, RunOutcome::LoopOverflow { component: 0, edge, .. } if edge == v));
    assert_eq!(report.profile.flow.get(0, v), 9);
}

#[test]
fn profile_beyond_detection_is_an_error() {
    let inst = fixture(MUTUAL);
    assert!(matches!(
        run_profile(&inst, 1_000_000, Limits::default()),
        Err(Error::BeyondHorizon { stopped_at: 4, .. })
    ));
}

fn runner_profiles(inst: &rarrival::Instance, steps: usize) -> Vec<Flow> {
    let mut r = Runner::new(inst, OverflowPoly::Linear).unwrap();
    let mut out = vec![r.profile().flow.clone()];
    for _ in 0..steps {
        r.step();
        out.push(r.profile().flow.clone());
    }
    out
}

#[test]
fn incremental_matches_definitional() {
    for text in [ALTERNATION, MUTUAL, SELF_LOOP] {
        let inst = fixture(text);
        assert_eq!(runner_profiles(&inst, 40), definitional_profiles(&inst, 40));
    }
    let mut rng = StdRng::seed_from_u64(seed());
    let p = GenParams::default();
    for _ in 0..300 {
        let inst = random_instance(&mut rng, &p);
        let report = run(&inst, Limits::default()).unwrap();
        let horizon = (report.outcome.time() as usize).min(20_000);
        let incremental = runner_profiles(&inst, horizon);
        let definitional = definitional_profiles(&inst, horizon);
        assert_eq!(incremental, definitional, "{}", inst.to_text());
    }
}

/// Any two visits to the same component traverse the same vertex sequence
/// as far as both go.
#[test]
fn visits_replay() {
    let mut rng = StdRng::seed_from_u64(seed() ^ 0x5eed);
    let p = GenParams::default();
    for _ in 0..200 {
        let inst = random_instance(&mut rng, &p);
        let traj = trajectory(&inst, 1000);
        // The visit at depth d lasts until the stack is shorter than d + 1.
        let mut open: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut finished: Vec<(usize, Vec<usize>)> = Vec::new();
        for snap in &traj {
            let d = snap.stack.len();
            while open.len() > d + 1 {
                finished.push(open.pop().unwrap());
            }
            if open.len() == d + 1 {
                open[d].1.push(snap.vertex);
            } else {
                open.push((snap.component, vec![snap.vertex]));
            }
        }
        finished.extend(open);
        let mut by_comp: HashMap<usize, Vec<Vec<usize>>> = HashMap::new();
        for (c, seq) in finished {
            by_comp.entry(c).or_default().push(seq);
        }
        for seqs in by_comp.values() {
            for a in seqs {
                for b in seqs {
                    let n = a.len().min(b.len());
                    assert_eq!(a[..n], b[..n]);
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let mut rng = StdRng::seed_from_u64(seed() ^ 1);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, &GenParams::default());
        assert_eq!(run(&inst, Limits::default()).unwrap(), run(&inst, Limits::default()).unwrap());
    }
}

#[test]
fn steps_preserve_well_formedness() {
    let mut rng = StdRng::seed_from_u64(seed() ^ 2);
    for _ in 0..100 {
        let inst = random_instance(&mut rng, &GenParams::default());
        let mut st = State::initial(&inst);
        for _ in 0..500 {
            assert!(st.is_well_formed(&inst));
            st = rarrival::semantics::step(&inst, &st).unwrap();
            if st.depth() > 50 {
                break;
            }
        }
    }
}

#[test]
fn detectors_are_sound() {
    let mut rng = StdRng::seed_from_u64(seed() ^ 3);
    let p = GenParams::default();
    for i in 0..300 {
        let inst = if i % 2 == 0 {
            random_instance(&mut rng, &p)
        } else {
            recursive_instance(&mut rng, &p)
        };
        let report = run(&inst, Limits::default()).unwrap();
        if report.outcome.terminates() == Some(false) {
            let mut r = Runner::new(&inst, OverflowPoly::Linear).unwrap();
            for _ in 0..report.outcome.time() * 10 {
                assert!(!matches!(r.step(), Event::Terminated { .. }), "{}", inst.to_text());
            }
        }
    }
}

#[test]
fn hits_agrees_with_long_simulation() {
    use rarrival::semantics::{hits, HitAnswer};
    let mut rng = StdRng::seed_from_u64(seed() ^ 4);
    for _ in 0..200 {
        let inst = random_instance(&mut rng, &GenParams::default());
        let seen: std::collections::HashSet<(usize, usize)> = positions(&inst, 20_000).into_iter().collect();
        for (l, c) in inst.components().iter().enumerate() {
            for v in 0..c.vertex_count() {
                let seen = seen.contains(&(l, v));
                match hits(&inst, l, v, Limits::default()).unwrap() {
                    HitAnswer::Yes => assert!(seen),
                    HitAnswer::No => assert!(!seen, "{}", inst.to_text()),
                    HitAnswer::Inconclusive => unreachable!(),
                }
            }
        }
    }
}
