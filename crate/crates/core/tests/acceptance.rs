//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. `RA_SEED` overrides the corpus seed.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rarrival::flow::{verify_recursive_flow, verify_run_like, Classification, Flow};
use rarrival::gen::{random_circuit, random_instance, recursive_instance, GenParams};
use rarrival::line::{
    adv, adv_oracle, decide, decrement_candidates, increment_candidates, prev, prev_oracle, scan, verify_witness, walk,
    Claim, Encoding, Line,
};
use rarrival::model::Instance;
use rarrival::reduce::{eval_circuit, mcvp_to_ra, BOTTOM, TOP};
use rarrival::semantics::{run, Event, Limits, RunOutcome, Runner};
use rarrival::OverflowPoly;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

const LINEAR: OverflowPoly = OverflowPoly::Linear;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn corpus(seed: u64, n: usize) -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let p = GenParams::default();
    (0..n).map(|_| random_instance(&mut rng, &p)).collect()
}

fn within(elapsed: Duration, limit_s: u64) -> Check {
    if elapsed.as_secs_f64() < limit_s as f64 {
        Ok(String::new())
    } else {
        Err(format!("took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()))
    }
}

fn decision_agreement(corpus: &[Instance]) -> Check {
    let start = Instant::now();
    let (mut term, mut blowup, mut overflow) = (0, 0, 0);
    for (i, inst) in corpus.iter().enumerate() {
        let report = run(inst, Limits::default()).map_err(|e| e.to_string())?;
        let w = walk(inst, LINEAR).map_err(|e| e.to_string())?;
        match report.outcome {
            RunOutcome::Terminated { exit, .. } => {
                term += 1;
                ensure!(w.exit == Some(exit), "instance {i}: run terminates, walk gives {}", w.classification.name());
            }
            RunOutcome::StackBlowup { .. } | RunOutcome::LoopOverflow { .. } => {
                if matches!(report.outcome, RunOutcome::StackBlowup { .. }) {
                    blowup += 1;
                } else {
                    overflow += 1;
                }
                ensure!(w.exit.is_none(), "instance {i}: run diverges, walk is complete");
            }
            RunOutcome::Inconclusive { .. } => return Err(format!("instance {i}: inconclusive run")),
        }
        for d in inst.component(0).exit_vertices() {
            let ans = decide(inst, d, LINEAR).map_err(|e| e.to_string())?.answer;
            let expect = matches!(report.outcome, RunOutcome::Terminated { exit, .. } if exit == d);
            ensure!(ans == expect, "instance {i}: decide disagrees at exit {}", inst.component(0).vertex_name(d));
        }
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "{} instances agree ({term} terminate, {blowup} stack blowup, {overflow} loop overflow)",
        corpus.len()
    ))
}

fn line_points(inst: &Instance, poly: OverflowPoly) -> Result<Vec<Flow>, String> {
    Line::new(inst, poly)
        .map_err(|e| e.to_string())?
        .map(|p| p.map(|(x, _)| x).map_err(|e| e.to_string()))
        .collect()
}

fn tiny_instances(seed: u64, count: usize, max_edges: usize) -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    let p = GenParams::tiny();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while out.len() < count {
        let inst = random_instance(&mut rng, &p);
        let small = inst.len() <= 2 && inst.components().iter().all(|c| c.vertex_count() <= 4);
        if small && inst.total_edges() <= max_edges && seen.insert(inst.to_text()) {
            out.push(inst);
        }
    }
    out
}

fn all_flows(inst: &Instance, bound: u64) -> impl Iterator<Item = Flow> + '_ {
    let m = inst.total_edges();
    let total = (bound + 1).pow(m as u32);
    (0..total).map(move |mut idx| {
        let coords: Vec<u64> = (0..m)
            .map(|_| {
                let c = idx % (bound + 1);
                idx /= bound + 1;
                c
            })
            .collect();
        Flow::from_coordinates(inst, &coords).unwrap()
    })
}

fn run_line_equivalence(corpus: &[Instance], seed: u64) -> Check {
    let start = Instant::now();
    let mut checked = 0u64;
    for (i, inst) in corpus.iter().enumerate() {
        let line = line_points(inst, LINEAR)?;
        let stop = run(inst, Limits::default()).map_err(|e| e.to_string())?.outcome.time();
        let mut r = Runner::new(inst, LINEAR).map_err(|e| e.to_string())?;
        loop {
            let p = &r.profile().flow;
            let st = verify_run_like(inst, p, LINEAR).map_err(|e| e.to_string())?;
            ensure!(st.is_run_like(), "instance {i}, t = {}: profile not run-like", r.time());
            let v = p.val() as usize;
            ensure!(line.get(v) == Some(p), "instance {i}, t = {}: profile is off the line", r.time());
            checked += 1;
            if r.time() >= stop {
                ensure!(line.last() == Some(p), "instance {i}: stop profile is not the line end");
                break;
            }
            r.step();
        }
    }
    // Exhaustive part: N = 3.
    let poly = OverflowPoly::Const(1);
    let tiny = tiny_instances(seed ^ 0x7177, 40, 8);
    let mut flows = 0u64;
    for (i, inst) in tiny.iter().enumerate() {
        let bound = poly.coordinate_bound(inst);
        let mut run_like = BTreeSet::new();
        let mut on_line_class = BTreeSet::new();
        for x in all_flows(inst, bound) {
            flows += 1;
            let st = verify_run_like(inst, &x, poly).map_err(|e| e.to_string())?;
            if st.is_run_like() {
                if st.classification != Classification::PostOverflowing {
                    on_line_class.insert(x.clone());
                }
                run_like.insert(x);
            }
        }
        let mut profiles = BTreeSet::new();
        let mut r = Runner::new(inst, poly).map_err(|e| e.to_string())?;
        for _ in 0..20_000 {
            let p = &r.profile().flow;
            if p.max_coordinate() > bound {
                break;
            }
            profiles.insert(p.clone());
            if matches!(r.step(), Event::Terminated { .. }) {
                profiles.insert(r.profile().flow.clone());
                break;
            }
        }
        ensure!(
            run_like == profiles,
            "tiny instance {i}: {} run-like flows, {} profiles\n{}",
            run_like.len(),
            profiles.len(),
            inst.to_text()
        );
        let line: BTreeSet<Flow> = line_points(inst, poly)?.into_iter().collect();
        ensure!(line == on_line_class, "tiny instance {i}: line differs from run-like flows in F^N");
    }
    within(start.elapsed(), 120)?;
    Ok(format!(
        "{checked} profiles on the line over {} instances; {} tiny instances, {flows} flows enumerated",
        corpus.len(),
        tiny.len()
    ))
}

fn uniqueness(corpus: &[Instance]) -> Check {
    let start = Instant::now();
    let (mut points, mut interior, mut finished) = (0u64, 0u64, 0u64);
    for (i, inst) in corpus.iter().enumerate() {
        if points >= 60_000 {
            break;
        }
        for x in line_points(inst, LINEAR)? {
            points += 1;
            let st = verify_run_like(inst, &x, LINEAR).unwrap();
            let a = adv(inst, &x, LINEAR).map_err(|e| e.to_string())?;
            let ao = adv_oracle(inst, &x, LINEAR).map_err(|e| format!("instance {i}: {e}"))?;
            ensure!(a == ao, "instance {i}: adv differs from oracle at {x}");
            let p = prev(inst, &x, LINEAR).map_err(|e| format!("instance {i}: {e}"))?;
            let po = prev_oracle(inst, &x, LINEAR).map_err(|e| format!("instance {i}: {e}"))?;
            ensure!(p == po, "instance {i}: prev differs from oracle at {x}");
            let inc = increment_candidates(inst, &x).len();
            let dec = decrement_candidates(inst, &x).len();
            let want_inc = match st.classification {
                Classification::Complete { .. } | Classification::Lassoed => 0,
                _ => 1,
            };
            let want_dec = if x.is_zero() { 0 } else { 1 };
            ensure!(inc == want_inc, "instance {i}: {inc} increments at {x}");
            ensure!(dec == want_dec, "instance {i}: {dec} decrements at {x}");
            if st.classification.is_finished() {
                finished += 1;
            } else {
                interior += 1;
            }
        }
    }
    ensure!(points >= 10_000, "only {points} line points");
    Ok(format!(
        "{points} line points ({interior} interior, {finished} finished) in {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn depth_bound(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed ^ 0xdee9);
    let p = GenParams::default();
    for i in 0..50 {
        let inst = recursive_instance(&mut rng, &p);
        let report = run(&inst, Limits::default()).map_err(|e| e.to_string())?;
        let RunOutcome::StackBlowup { time, depth } = report.outcome else {
            return Err(format!("instance {i}: {:?}", report.outcome));
        };
        ensure!(depth >= inst.len(), "instance {i}: blowup at depth {depth} < k");
        let mut r = Runner::new(&inst, LINEAR).map_err(|e| e.to_string())?;
        for _ in 0..time * 11 {
            ensure!(!matches!(r.step(), Event::Terminated { .. }), "instance {i}: terminated after blowup");
        }
    }
    Ok("50 recursive instances blow up at depth >= k and never terminate within 10x".into())
}

fn mutual_pathology() -> Check {
    let inst = fixture(MUTUAL);
    let ones = Flow::from_parts(&inst, inst.components().iter().map(|c| vec![1; c.edge_count()]).collect()).unwrap();
    let rec = verify_recursive_flow(&inst, &ones).map_err(|e| e.to_string())?;
    ensure!(rec.is_ok(), "((1,1,1),(1,1,1)) is not a recursive switching flow");
    let st = verify_run_like(&inst, &ones, LINEAR).map_err(|e| e.to_string())?;
    let codes: Vec<&str> = st.classification.reasons().iter().map(|r| r.code()).collect();
    ensure!(codes == ["completed-call cycle"], "run-like reasons {codes:?}");
    let d1 = inst.main_exit("d1").unwrap();
    let v = verify_witness(&inst, &ones, Claim::TerminatesAt(d1), LINEAR).map_err(|e| e.to_string())?;
    ensure!(!v.accepted, "termination certificate accepted");
    Ok(format!("recursive: yes; run-like: no ({}); witness: {}", codes[0], v.reason.unwrap_or_default()))
}

fn reduction(seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(seed ^ 0xc1c);
    let mut max_c = 0usize;
    let mut gates_checked = 0;
    for i in 0..200 {
        let circuit = random_circuit(&mut rng, 15);
        let values = eval_circuit(&circuit);
        let (inst, map, target) = mcvp_to_ra(&circuit);
        ensure!(target == TOP, "target exit {target}");
        ensure!(inst.len() == circuit.len(), "circuit {i}: {} components for {} gates", inst.len(), circuit.len());
        max_c = max_c.max(map.vertices_per_gate);
        ensure!(
            inst.total_vertices() <= map.vertices_per_gate * circuit.len(),
            "circuit {i}: size bound"
        );
        for (g, &value) in values.iter().enumerate() {
            let sub = inst.rerooted(map.component[g]);
            let top = sub.main_exit(TOP).unwrap();
            let bot = sub.main_exit(BOTTOM).unwrap();
            let yes_top = decide(&sub, top, LINEAR).map_err(|e| e.to_string())?;
            let yes_bot = decide(&sub, bot, LINEAR).map_err(|e| e.to_string())?;
            ensure!(yes_top.answer == value && yes_bot.answer == !value, "circuit {i}, gate {}: decide disagrees", g + 1);
            ensure!(
                matches!(yes_top.witness.classification, Classification::Complete { .. }),
                "circuit {i}, gate {}: walk did not end complete",
                g + 1
            );
            let outcome = run(&sub, Limits::default()).map_err(|e| e.to_string())?.outcome;
            let want = if value { top } else { bot };
            ensure!(
                matches!(outcome, RunOutcome::Terminated { exit, .. } if exit == want),
                "circuit {i}, gate {}: run disagrees",
                g + 1
            );
            gates_checked += 1;
        }
    }
    ensure!(max_c <= 12, "c = {max_c} > 12");
    within(start.elapsed(), 30)?;
    Ok(format!("200 circuits, {gates_checked} gates agree; c = {max_c}"))
}

fn ueopl_structure(seed: u64) -> Check {
    let start = Instant::now();
    let mut picked: Vec<(Instance, OverflowPoly)> = Vec::new();
    let mut rng = StdRng::seed_from_u64(seed ^ 0xe091);
    let p = GenParams::tiny();
    let mut seen = HashSet::new();
    let mut tries = 0;
    while picked.len() < 10 && tries < 100_000 {
        tries += 1;
        let inst = random_instance(&mut rng, &p);
        let poly = if picked.len() < 5 { LINEAR } else { OverflowPoly::Const(1) };
        let width = Encoding::new(&inst, poly).width();
        if (8..=20).contains(&width) && seen.insert(inst.to_text()) {
            picked.push((inst, poly));
        }
    }
    ensure!(picked.len() == 10, "found only {} instances of width <= 20", picked.len());
    let mut widths = Vec::new();
    for (i, (inst, poly)) in picked.iter().enumerate() {
        let r = scan(inst, *poly, 20).map_err(|e| e.to_string())?;
        let w = walk(inst, *poly).map_err(|e| e.to_string())?;
        let enc = Encoding::new(inst, *poly);
        let bits = enc.encode(&w.flow.coordinates().collect::<Vec<_>>()).unwrap();
        let witness = bits.iter().fold(0u64, |a, &b| a << 1 | b as u64);
        ensure!(r.starts == [0], "instance {i}: line starts {:?}", r.starts);
        ensure!(r.u1 == [witness], "instance {i}: U1 points {:?}, witness {witness}", r.u1);
        ensure!(r.line.last() == Some(&witness), "instance {i}: line does not end at the witness");
        ensure!(r.values_strictly_increase(), "instance {i}: V not increasing");
        ensure!(
            r.uv1.is_empty() && r.uv2.is_empty() && r.uv3.is_empty(),
            "instance {i}: UV1 {} UV2 {} UV3 {}",
            r.uv1.len(),
            r.uv2.len(),
            r.uv3.len()
        );
        widths.push(r.width);
    }
    within(start.elapsed(), 120)?;
    Ok(format!("10 instances, widths {widths:?}, one start, one U1 end, no UV points"))
}

fn witness_verifier(seed: u64) -> Check {
    let poly = OverflowPoly::Const(6);
    let mut rng = StdRng::seed_from_u64(seed ^ 0x8);
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut witnesses = Vec::new();
    let mut summary = Vec::new();
    for n in [4usize, 8, 16] {
        let p = GenParams {
            components: 2..=3,
            nodes: n..=n,
            max_boxes: 2,
            max_exits: 2,
            parallel: 0.25,
        };
        let mut max_ops = 0;
        for _ in 0..8 {
            let inst = random_instance(&mut rng, &p);
            let w = walk(&inst, poly).map_err(|e| e.to_string())?;
            let claim = match w.exit {
                Some(d) => Claim::TerminatesAt(d),
                None => Claim::DoesNotTerminate,
            };
            let v = verify_witness(&inst, &w.flow, claim, poly).map_err(|e| e.to_string())?;
            ensure!(v.accepted, "n = {n}: own witness rejected: {:?}", v.reason);
            let bits = Encoding::new(&inst, poly).width() + inst.total_vertices() + inst.total_edges();
            samples.push(((bits as f64).ln(), (v.ops as f64).ln()));
            max_ops = max_ops.max(v.ops);
            witnesses.push((inst, w.flow, claim));
        }
        summary.push(format!("n={n}: max ops {max_ops}"));
    }
    let k = samples.len() as f64;
    let (mx, my) = (
        samples.iter().map(|s| s.0).sum::<f64>() / k,
        samples.iter().map(|s| s.1).sum::<f64>() / k,
    );
    let slope = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum::<f64>()
        / samples.iter().map(|s| (s.0 - mx).powi(2)).sum::<f64>();
    ensure!(slope.le(&3.0), "fitted degree {slope:.2} > 3");

    let (mut violating, mut rejected) = (0, 0);
    for _ in 0..1000 {
        let (inst, x, claim) = &witnesses[rng.gen_range(0..witnesses.len())];
        let m = inst.total_edges();
        let j = rng.gen_range(0..m);
        let mut coords: Vec<u64> = x.coordinates().collect();
        if coords[j] == 0 || rng.gen_bool(0.5) {
            coords[j] += 1;
        } else {
            coords[j] -= 1;
        }
        let y = Flow::from_coordinates(inst, &coords).unwrap();
        // The finished flow is unique, so every perturbation violates a condition.
        if &y != x {
            violating += 1;
        }
        if !verify_witness(inst, &y, *claim, poly).map_err(|e| e.to_string())?.accepted {
            rejected += 1;
        }
    }
    ensure!(rejected >= violating, "rejected {rejected} of {violating} violating perturbations");
    Ok(format!(
        "{}; fitted degree {slope:.2}; perturbations rejected {rejected}/{violating}",
        summary.join(", ")
    ))
}

fn main() {
    let seed = seed();
    println!("acceptance (seed {seed})");
    let corpus = corpus(seed, 500);
    let criteria: Vec<Criterion> = vec![
        ("decision agreement", Box::new(|| decision_agreement(&corpus))),
        ("run/line equivalence", Box::new(|| run_line_equivalence(&corpus, seed))),
        ("uniqueness lemmas", Box::new(|| uniqueness(&corpus))),
        ("depth-bound lemma", Box::new(|| depth_bound(seed))),
        ("completed-call cycle pathology", Box::new(mutual_pathology)),
        ("P-hardness reduction", Box::new(|| reduction(seed))),
        ("UEOPL structure", Box::new(|| ueopl_structure(seed))),
        ("witness verifier", Box::new(|| witness_verifier(seed))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
