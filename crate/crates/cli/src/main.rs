//! `ra`: validate, simulate, verify, walk and decide Recursive Arrival
//! instances, and generate them from monotone circuits.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rarrival::flow::{
    flow_to_json, parse_flow, verify_component_flow, verify_recursive_flow, verify_run_like, ComponentFlowStatus,
    RunLikeStatus,
};
use rarrival::line::{decide, walk, Encoding, Ueopl};
use rarrival::model::{normalize_single_entry, parse_raw, validate, Instance};
use rarrival::reduce::{mcvp_to_ra, parse_circuit};
use rarrival::report::{classification_json, outcome_json, state_json, witness_json};
use rarrival::semantics::{run, run_profile, Limits, Runner};
use rarrival::{Error, OverflowPoly};
use serde_json::{json, Map, Value};

mod human;

#[derive(Parser)]
#[command(name = "ra", version, about = "Recursive Arrival toolkit")]
struct Cli {
    /// Overflow polynomial p: linear, quadratic or const:C.
    #[arg(long, global = true, env = "RA_P_POLY", default_value = "linear")]
    p_poly: OverflowPoly,

    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Human,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Component,
    Recursive,
    Runlike,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StepFn {
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "V", alias = "v")]
    V,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural invariants of an instance.
    Validate { file: PathBuf },
    /// Run the instance until it terminates or a detector fires.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Print every state as a JSON line before the outcome.
        #[arg(long)]
        trace: bool,
    },
    /// The run profile at time `t`.
    Profile { file: PathBuf, t: u64 },
    /// Check a flow against one level of the certificate hierarchy.
    Verify {
        file: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        #[arg(long, value_enum, default_value_t = Level::Runlike)]
        level: Level,
    },
    /// Follow the line from the zero flow to the finished flow.
    Walk {
        file: PathBuf,
        #[arg(long)]
        emit_witness: Option<PathBuf>,
    },
    /// Does the run terminate at the given exit of component 1?
    Decide {
        file: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Generate instances from other problems.
    Reduce {
        #[command(subcommand)]
        source: ReduceSource,
    },
    /// Evaluate S, P or V on one bit string.
    UeoplStep {
        file: PathBuf,
        /// Big-endian hex, one digit per four bits.
        #[arg(long)]
        bits: String,
        #[arg(long = "fn", value_enum)]
        func: StepFn,
    },
}

#[derive(Subcommand)]
enum ReduceSource {
    /// Monotone circuit netlist to a two-exit instance.
    Mcvp {
        circuit: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        print_map: bool,
    },
}

/// Exit status of a completed command.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Yes,
    No,
}

enum Failure {
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Lemma(_) | Error::Invariant(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(Value, Status), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let inst = rarrival::parse_instance(&read(path)?)?;
    if inst.is_single_entry() {
        return Ok(inst);
    }
    info!("normalizing multi-entry instance to single-entry form");
    Ok(normalize_single_entry(&inst).0)
}

fn simulate(inst: &Instance, poly: OverflowPoly, max_steps: Option<u64>, trace: bool) -> Outcome {
    let report = run(inst, Limits { poly, max_steps })?;
    if trace {
        let mut r = Runner::new(inst, poly)?;
        println!("{}", state_json(inst, 0, r.state()));
        while r.time() < report.outcome.time() {
            r.step();
            println!("{}", state_json(inst, r.time(), r.state()));
        }
    }
    Ok((outcome_json(inst, &report.outcome), Status::Yes))
}

fn profile(inst: &Instance, poly: OverflowPoly, t: u64) -> Outcome {
    match run_profile(inst, t, Limits::with_poly(poly)) {
        Ok(p) => {
            let mut doc = json!({"t": t});
            doc["flows"] = flow_to_json(inst, &p.flow)["flows"].clone();
            let table: Map<String, Value> = (0..inst.len())
                .map(|l| ((l + 1).to_string(), json!({"S": p.first_entry[l], "T": p.exit_time[l]})))
                .collect();
            doc["components"] = Value::Object(table);
            Ok((doc, Status::Yes))
        }
        Err(Error::BeyondHorizon { .. }) => {
            let outcome = run(inst, Limits::with_poly(poly))?.outcome;
            Ok((json!({"t": t, "beyond_horizon": true, "run": outcome_json(inst, &outcome)}), Status::No))
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(inst: &Instance, poly: OverflowPoly, flow: &Path, level: Level) -> Outcome {
    let x = parse_flow(inst, &read(flow)?)?;
    let (valid, mut doc) = match level {
        Level::Component => {
            let mut parts = Map::new();
            let mut valid = true;
            for (l, c) in inst.components().iter().enumerate() {
                let status = verify_component_flow(c, x.part(l))?;
                let v = match &status {
                    ComponentFlowStatus::Zero => json!({"status": "zero"}),
                    ComponentFlowStatus::Valid {
                        current,
                        complete,
                        call_pending,
                    } => json!({
                        "status": "valid",
                        "current": c.vertex_name(*current),
                        "complete": complete,
                        "call_pending": call_pending,
                    }),
                    ComponentFlowStatus::Invalid(vs) => {
                        valid = false;
                        let codes: Vec<&str> = vs.iter().map(|v| v.code()).collect();
                        let details: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                        json!({"status": "invalid", "reasons": codes, "details": details})
                    }
                };
                parts.insert((l + 1).to_string(), v);
            }
            (valid, json!({"components": parts}))
        }
        Level::Recursive => {
            let report = verify_recursive_flow(inst, &x)?;
            let codes: Vec<&str> = report.violations.iter().map(|r| r.code()).collect();
            let details: Vec<String> = report.violations.iter().map(|r| r.to_string()).collect();
            (report.is_ok(), json!({"reasons": codes, "details": details}))
        }
        Level::Runlike => {
            let RunLikeStatus { classification, .. } = verify_run_like(inst, &x, poly)?;
            let reasons = classification.reasons();
            let codes: Vec<&str> = reasons.iter().map(|r| r.code()).collect();
            let details: Vec<String> = reasons.iter().map(|r| r.to_string()).collect();
            let mut doc = classification_json(inst, &classification);
            doc["reasons"] = json!(codes);
            doc["details"] = json!(details);
            (classification.is_run_like(), doc)
        }
    };
    let level_name = match level {
        Level::Component => "component",
        Level::Recursive => "recursive",
        Level::Runlike => "runlike",
    };
    let m = doc.as_object_mut().unwrap();
    m.insert("level".into(), level_name.into());
    m.insert("valid".into(), valid.into());
    m.insert("val".into(), x.val().into());
    let status = if valid { Status::Yes } else { Status::No };
    Ok((doc, status))
}

fn walk_cmd(inst: &Instance, poly: OverflowPoly, emit: Option<&Path>) -> Outcome {
    let w = walk(inst, poly)?;
    let doc = witness_json(inst, &w);
    if let Some(path) = emit {
        let text = serde_json::to_string_pretty(&doc).expect("json");
        fs::write(path, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok((doc, Status::Yes))
}

fn decide_cmd(inst: &Instance, poly: OverflowPoly, target: &str) -> Outcome {
    let main = inst.component(0);
    let d = main
        .vertex_by_name(target)
        .filter(|&v| main.is_exit(v))
        .ok_or_else(|| Error::NotAnExit(target.to_string()))?;
    let decision = decide(inst, d, poly)?;
    let answer = if decision.answer { "yes" } else { "no" };
    let doc = json!({"answer": answer, "target": target, "witness": witness_json(inst, &decision.witness)});
    Ok((doc, if decision.answer { Status::Yes } else { Status::No }))
}

fn reduce_mcvp(circuit: &Path, out: &Path, print_map: bool) -> Outcome {
    let c = parse_circuit(&read(circuit)?)?;
    let (inst, map, target) = mcvp_to_ra(&c);
    fs::write(out, inst.to_text()).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    let mut doc = json!({
        "instance": out.display().to_string(),
        "gates": c.len(),
        "components": inst.len(),
        "vertices": inst.total_vertices(),
        "target": target,
    });
    if print_map {
        let m: Map<String, Value> = c
            .names
            .iter()
            .zip(&map.component)
            .map(|(n, &comp)| (n.clone(), Value::from(comp + 1)))
            .collect();
        doc["map"] = Value::Object(m);
    }
    Ok((doc, Status::Yes))
}

fn ueopl_step(inst: &Instance, poly: OverflowPoly, hex: &str, func: StepFn) -> Outcome {
    let enc = Encoding::new(inst, poly);
    let u = Ueopl::new(inst, poly)?;
    let bits = enc.from_hex(hex)?;
    let doc = match func {
        StepFn::S => json!({"fn": "S", "bits": enc.to_hex(&u.s(&bits)?)}),
        StepFn::P => json!({"fn": "P", "bits": enc.to_hex(&u.p(&bits)?)}),
        StepFn::V => json!({"fn": "V", "value": u.v(&bits)?}),
    };
    Ok((doc, Status::Yes))
}

fn dispatch(cli: &Cli) -> Outcome {
    let poly = cli.p_poly;
    match &cli.command {
        Command::Validate { file } => {
            let raw = parse_raw(&read(file)?)?;
            let report = validate(&raw);
            let details: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            let doc = json!({"valid": report.is_ok(), "violations": report.violations, "details": details});
            Ok((doc, if report.is_ok() { Status::Yes } else { Status::No }))
        }
        Command::Simulate { file, max_steps, trace } => simulate(&load(file)?, poly, *max_steps, *trace),
        Command::Profile { file, t } => profile(&load(file)?, poly, *t),
        Command::Verify { file, flow, level } => verify(&load(file)?, poly, flow, *level),
        Command::Walk { file, emit_witness } => walk_cmd(&load(file)?, poly, emit_witness.as_deref()),
        Command::Decide { file, target } => decide_cmd(&load(file)?, poly, target),
        Command::Reduce {
            source: ReduceSource::Mcvp { circuit, out, print_map },
        } => reduce_mcvp(circuit, out, *print_map),
        Command::UeoplStep { file, bits, func } => ueopl_step(&load(file)?, poly, bits, *func),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok((doc, status)) => {
            match cli.output {
                Output::Json => println!("{doc}"),
                Output::Human => print!("{}", human::render(&doc)),
            }
            match status {
                Status::Yes => ExitCode::SUCCESS,
                Status::No => ExitCode::from(1),
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("ra: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("ra: {msg}");
            ExitCode::from(3)
        }
    }
}
