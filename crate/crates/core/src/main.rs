use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use pdpaths::algebra::{ConflictGraph, GroupElement, JoinResult};
use pdpaths::cohomology::{normalize_instance, solve_cfp, CfpOptions, CfpOutcome, InfeasibleReason};
use pdpaths::corpus::{generate, CorpusSpec};
use pdpaths::homology::CandidateStream;
use pdpaths::io::{self, render_word};
use pdpaths::oracle::{brute_force_solve, OracleBudget, OracleVerdict};
use pdpaths::pipeline::{solve_pipeline, RunConfig, Verdict, VerdictMode};
use pdpaths::planar::{normalize_terminals, reduce_degree, restrict_commodities, PlanarInstance};

const EXIT_FEASIBLE: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_QUALIFIED: u8 = 2;
const EXIT_INPUT: u8 = 64;

#[derive(Parser)]
#[command(name = "pdpaths", version, about = "Partially disjoint paths in directed plane graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a planar instance.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Use multiplicities up to 2|E| so that exhaustion proves infeasibility.
        #[arg(long)]
        strict: bool,
    },
    /// Decide a planar instance by exhaustive search.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_paths: usize,
        #[arg(long, default_value_t = 10_000_000)]
        max_nodes: usize,
        #[arg(long)]
        json: bool,
    },
    /// Solve a raw cohomology feasibility instance.
    Cohomology {
        file: PathBuf,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Use the worst-case closure iteration bound (astronomically large)
        #[arg(long = "paper-cap")]
        theoretical_cap: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the candidate edge labelings of a planar instance.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_multiplicity: u32,
        #[arg(long, default_value_t = 100_000)]
        candidate_limit: usize,
    },
    /// Group word operations.
    Word {
        /// Conflict graph, e.g. "k=3; F={1-2}".
        #[arg(long, short)]
        graph: String,
        #[command(subcommand)]
        op: WordOp,
    },
    /// Write a seeded corpus of small instances as JSON files.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 2)]
    max_multiplicity: u32,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Use the worst-case closure iteration bound (astronomically large)
    #[arg(long = "paper-cap")]
    theoretical_cap: bool,
    #[arg(long, default_value_t = 100_000)]
    candidate_limit: usize,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum WordOp {
    Nf { x: String },
    Eq { x: String, y: String },
    Meet { x: String, y: String },
    Join { x: String, y: String },
    Leq { x: String, y: String },
    Peaks { x: String },
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn read_planar(file: &PathBuf) -> Result<PlanarInstance, ExitCode> {
    let text = fs::read_to_string(file).map_err(|e| input_error(format!("{}: {e}", file.display())))?;
    io::parse_planar(&text).map_err(input_error)
}

fn print_json(v: &Value) {
    // a closed pipe downstream is not an error worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn human_paths(inst: &PlanarInstance, sol: &pdpaths::planar::PathSolution) {
    for (i, p) in sol.paths.iter().enumerate() {
        let vs: Vec<String> = p.vertices.iter().map(|&v| inst.vertex_ids[v].to_string()).collect();
        println!("P{}: {}", i + 1, vs.join(" -> "));
    }
}

fn solve(file: &PathBuf, run: &RunArgs, strict: bool) -> ExitCode {
    let inst = match read_planar(file) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let cfg = RunConfig {
        max_multiplicity: run.max_multiplicity,
        max_iterations: run.max_iterations,
        theoretical_cap: run.theoretical_cap,
        candidate_limit: run.candidate_limit,
        mode: if strict { VerdictMode::Strict } else { VerdictMode::Fast },
        jobs: run.jobs,
    };
    let report = match solve_pipeline(&inst, &cfg) {
        Ok(r) => r,
        Err(e) => return input_error(e),
    };
    if run.json {
        print_json(&io::report_json(&inst, &report));
    }
    match &report.verdict {
        Verdict::Feasible(sol) => {
            if !run.json {
                println!("feasible");
                human_paths(&inst, sol);
            }
            ExitCode::from(EXIT_FEASIBLE)
        }
        Verdict::Infeasible => {
            if !run.json {
                println!("infeasible");
            }
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Verdict::InfeasibleAtCap => {
            if !run.json {
                println!("infeasible at cap: no solution with multiplicities up to {}", report.multiplicity);
                if report.truncated {
                    println!("candidate list truncated at {}", cfg.candidate_limit);
                }
                if report.cap_hits {
                    println!("some cohomology runs hit the iteration cap");
                }
            }
            ExitCode::from(EXIT_QUALIFIED)
        }
    }
}

fn oracle(file: &PathBuf, max_paths: usize, max_nodes: usize, json: bool) -> ExitCode {
    let inst = match read_planar(file) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let budget = OracleBudget { max_paths_per_commodity: max_paths, max_combination_nodes: max_nodes, ..OracleBudget::default() };
    let verdict = brute_force_solve(&inst, &budget);
    if json {
        print_json(&io::oracle_json(&inst, &verdict));
    }
    match &verdict {
        OracleVerdict::Feasible(sol) => {
            if !json {
                println!("feasible");
                human_paths(&inst, sol);
            }
            ExitCode::from(EXIT_FEASIBLE)
        }
        OracleVerdict::Infeasible => {
            if !json {
                println!("infeasible");
            }
            ExitCode::from(EXIT_INFEASIBLE)
        }
        OracleVerdict::Unknown => {
            if !json {
                println!("unknown: search budget exhausted");
            }
            ExitCode::from(EXIT_QUALIFIED)
        }
    }
}

fn cohomology(file: &PathBuf, max_iterations: Option<usize>, theoretical_cap: bool, json: bool, jobs: Option<usize>) -> ExitCode {
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return input_error(format!("{}: {e}", file.display())),
    };
    let doc = match io::parse_cfp(&text) {
        Ok(d) => d,
        Err(e) => return input_error(e),
    };
    let opts = CfpOptions { max_iterations, theoretical_cap, parallel: jobs != Some(1) };
    let norm = normalize_instance(&doc.instance);
    let outcome = match pdpaths::par::with_jobs(jobs, || solve_cfp(&norm, &opts)) {
        Ok(o) => o,
        Err(e) => return input_error(e),
    };
    let names: Vec<usize> = (1..=doc.instance.graph.k()).collect();
    let keyed = |ids: &[pdpaths::planar::Id], xs: &[GroupElement]| {
        let mut m = Map::new();
        for (id, x) in ids.iter().zip(xs) {
            m.insert(id.to_string(), json!(render_word(x, &names)));
        }
        Value::Object(m)
    };
    match outcome {
        CfpOutcome::Feasible(sol) => {
            if json {
                print_json(&json!({
                    "status": "feasible",
                    "f": keyed(&doc.vertex_ids, &sol.f),
                    "psi": keyed(&doc.edge_ids, &sol.psi),
                }));
            } else {
                println!("feasible");
                for (id, x) in doc.vertex_ids.iter().zip(&sol.f) {
                    println!("f({id}) = {x}");
                }
                for (id, x) in doc.edge_ids.iter().zip(&sol.psi) {
                    println!("psi({id}) = {x}");
                }
            }
            ExitCode::from(EXIT_FEASIBLE)
        }
        CfpOutcome::Infeasible(reason) => {
            let (text, code) = match reason {
                InfeasibleReason::TwoSatUnsat => ("two-sat-unsat", EXIT_INFEASIBLE),
                InfeasibleReason::IterationCapExceeded => ("iteration-cap-exceeded", EXIT_QUALIFIED),
            };
            if json {
                print_json(&json!({"status": "infeasible", "reason": text}));
            } else {
                println!("infeasible ({text})");
            }
            ExitCode::from(code)
        }
    }
}

fn enumerate(file: &PathBuf, max_multiplicity: u32, limit: usize) -> ExitCode {
    let inst = match read_planar(file) {
        Ok(i) => i,
        Err(code) => return code,
    };
    let covered: Vec<usize> =
        (0..inst.k()).filter(|&i| inst.graph.pairs().iter().any(|&(a, b)| a == i + 1 || b == i + 1)).collect();
    let lifted = normalize_terminals(&restrict_commodities(&inst, &covered));
    let m = max_multiplicity.min(u32::try_from(2 * reduce_degree(&lifted.inst).inst.edge_count()).unwrap_or(u32::MAX));
    let names: Vec<usize> = covered.iter().map(|c| c + 1).collect();
    let mut candidates = Vec::new();
    let mut truncated = false;
    if !covered.is_empty() {
        let mut stream = match CandidateStream::new(&lifted.inst, m) {
            Ok(s) => s,
            Err(e) => return input_error(e),
        };
        candidates = stream.next_batch(limit);
        truncated = candidates.len() == limit && !stream.next_batch(1).is_empty();
    }
    let list: Vec<Value> = candidates
        .iter()
        .map(|phi| {
            let mut m = Map::new();
            for (e, x) in phi.iter().enumerate() {
                m.insert(lifted.inst.edge_ids[e].to_string(), json!(render_word(x, &names)));
            }
            Value::Object(m)
        })
        .collect();
    print_json(&json!({"multiplicity": m, "truncated": truncated, "candidates": list}));
    ExitCode::from(EXIT_FEASIBLE)
}

fn word(graph: &str, op: &WordOp) -> ExitCode {
    let graph = match ConflictGraph::parse(graph) {
        Ok(g) => Arc::new(g),
        Err(e) => return input_error(e),
    };
    let parse = |t: &str| GroupElement::parse(&graph, t);
    let result = (|| -> Result<String, pdpaths::algebra::AlgebraError> {
        Ok(match op {
            WordOp::Nf { x } => parse(x)?.to_string(),
            WordOp::Eq { x, y } => (parse(x)? == parse(y)?).to_string(),
            WordOp::Meet { x, y } => parse(x)?.meet(&parse(y)?)?.to_string(),
            WordOp::Join { x, y } => match parse(x)?.join(&parse(y)?)? {
                JoinResult::Finite(z) => z.to_string(),
                JoinResult::Infinity => "inf".into(),
            },
            WordOp::Leq { x, y } => parse(x)?.leq(&parse(y)?)?.to_string(),
            WordOp::Peaks { x } => parse(x)?.peaks().iter().map(|p| p.to_string()).collect::<Vec<_>>().join("\n"),
        })
    })();
    match result {
        Ok(text) => {
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => input_error(e),
    }
}

fn write_corpus(seed: u64, count: usize, out: &PathBuf) -> ExitCode {
    if let Err(e) = fs::create_dir_all(out) {
        return input_error(e);
    }
    for (i, inst) in generate(seed, count, &CorpusSpec::default()).iter().enumerate() {
        let path = out.join(format!("instance_{i:03}.json"));
        if let Err(e) = fs::write(&path, io::planar_to_json(inst)) {
            return input_error(format!("{}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match &cli.command {
        Command::Solve { file, run, strict } => solve(file, run, *strict),
        Command::Oracle { file, max_paths, max_nodes, json } => oracle(file, *max_paths, *max_nodes, *json),
        Command::Cohomology { file, max_iterations, theoretical_cap, json, jobs } => {
            cohomology(file, *max_iterations, *theoretical_cap, *json, *jobs)
        }
        Command::Enumerate { file, max_multiplicity, candidate_limit } => enumerate(file, *max_multiplicity, *candidate_limit),
        Command::Word { graph, op } => word(graph, op),
        Command::Generate { seed, count, out } => write_corpus(*seed, *count, out),
    }
}
