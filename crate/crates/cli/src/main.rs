use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use smd2cpn::cpn::{explore, Simulator};
use smd2cpn::emit::{emit_dot, to_cpn_xml};
use smd2cpn::oracle::{check_trace_equivalence, Verdict};
use smd2cpn::smd::Machine;
use smd2cpn::smdl;
use smd2cpn::translate::{check_control_safety, translate, TranslationConfig};

const USAGE: u8 = 1;
const INVALID: u8 = 2;
const VIOLATION: u8 = 3;

/// Translate UML-style state machines (SMDL) into coloured Petri nets.
#[derive(Parser)]
#[command(name = "smd2cpn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a model and write a CPN Tools document.
    Translate {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write a Graphviz rendering.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Parse and validate a model.
    Check { input: PathBuf },
    /// Explore the generated net and check that control stays 1-safe.
    Simulate {
        input: PathBuf,
        /// Maximum number of markings to explore.
        #[arg(long, default_value_t = 100_000)]
        bound: usize,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Compare the model with its generated net up to a number of moves.
    Equiv {
        input: PathBuf,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
        depth: u32,
        #[command(flatten)]
        env: EnvArgs,
    },
}

#[derive(Args)]
struct EnvArgs {
    /// Pending occurrences of each event the environment may queue.
    #[arg(long, default_value_t = 1)]
    event_capacity: usize,
    /// Leave out event producers; only completion steps remain.
    #[arg(long)]
    no_environment: bool,
}

impl EnvArgs {
    fn config(&self) -> TranslationConfig {
        TranslationConfig {
            event_capacity: self.event_capacity,
            include_environment: !self.no_environment,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(USAGE, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| fail(USAGE, format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Machine, Failure> {
    let text = read(path)?;
    smdl::load(&text).map_err(|e| fail(INVALID, format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Translate { input, output, dot, env } => {
            let machine = load(&input)?;
            let start = Instant::now();
            let (net, _) = translate(&machine, &env.config()).map_err(|e| fail(INVALID, e.to_string()))?;
            let xml = to_cpn_xml(&net);
            let elapsed = start.elapsed();
            write(&output, &xml)?;
            if let Some(dot) = dot {
                write(&dot, &emit_dot(&net, None))?;
            }
            println!("places: {}", net.places.len());
            println!("transitions: {}", net.transitions.len());
            println!("arcs: {}", net.arcs.len());
            println!("time: {:.3} ms", elapsed.as_secs_f64() * 1e3);
            Ok(())
        }
        Command::Check { input } => {
            let machine = load(&input)?;
            let m = machine.model();
            println!(
                "{}: valid ({} states, {} transitions, {} variables)",
                m.name,
                m.states.len(),
                m.transitions.len(),
                m.variables.len()
            );
            Ok(())
        }
        Command::Simulate { input, bound, env } => {
            let machine = load(&input)?;
            let (net, map) = translate(&machine, &env.config()).map_err(|e| fail(INVALID, e.to_string()))?;
            let sim = Simulator::new(&net).map_err(|e| fail(INVALID, e.to_string()))?;
            let graph = explore(&sim, &net.initial_marking(), bound);
            let report = check_control_safety(&net, &map, &graph);
            println!("reachable markings: {}", report.states);
            println!("dead markings: {}", graph.dead_states().len());
            println!("complete: {}", if report.truncated { "no (bound reached)" } else { "yes" });
            println!("1-safe: {}", if report.violations.is_empty() { "yes" } else { "no" });
            if report.truncated {
                eprintln!("warning: exploration stopped at {bound} markings");
            }
            match report.violations.first() {
                None => Ok(()),
                Some(v) => Err(fail(
                    VIOLATION,
                    format!(
                        "marking {} has {} control token(s) and {:?} VARS token(s)",
                        v.marking, v.control_tokens, v.vars_tokens
                    ),
                )),
            }
        }
        Command::Equiv { input, depth, env } => {
            let machine = load(&input)?;
            let (net, map) = translate(&machine, &env.config()).map_err(|e| fail(INVALID, e.to_string()))?;
            match check_trace_equivalence(&machine, &net, &map, depth as usize) {
                Ok(Verdict::Equivalent { depth }) => {
                    println!("equivalent up to depth {depth}");
                    Ok(())
                }
                Ok(Verdict::Inequivalent(cx)) => {
                    println!("inequivalent\n{cx}");
                    Err(fail(VIOLATION, "model and net disagree"))
                }
                Err(e) => Err(fail(VIOLATION, e.to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
