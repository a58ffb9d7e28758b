//! The `lmtk` command line. [`run`] returns the exit code and the text to
//! print so that commands can be tested without a process.
//!
//! Exit codes: 0 pass, 1 fail, 2 unknown or not found within bounds,
//! 3 input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use lmtk_core::cap::cap_search;
use lmtk_core::closure::{fc_iterate, DEFAULT_FC_DEPTH, DEFAULT_FC_GENERATIONS};
use lmtk_core::enumerate::{subterm_collapse_search, DEFAULT_MAX_TERMS};
use lmtk_core::lm::{
    almost_left_reduce, lm_verdict, quasi_determinism, right_reduce, CheckOptions, Verdict, DEFAULT_COLLAPSE_DEPTH,
    DEFAULT_CONSEQUENCE_DEPTH,
};
use lmtk_core::lpo::Precedence;
use lmtk_core::minsky::{
    canonical_cap, encode, plug, simulate, validate_machine, CapInstance, Config, Machine, Run, Stop,
};
use lmtk_core::overlap::{critical_pairs, nosup, rhs_closure};
use lmtk_core::parse::{parse_machine, parse_term, parse_trs};
use lmtk_core::render::{render_lm_report, render_trace, render_trs};
use lmtk_core::{Error, Term, Trs, DEFAULT_FUEL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lmtk",
    version,
    about = "Analysis of rewrite systems and the Lynch-Morawska conditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Rewrite step limit per normalization; defaults to LMTK_FUEL or 10000.
    #[arg(long, global = true)]
    fuel: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a system is an LM system.
    Check {
        file: PathBuf,
        /// Depth of the subterm-collapse search.
        #[arg(long, default_value_t = DEFAULT_COLLAPSE_DEPTH)]
        depth: usize,
        /// Precedence for the termination proof, greatest first: f,g,h.
        #[arg(long)]
        precedence: Option<String>,
        /// Instantiation depth of the innermost one-step check.
        #[arg(long, default_value_t = DEFAULT_FC_DEPTH)]
        fc_depth: usize,
        /// Term depth of the consequence checks.
        #[arg(long, default_value_t = DEFAULT_CONSEQUENCE_DEPTH)]
        consequence_depth: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        max_terms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Right-reduce then almost-left-reduce; prints the resulting system file.
    Reduce {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Forward closure generations.
    Fc {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FC_GENERATIONS)]
        max_gen: usize,
        #[command(flatten)]
        common: Common,
    },
    /// The rules together with the RHS critical pairs, and their quasi-determinism.
    Rhs {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Critical pairs.
    Cps {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Superpositions below the root of a left-hand side.
    Nosup {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Leftmost-innermost normalization with a step trace.
    Normalize {
        file: PathBuf,
        term: String,
        #[command(flatten)]
        common: Common,
    },
    /// Bounded search for a term equal to one of its proper subterms.
    Collapse {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_COLLAPSE_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_TERMS)]
        max_terms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Two-counter machines and their cap-problem encoding.
    Minsky {
        #[command(subcommand)]
        command: MinskyCommand,
    },
    /// Bounded cap search for a system, knowledge terms and a goal.
    Cap {
        file: PathBuf,
        /// Ground knowledge terms separated by ';'.
        #[arg(long)]
        knowledge: String,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 30)]
        max_size: usize,
        #[arg(long, default_value_t = 12)]
        max_rounds: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
struct MachineArgs {
    file: PathBuf,
    /// Initial value of the first counter.
    #[arg(long, default_value_t = 0)]
    k: u64,
    /// Initial value of the second counter.
    #[arg(long, default_value_t = 0)]
    p: u64,
    /// Halting value of the first counter; found by simulation when omitted.
    #[arg(long)]
    kp: Option<u64>,
    /// Halting value of the second counter; found by simulation when omitted.
    #[arg(long)]
    pp: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    #[arg(long, default_value_t = 30)]
    max_size: usize,
    #[arg(long, default_value_t = 12)]
    max_rounds: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum MinskyCommand {
    /// Check reversible determinism.
    Validate(MachineArgs),
    /// Run from the initial counters.
    Simulate(MachineArgs),
    /// Print the encoded system.
    Encode(MachineArgs),
    /// Encode, then search for a cap and compare it with the canonical one.
    Cap(MachineArgs),
}

struct Out {
    code: i32,
    text: String,
}

impl Out {
    fn new(code: i32, text: String) -> Self {
        Out { code, text }
    }

    fn json(code: i32, value: impl Serialize) -> Self {
        let mut text = serde_json::to_string_pretty(&value).expect("serializable report");
        text.push('\n');
        Out { code, text }
    }
}

/// A failed command: bad input (exit 3), or a bound hit before an answer
/// was reached (exit 2).
struct CmdError {
    msg: String,
    code: i32,
}

fn input_error(msg: String) -> CmdError {
    CmdError { msg, code: EXIT_INPUT }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FuelExhausted { .. } => EXIT_UNKNOWN,
            _ => EXIT_INPUT,
        };
        CmdError {
            msg: e.to_string(),
            code,
        }
    }
}

type CmdResult = Result<Out, CmdError>;

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(out) => (out.code, out.text),
        Err(CmdError { msg, code }) => (code, format!("error: {msg}\n")),
    }
}

fn fuel(common: &Common) -> Result<usize, CmdError> {
    if let Some(f) = common.fuel {
        return Ok(f);
    }
    match std::env::var("LMTK_FUEL") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| input_error(format!("LMTK_FUEL must be a natural number, found '{v}'"))),
        Err(_) => Ok(DEFAULT_FUEL),
    }
}

fn read(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_trs(path: &Path) -> Result<Trs, CmdError> {
    parse_trs(&read(path)?).map_err(|e| input_error(format!("{}:{e}", path.display())))
}

fn load_machine(path: &Path) -> Result<Machine, CmdError> {
    parse_machine(&read(path)?).map_err(|e| input_error(format!("{}:{e}", path.display())))
}

fn term_arg(text: &str, trs: &Trs) -> Result<Term, CmdError> {
    parse_term(text, trs).map_err(|e| input_error(format!("term '{text}': {e}")))
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Check {
            file,
            depth,
            precedence,
            fc_depth,
            consequence_depth,
            max_terms,
            common,
        } => {
            let trs = load_trs(&file)?;
            let precedence = precedence.as_deref().map(Precedence::parse).transpose()?;
            let opts = CheckOptions {
                fuel: fuel(&common)?,
                collapse_depth: depth,
                max_terms,
                precedence,
                fc_depth,
                consequence_depth,
                run_consequences: true,
            };
            let report = lm_verdict(&trs, &opts);
            let code = match report.overall {
                _ if report.internal_inconsistency => EXIT_FAIL,
                Verdict::Pass => EXIT_PASS,
                Verdict::Fail => EXIT_FAIL,
                Verdict::Unknown => EXIT_UNKNOWN,
            };
            Ok(if common.json {
                Out::json(code, &report)
            } else {
                Out::new(code, render_lm_report(&report))
            })
        }
        Command::Reduce { file, common } => {
            let trs = load_trs(&file)?;
            let rr = right_reduce(&trs, fuel(&common)?)?;
            let (reduced, log) = almost_left_reduce(&rr)?;
            if common.json {
                return Ok(Out::json(
                    EXIT_PASS,
                    json!({ "system": render_trs(&reduced), "deletions": log }),
                ));
            }
            let mut text = String::new();
            for d in &log {
                writeln!(
                    text,
                    "# deleted {}: {} contains an instance of the lhs of {} at {}",
                    d.rule, d.lhs, d.matched, d.position
                )
                .unwrap();
            }
            text.push_str(&render_trs(&reduced));
            Ok(Out::new(EXIT_PASS, text))
        }
        Command::Fc { file, max_gen, common } => {
            let trs = load_trs(&file)?;
            let trace = fc_iterate(&trs, max_gen);
            let code = if trace.converged { EXIT_PASS } else { EXIT_UNKNOWN };
            if common.json {
                return Ok(Out::json(code, &trace));
            }
            let mut text = String::new();
            for (k, gen) in trace.generations.iter().enumerate() {
                writeln!(
                    text,
                    "NR{}: {} new rule{}",
                    k + 1,
                    gen.len(),
                    if gen.len() == 1 { "" } else { "s" }
                )
                .unwrap();
                for c in gen {
                    writeln!(text, "  [{}] {}", c.rule.label, c).unwrap();
                }
            }
            match trace.fixpoint_generation() {
                Some(k) => writeln!(
                    text,
                    "fixpoint: FC{k} ({} rules, redundancy: {})",
                    trace.closure.len(),
                    trace.redundancy
                ),
                None => writeln!(text, "no fixpoint within {} generations", trace.max_generations),
            }
            .unwrap();
            Ok(Out::new(code, text))
        }
        Command::Rhs { file, common } => {
            let trs = load_trs(&file)?;
            let closure = rhs_closure(&trs);
            let qd = quasi_determinism(&closure);
            let code = if qd.holds() { EXIT_PASS } else { EXIT_FAIL };
            if common.json {
                return Ok(Out::json(
                    code,
                    json!({ "equations": closure, "quasi_determinism": qd, "holds": qd.holds() }),
                ));
            }
            let mut text = String::new();
            for e in &closure {
                writeln!(text, "{e}").unwrap();
            }
            writeln!(text, "quasi-deterministic: {}", if qd.holds() { "yes" } else { "no" }).unwrap();
            for e in &qd.variable_sides {
                writeln!(text, "  variable side: {e}").unwrap();
            }
            for e in &qd.root_stable {
                writeln!(text, "  root-stable: {e}").unwrap();
            }
            for (a, b) in &qd.repetitions {
                writeln!(text, "  repeated root pair: {a} and {b}").unwrap();
            }
            Ok(Out::new(code, text))
        }
        Command::Cps { file, common } => {
            let trs = load_trs(&file)?;
            let cps = critical_pairs(&trs);
            if common.json {
                return Ok(Out::json(EXIT_PASS, &cps));
            }
            let mut text = String::new();
            for cp in &cps {
                writeln!(text, "{cp}").unwrap();
            }
            writeln!(
                text,
                "{} critical pair{}",
                cps.len(),
                if cps.len() == 1 { "" } else { "s" }
            )
            .unwrap();
            Ok(Out::new(EXIT_PASS, text))
        }
        Command::Nosup { file, common } => {
            let trs = load_trs(&file)?;
            let sups = nosup(&trs);
            if common.json {
                return Ok(Out::json(EXIT_PASS, &sups));
            }
            let mut text = String::new();
            for s in &sups {
                writeln!(text, "{}  ([{}] into [{}] at {})", s.term, s.inner, s.outer, s.position).unwrap();
            }
            writeln!(
                text,
                "{} superposition{}",
                sups.len(),
                if sups.len() == 1 { "" } else { "s" }
            )
            .unwrap();
            Ok(Out::new(EXIT_PASS, text))
        }
        Command::Normalize { file, term, common } => {
            let trs = load_trs(&file)?;
            let t = term_arg(&term, &trs)?;
            let (trace, code) = match trs.normalize(&t, fuel(&common)?) {
                Ok(tr) => (tr, EXIT_PASS),
                Err(Error::FuelExhausted { partial }) => (*partial, EXIT_UNKNOWN),
                Err(e) => return Err(e.into()),
            };
            if common.json {
                return Ok(Out::json(
                    code,
                    json!({ "trace": trace, "complete": code == EXIT_PASS }),
                ));
            }
            let mut text = render_trace(&trs, &trace)?;
            if code != EXIT_PASS {
                writeln!(text, "fuel exhausted: the last term is not a normal form").unwrap();
            }
            Ok(Out::new(code, text))
        }
        Command::Collapse {
            file,
            depth,
            max_terms,
            common,
        } => {
            let trs = load_trs(&file)?;
            let search = subterm_collapse_search(&trs, depth, max_terms, fuel(&common)?)?;
            let code = if search.witness.is_some() { EXIT_FAIL } else { EXIT_PASS };
            if common.json {
                return Ok(Out::json(code, &search));
            }
            let text = match &search.witness {
                Some(w) => format!(
                    "collapsing: {} and its subterm at {} both normalize to {}\n",
                    w.term, w.position, w.normal_form
                ),
                None => format!(
                    "no collapse up to depth {} ({} terms, requested depth {})\n",
                    search.depth_complete, search.terms_examined, search.depth_requested
                ),
            };
            Ok(Out::new(code, text))
        }
        Command::Minsky { command } => minsky(command),
        Command::Cap {
            file,
            knowledge,
            goal,
            max_size,
            max_rounds,
            common,
        } => {
            let trs = load_trs(&file)?;
            let knowledge = knowledge
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| term_arg(s, &trs))
                .collect::<Result<Vec<_>, _>>()?;
            let goal = term_arg(&goal, &trs)?;
            if let Some(t) = knowledge.iter().chain([&goal]).find(|t| !t.is_ground()) {
                return Err(input_error(format!("{t} is not ground")));
            }
            let inst = CapInstance {
                theory: trs,
                knowledge,
                goal,
                warnings: Vec::new(),
            };
            cap_command(&inst, max_size, max_rounds, &common, None)
        }
    }
}

fn minsky(cmd: MinskyCommand) -> CmdResult {
    match cmd {
        MinskyCommand::Validate(a) => {
            let m = load_machine(&a.file)?;
            let witness = validate_machine(&m);
            let code = if witness.is_none() { EXIT_PASS } else { EXIT_FAIL };
            if a.common.json {
                let pair = witness.map(|(i, j)| [m.transitions[i].to_string(), m.transitions[j].to_string()]);
                return Ok(Out::json(
                    code,
                    json!({ "valid": witness.is_none(), "violation": pair }),
                ));
            }
            Ok(Out::new(
                code,
                match witness {
                    None => "valid: reversible and deterministic\n".to_string(),
                    Some((i, j)) => format!("invalid: {} and {} share a state\n", m.transitions[i], m.transitions[j]),
                },
            ))
        }
        MinskyCommand::Simulate(a) => {
            let m = load_machine(&a.file)?;
            let run = simulate(&m, Config::start(&m, a.k, a.p), a.max_steps);
            let code = match run.stop {
                Stop::Final => EXIT_PASS,
                Stop::Stuck => EXIT_FAIL,
                Stop::StepLimit | Stop::Overflow => EXIT_UNKNOWN,
            };
            if a.common.json {
                return Ok(Out::json(code, &run));
            }
            Ok(Out::new(code, render_run(&m, &run)))
        }
        MinskyCommand::Encode(a) => {
            let m = load_machine(&a.file)?;
            let inst = encode_args(&m, &a)?.0;
            if a.common.json {
                return Ok(Out::json(
                    EXIT_PASS,
                    json!({
                        "system": render_trs(&inst.theory),
                        "knowledge": inst.knowledge,
                        "goal": inst.goal,
                        "warnings": inst.warnings,
                    }),
                ));
            }
            let mut text = String::new();
            for w in &inst.warnings {
                writeln!(text, "# warning: {w}").unwrap();
            }
            writeln!(
                text,
                "# knowledge: {}",
                inst.knowledge
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join("; ")
            )
            .unwrap();
            writeln!(text, "# goal: {}", inst.goal).unwrap();
            text.push_str(&render_trs(&inst.theory));
            Ok(Out::new(EXIT_PASS, text))
        }
        MinskyCommand::Cap(a) => {
            let m = load_machine(&a.file)?;
            let (inst, run) = encode_args(&m, &a)?;
            let canonical = run.as_ref().and_then(|r| canonical_cap(&m, r).ok());
            cap_command(&inst, a.max_size, a.max_rounds, &a.common, canonical)
        }
    }
}

// Encodes with the given halting counters, or with those of a simulation.
fn encode_args(m: &Machine, a: &MachineArgs) -> Result<(CapInstance, Option<Run>), CmdError> {
    let run = simulate(m, Config::start(m, a.k, a.p), a.max_steps);
    let (kp, pp) = match (a.kp, a.pp) {
        (Some(kp), Some(pp)) => (kp, pp),
        (kp, pp) if run.halted() => (kp.unwrap_or(run.last().c1), pp.unwrap_or(run.last().c2)),
        _ => {
            return Err(input_error(format!(
                "the machine does not halt within {} steps; pass --kp and --pp",
                a.max_steps
            )))
        }
    };
    let inst = encode(m, a.k, a.p, kp, pp)?;
    Ok((inst, run.halted().then_some(run)))
}

fn render_run(m: &Machine, run: &Run) -> String {
    let mut text = String::new();
    writeln!(text, "{}", run.configs[0]).unwrap();
    for (c, &i) in run.configs[1..].iter().zip(&run.fired) {
        writeln!(text, "{}  via {}", c, m.transitions[i]).unwrap();
    }
    let stop = match run.stop {
        Stop::Final => format!("halted in {} after {} steps", m.final_state, run.len()),
        Stop::Stuck => "stuck: no transition enabled".to_string(),
        Stop::StepLimit => format!("step limit reached after {} steps", run.len()),
        Stop::Overflow => "counter overflow".to_string(),
    };
    writeln!(text, "{stop}").unwrap();
    text
}

fn cap_command(
    inst: &CapInstance,
    max_size: usize,
    max_rounds: usize,
    common: &Common,
    canonical: Option<Term>,
) -> CmdResult {
    let fuel = fuel(common)?;
    let search = cap_search(inst, max_size, max_rounds, fuel);
    let code = if search.found.is_some() {
        EXIT_PASS
    } else {
        EXIT_UNKNOWN
    };
    let trace = match &search.found {
        Some(w) => Some(inst.theory.normalize(&plug(&w.cap, &inst.knowledge), fuel)?),
        None => None,
    };
    if common.json {
        return Ok(Out::json(
            code,
            json!({ "search": search, "trace": trace, "canonical_cap": canonical }),
        ));
    }
    let mut text = String::new();
    match (&search.found, &trace) {
        (Some(w), Some(tr)) => {
            writeln!(text, "cap: {}", w.cap).unwrap();
            text.push_str(&render_trace(&inst.theory, tr)?);
        }
        _ => {
            let why = if search.saturated {
                format!("no cap with terms of size at most {}", search.max_term_size)
            } else {
                format!(
                    "not found within {} rounds and size {}",
                    search.rounds, search.max_term_size
                )
            };
            writeln!(text, "{why}").unwrap();
        }
    }
    writeln!(
        text,
        "{} deducible terms after {} rounds{}",
        search.deducible,
        search.rounds,
        if search.pruned {
            " (sort and usefulness pruning)"
        } else {
            ""
        }
    )
    .unwrap();
    if let Some(c) = canonical {
        writeln!(text, "canonical cap: {c}").unwrap();
    }
    Ok(Out::new(code, text))
}
