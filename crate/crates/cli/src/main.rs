use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pgasrob::dsl::{default_domain, validate};
use pgasrob::oracle::{oracle_check, oracle_normal_form_check, OracleVerdict};
use pgasrob::robustness::{
    check_robustness, CheckOptions, GuessMode, RobustnessError, Verdict, VerdictJson,
};
use pgasrob::semantics::{
    computation_from_json, computation_to_json, format_computation, parse_computation, EventJson,
    Schedule,
};
use pgasrob::traces::{extract_cyc_cycle, happens_before, to_dot, CycSegment, LinkKind};
use pgasrob::{parse_program, Event, Instance, Machine};
use tracing_subscriber::EnvFilter;

#[derive(Parser, Debug)]
#[command(
    name = "pgasrob",
    version,
    about = "Robustness checking for PGAS programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the checker (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Print the happens-before graph of the reported computation as DOT.
    #[arg(long = "emit-dot", global = true)]
    emit_dot: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide robustness.
    Check {
        #[command(flatten)]
        program: ProgramArgs,
        /// Cap on product states per cycle type (0 = no cap).
        #[arg(long = "max-states", default_value_t = 500_000)]
        max_states: usize,
        #[arg(long, value_enum, default_value_t = Guess::AtIssue)]
        guess: Guess,
    },
    /// Search for a violation among computations up to a length.
    Oracle {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long, default_value_t = 12)]
        bound: usize,
        /// Cap on explored prefixes (0 = no cap).
        #[arg(long = "max-states", default_value_t = 0)]
        max_states: usize,
        /// Only count computations in normal form.
        #[arg(long = "normal-form")]
        normal_form: bool,
    },
    /// Run one random schedule and summarize its happens-before relation.
    Simulate {
        #[command(flatten)]
        program: ProgramArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Steps before the queues are drained.
        #[arg(long, default_value_t = 20)]
        bound: usize,
    },
    /// Happens-before relation of a computation (text or JSON file).
    Hb { input: PathBuf },
}

#[derive(Args, Debug)]
struct ProgramArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    nodes: u32,
    /// Size of the value domain (default: large enough for ranks and constants).
    #[arg(long)]
    domain: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Guess {
    Literal,
    AtIssue,
}

fn main() -> ExitCode {
    let filter = EnvFilter::try_from_env("PGASROB_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("setting up the thread pool")?;
    }
    match &cli.command {
        Command::Check {
            program,
            max_states,
            guess,
        } => {
            let inst = load(program)?;
            let options = CheckOptions {
                max_states: (*max_states > 0).then_some(*max_states),
                guess: match guess {
                    Guess::Literal => GuessMode::Literal,
                    Guess::AtIssue => GuessMode::AtIssue,
                },
            };
            match check_robustness(&inst, &options) {
                Ok(v) => {
                    let mut out = if cli.json {
                        json(&v.to_json())?
                    } else {
                        verdict_text(&v)
                    };
                    if let (true, Verdict::NotRobust(c)) = (cli.emit_dot, &v) {
                        out.push_str(&dot(&c.computation)?);
                    }
                    print!("{out}");
                    Ok(if v.is_robust() { 0 } else { 1 })
                }
                Err(e @ RobustnessError::ResourceBound { .. }) => {
                    if cli.json {
                        let j = VerdictJson {
                            verdict: "resource_bound".into(),
                            cycle_type: None,
                            computation: None,
                            hb_cycle: None,
                            bound: None,
                        };
                        print!("{}", json(&j)?);
                    }
                    eprintln!("{e}");
                    Ok(2)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Oracle {
            program,
            bound,
            max_states,
            normal_form,
        } => {
            let inst = load(program)?;
            let cap = (*max_states > 0).then_some(*max_states);
            let v = if *normal_form {
                oracle_normal_form_check(&inst, *bound, cap)?
            } else {
                oracle_check(&inst, *bound, cap)?
            };
            let mut out = if cli.json {
                json(&v.to_json())?
            } else {
                oracle_text(&v)
            };
            if let (true, OracleVerdict::ViolationFound { computation, .. }) = (cli.emit_dot, &v) {
                out.push_str(&dot(computation)?);
            }
            print!("{out}");
            Ok(match v {
                OracleVerdict::NoViolationWithin { .. } => 0,
                OracleVerdict::ViolationFound { .. } => 1,
                OracleVerdict::Exhausted { .. } => 2,
            })
        }
        Command::Simulate {
            program,
            seed,
            bound,
        } => {
            let inst = load(program)?;
            let machine = Machine::new(&inst)?;
            let run = machine.run_schedule(&Schedule::Random {
                seed: *seed,
                max_steps: *bound,
            })?;
            print!("{}", hb_report(&run.computation, cli.json, cli.emit_dot)?);
            Ok(0)
        }
        Command::Hb { input } => {
            let events = read_computation(input)?;
            print!("{}", hb_report(&events, cli.json, cli.emit_dot)?);
            let hb = happens_before(&events)?;
            Ok(if hb.is_violating() { 1 } else { 0 })
        }
    }
}

fn load(args: &ProgramArgs) -> Result<Instance> {
    let name = args.input.display().to_string();
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {name}"))?;
    let code = parse_program(&text).map_err(|e| anyhow::anyhow!(e.render(&name)))?;
    if args.nodes == 0 {
        bail!("--nodes must be at least 1");
    }
    let domain = args
        .domain
        .unwrap_or_else(|| default_domain(&code, args.nodes));
    let inst = Instance::new(code, args.nodes, domain);
    let diags = validate(&inst);
    if !diags.is_empty() {
        let msgs: Vec<String> = diags.iter().map(|d| d.render(&name)).collect();
        bail!("{}", msgs.join("\n"));
    }
    Ok(inst)
}

fn read_computation(path: &Path) -> Result<Vec<Event>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        let items: Vec<EventJson> =
            serde_json::from_str(&text).context("parsing JSON computation")?;
        return Ok(computation_from_json(&items));
    }
    parse_computation(&text).map_err(|e| anyhow::anyhow!("{}:{e}", path.display()))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn dot(events: &[Event]) -> Result<String> {
    Ok(to_dot(events, &happens_before(events)?))
}

fn cycle_text(segments: &[CycSegment]) -> String {
    let mut s = String::new();
    for seg in segments {
        let _ = writeln!(
            s,
            "  rank {}: a=#{} b=#{} c=#{} d=#{}, then {}",
            seg.rank,
            seg.a,
            seg.b,
            seg.c,
            seg.d,
            match seg.link {
                LinkKind::Cf => "cf",
                LinkKind::Eq => "eq",
            }
        );
    }
    s
}

fn indexed(events: &[Event]) -> String {
    format_computation(events)
        .lines()
        .enumerate()
        .map(|(i, l)| format!("  {i:>3}  {l}\n"))
        .collect()
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Robust { explored } => format!("robust ({explored} product states explored)\n"),
        Verdict::NotRobust(c) => format!(
            "not robust: cycle type {:?}\ncomputation (cuts {:?}):\n{}happens-before cycle:\n{}",
            c.cycle_type,
            c.cuts,
            indexed(&c.computation),
            cycle_text(&c.hb_cycle.segments)
        ),
    }
}

fn oracle_text(v: &OracleVerdict) -> String {
    match v {
        OracleVerdict::NoViolationWithin { bound } => {
            format!("no violation within {bound} events\n")
        }
        OracleVerdict::Exhausted { cap } => format!("exhausted: more than {cap} prefixes\n"),
        OracleVerdict::ViolationFound {
            computation,
            hb_cycle,
        } => format!(
            "violation of length {}\ncomputation:\n{}happens-before cycle:\n{}",
            computation.len(),
            indexed(computation),
            cycle_text(&hb_cycle.segments)
        ),
    }
}

#[derive(serde::Serialize)]
struct HbJson {
    computation: Vec<EventJson>,
    po: Vec<(usize, usize)>,
    cf: Vec<(usize, usize)>,
    eq: Vec<(usize, usize)>,
    violating: bool,
    hb_cycle: Option<Vec<CycSegment>>,
}

fn hb_report(events: &[Event], as_json: bool, emit_dot: bool) -> Result<String> {
    let hb = happens_before(events)?;
    let cycle = extract_cyc_cycle(events)?;
    let mut out = if as_json {
        json(&HbJson {
            computation: computation_to_json(events),
            po: hb.po.clone(),
            cf: hb.cf.clone(),
            eq: hb.eq.clone(),
            violating: hb.is_violating(),
            hb_cycle: cycle.as_ref().map(|c| c.segments.clone()),
        })?
    } else {
        let mut s = format!(
            "computation ({} events):\n{}",
            events.len(),
            indexed(events)
        );
        let _ = writeln!(
            s,
            "po {} edges, cf {} edges, eq {} edges",
            hb.po.len(),
            hb.cf.len(),
            hb.eq.len()
        );
        match &cycle {
            Some(c) => {
                let _ = write!(
                    s,
                    "violating; happens-before cycle:\n{}",
                    cycle_text(&c.segments)
                );
            }
            None => s.push_str("no happens-before cycle\n"),
        }
        s
    };
    if emit_dot {
        out.push_str(&to_dot(events, &hb));
    }
    Ok(out)
}
