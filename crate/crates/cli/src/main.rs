//! `qe`: eliminate the existential block of a QDIMACS formula.
//!
//! Exit codes: 0 on success, 2 when `--verify` finds a counterexample,
//! 1 on any error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qe_core::dsequent::{DSequentStore, StoreSnapshot};
use qe_core::qdimacs::{fingerprint, parse_qdimacs, write_dimacs};
use qe_core::{sat, solve, EcnfProblem, Exec, Lit, Oracle, SolveOptions, SolveResult};

#[derive(Parser, Debug)]
#[command(
    name = "qe",
    version,
    about = "Quantifier elimination for existentially quantified CNF"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Computes a CNF over the free variables equivalent to the input.
    Solve(SolveArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StatsFormat {
    Text,
    Json,
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    /// QDIMACS input with at most one existential block.
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Check the result against exhaustive enumeration.
    #[arg(long)]
    verify: bool,
    /// Disable re-use of stored D-sequents.
    #[arg(long)]
    no_reuse: bool,
    /// Write the D-sequent store to this file after solving.
    #[arg(long, value_name = "PATH")]
    dump_dseqs: Option<PathBuf>,
    /// Start from a D-sequent store written by `--dump-dseqs`.
    #[arg(long, value_name = "PATH")]
    load_dseqs: Option<PathBuf>,
    /// Largest variable count accepted by `--verify`.
    #[arg(long, default_value_t = 24, value_name = "N")]
    oracle_limit: u32,
    /// Also print the counters to standard error in this format.
    #[arg(long, value_name = "FORMAT")]
    stats: Option<StatsFormat>,
    /// Recorded in the output; the solver is deterministic.
    #[arg(long, default_value_t = 0, value_name = "N")]
    seed: u64,
    /// Fault injection: drop the K-th output clause (1-based, id order)
    /// before emitting and verifying.
    #[arg(long, hide = true, value_name = "K")]
    drop_output_clause: Option<usize>,
}

enum Verdict {
    Unchecked,
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Solve(args) = cli.command;
    match run(&args) {
        Ok(Verdict::Fail) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(args: &SolveArgs) -> Result<Verdict> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let original = parse_qdimacs(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    if args.verify && original.num_vars() > args.oracle_limit.min(62) {
        bail!(
            "--verify refused: {} variables exceed the oracle limit of {}",
            original.num_vars(),
            args.oracle_limit.min(62)
        );
    }
    let print = fingerprint(&original);

    let options = SolveOptions {
        reuse: !args.no_reuse,
        ..SolveOptions::default()
    };
    let (problem, store) = match &args.load_dseqs {
        Some(path) => {
            let (p, s) = load_store(path, &original, &print, &options)?;
            (p, Some(s))
        }
        None => (original.clone(), None),
    };
    let mut result = solve(&problem, &options, store)?;
    if let Some(k) = args.drop_output_clause {
        let victim = result.f_star.ids().nth(k.wrapping_sub(1));
        let victim = victim.with_context(|| format!("no output clause {k} to drop"))?;
        result.f_star = result.f_star.retain(|id| id != victim);
    }

    let mut stats: Vec<(&str, u64)> = result.stats.fields().to_vec();
    stats.push(("unsat", u64::from(result.unsat)));
    stats.push(("seed", args.seed));
    let out = write_dimacs(&result.f_star, &stats);
    match &args.output {
        Some(path) => fs::write(path, &out).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(out.as_bytes())?,
    }
    match args.stats {
        Some(StatsFormat::Json) => {
            let map: serde_json::Map<String, serde_json::Value> =
                stats.iter().map(|&(k, v)| (k.to_string(), v.into())).collect();
            eprintln!("{}", serde_json::Value::Object(map));
        }
        Some(StatsFormat::Text) => {
            for (k, v) in &stats {
                eprintln!("{k} {v}");
            }
        }
        None => {}
    }
    if let Some(path) = &args.dump_dseqs {
        let snap = result.store.snapshot(&result.problem, Some(print.clone()));
        fs::write(path, snap.render()).with_context(|| format!("writing {}", path.display()))?;
    }
    if args.verify {
        return verify(&result, &original, args.oracle_limit);
    }
    Ok(Verdict::Unchecked)
}

fn verify(result: &SolveResult, original: &EcnfProblem, limit: u32) -> Result<Verdict> {
    let oracle = Oracle::new(limit, Exec::default());
    match oracle.counterexample(&result.f_star, original)? {
        None => {
            eprintln!("verify: PASS");
            Ok(Verdict::Pass)
        }
        Some(point) => {
            eprintln!("verify: FAIL at free point {point}");
            Ok(Verdict::Fail)
        }
    }
}

/// Re-adds the derived clauses of a dump, each checked to follow from the
/// input, and fills a store with its D-sequents.
fn load_store(
    path: &Path,
    original: &EcnfProblem,
    print: &str,
    options: &SolveOptions,
) -> Result<(EcnfProblem, DSequentStore)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let snap = StoreSnapshot::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    match &snap.fingerprint {
        Some(f) => ensure!(f == print, "{} was written for a different formula", path.display()),
        None => bail!("{} carries no formula fingerprint", path.display()),
    }
    let base: Vec<Vec<Lit>> = original.formula().clauses().map(|c| c.lits().to_vec()).collect();
    let mut problem = original.clone();
    for (id, lits) in &snap.derived {
        let mut refutation = base.clone();
        refutation.extend(lits.iter().map(|l| vec![l.negate()]));
        ensure!(
            !sat::is_sat(&refutation),
            "derived clause {id} does not follow from the formula"
        );
        let got = problem.add_derived(lits.iter().copied())?;
        ensure!(got == *id, "derived clause {id} would be numbered {got}");
    }
    let mut store = DSequentStore::new(options.store);
    for s in &snap.dseqs {
        ensure!(
            s.tag() <= problem.tag(),
            "D-sequent {s} refers to an unknown formula version"
        );
        ensure!(
            problem.formula().contains(s.target()) && s.constraint().iter().all(|&h| problem.formula().contains(h)),
            "D-sequent {s} refers to an unknown clause"
        );
        store.admit(s, &problem);
    }
    Ok((problem, store))
}
