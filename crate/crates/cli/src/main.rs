use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dsmlog::engine::{Edb, EvaluationState};
use dsmlog::frontend::parse_program;
use dsmlog::io::{dump_relation, load_facts, string_relations, Encoding};
use dsmlog::Dictionary;

#[derive(Parser)]
#[command(name = "dsmlog", version, about = "Evaluate positive Datalog programs over columnar relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program to its fixpoint.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Program file.
    program: PathBuf,
    /// Directory holding `<relation>.tsv` fact files.
    #[arg(long)]
    facts: PathBuf,
    /// Directory the dumped relations are written to (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the available hardware parallelism.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Print one line per iteration and head relation.
    #[arg(long)]
    stats: bool,
    /// Relations to dump; defaults to every derived relation.
    #[arg(long, value_delimiter = ',')]
    dump: Vec<String>,
}

/// Failure that has already been reported on stderr.
#[derive(Debug)]
struct Reported;

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("reported")
    }
}

impl std::error::Error for Reported {}

fn run(args: RunArgs) -> Result<()> {
    let started = Instant::now();
    let text = fs::read_to_string(&args.program)
        .with_context(|| format!("reading {}", args.program.display()))?;
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", e.render(&args.program.display().to_string()));
            return Err(Reported.into());
        }
    };
    if !args.facts.is_dir() {
        bail!("facts directory {} does not exist", args.facts.display());
    }
    let dump: Vec<String> = if args.dump.is_empty() {
        program.idb_relations().into_iter().map(str::to_owned).collect()
    } else {
        args.dump.clone()
    };
    if let Some(unknown) = dump.iter().find(|r| program.arity(r).is_none()) {
        bail!("--dump names `{unknown}`, which the program never mentions");
    }

    let mut dict = Dictionary::new();
    let mut edb = Edb::new();
    let mut dictionary_coded = BTreeSet::new();
    for (name, &arity) in &program.relations {
        let path = args.facts.join(format!("{name}.tsv"));
        if !path.is_file() {
            continue;
        }
        let loaded = load_facts(&path, arity, &mut dict).with_context(|| format!("loading {}", path.display()))?;
        if loaded.encoding == Encoding::Dictionary {
            dictionary_coded.insert(name.clone());
        }
        edb.insert(name.clone(), loaded.rows);
    }

    let workers = match args.workers {
        Some(n) => usize::from(n),
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let state = pool.install(|| -> Result<EvaluationState> {
        let mut state = EvaluationState::seed(&program, &edb, &mut dict)?;
        while !state.is_fixpoint() {
            state.run_iteration();
            if args.stats {
                let s = state.stats().last().expect("iteration recorded");
                let ms = s.elapsed.as_secs_f64() * 1e3;
                for (rel, delta) in &s.deltas {
                    println!("iter={} rel={rel} delta={delta} ms={ms:.3}", s.iteration);
                }
            }
        }
        Ok(state)
    })?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let decoded = string_relations(&program, &dictionary_coded);
    for name in &dump {
        let rows = state.sorted_rows(name).expect("relation exists");
        let path = args.out.join(format!("{name}.tsv"));
        dump_relation(&rows, &dict, decoded.contains(name), &path)?;
    }

    for rel in state.relations() {
        println!("rel={} size={}", rel.name(), rel.full.len());
    }
    println!("iterations={}", state.iterations());
    println!("wall_ms={:.3}", started.elapsed().as_secs_f64() * 1e3);
    Ok(())
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Reported>() => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
