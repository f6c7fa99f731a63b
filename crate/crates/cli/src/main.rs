use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use padic_approx::Budget;
use padic_lab::config::{parse_seeds, ExperimentConfig, Subcommand};
use padic_lab::runs::{run, RowStatus, RunContext};
use padic_lab::suite::{default_seeds, write_summary, Profile, Status, Suite};

#[derive(Parser)]
#[command(name = "padic-lab", version, about = "Experiments on rational approximation of p-adic points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// comma-separated seeds, or a file of seeds
    #[arg(long)]
    seeds: Option<String>,
    /// worker threads
    #[arg(long)]
    parallel: Option<usize>,
    /// maximum estimated operations per enumeration
    #[arg(long = "budget-ops")]
    budget_ops: Option<u128>,
}

#[derive(Args)]
struct Experiment {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(ClapSubcommand)]
enum Command {
    /// count the approximation set and evaluate its bounds
    Count(Experiment),
    /// lattice invariants, successive minima and point counts
    Lattice(Experiment),
    /// closed-form and empirical dimensions on coordinate hyperplanes
    Dimension(Experiment),
    /// local ubiquity density of resonant neighbourhoods
    Ubiquity(Experiment),
    /// Diophantine exponent estimates of random points
    Exponent(Experiment),
    /// run the verification suite
    Verify {
        #[arg(long, value_enum, default_value = "smoke")]
        profile: Profile,
        #[command(flatten)]
        common: Common,
    },
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn experiment(sub: Subcommand, args: Experiment) -> Result<u8, String> {
    let mut cfg = ExperimentConfig::load(&args.config, sub).map_err(|e| e.to_string())?;
    if let Some(s) = &args.common.seeds {
        cfg.seeds = parse_seeds(s).map_err(|e| e.to_string())?;
    }
    let out = args.common.out.clone().or(cfg.out.clone());
    let parallel = args.common.parallel.or(cfg.parallel);
    if parallel == Some(0) {
        return Err("--parallel must be at least 1".into());
    }
    let budget = args
        .common
        .budget_ops
        .or(cfg.budget_ops)
        .map_or_else(Budget::default, Budget::new);
    let ctx = RunContext {
        budget,
        deadline: cfg.wall_clock_secs.map(|s| Instant::now() + Duration::from_secs(s)),
        inject_fault: cfg.inject_fault,
    };
    let output = run(&cfg, ctx, parallel)?;
    let writer = open_out(&out).map_err(|e| e.to_string())?;
    output.write_csv(writer).map_err(|e| e.to_string())?;
    eprintln!(
        "{}: {} rows, {} timeout, {} constraint violations, {} errors, {} invariant violations",
        sub.name(),
        output.rows.len(),
        output.count(RowStatus::Timeout),
        output.count(RowStatus::ConstraintViolation),
        output.count(RowStatus::Error),
        output.count(RowStatus::InvariantViolation),
    );
    Ok(output.exit_code() as u8)
}

fn verify(profile: Profile, common: Common) -> Result<u8, String> {
    let seeds = match &common.seeds {
        Some(s) => parse_seeds(s).map_err(|e| e.to_string())?,
        None => default_seeds(),
    };
    let budget = common.budget_ops.map_or_else(Budget::default, Budget::new);
    let suite = Suite::new(profile, seeds, budget)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(width) = common.parallel {
        builder = builder.num_threads(width);
    }
    let pool = builder.build().map_err(|e| e.to_string())?;
    let results = pool.install(|| suite.run(|res| eprintln!("{}", res.line())));
    let writer = open_out(&common.out).map_err(|e| e.to_string())?;
    write_summary(writer, &results).map_err(|e| e.to_string())?;
    let failed = results.iter().filter(|r| r.status == Status::Fail).count();
    eprintln!("verify ({profile:?}): {failed} of {} criteria failed", results.len());
    Ok(if failed > 0 { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(a) => experiment(Subcommand::Count, a),
        Command::Lattice(a) => experiment(Subcommand::Lattice, a),
        Command::Dimension(a) => experiment(Subcommand::Dimension, a),
        Command::Ubiquity(a) => experiment(Subcommand::Ubiquity, a),
        Command::Exponent(a) => experiment(Subcommand::Exponent, a),
        Command::Verify { profile, common } => verify(profile, common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
