use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use smoothprox::run::synthetic_source;
use smoothprox::{run, CliError, InstanceSource, ProblemKind, RunConfig, RunReport, ScheduleSpec};

#[derive(Parser)]
#[command(
    name = "smoothprox",
    version,
    about = "Composite convex optimization by proximal iterative smoothing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Max-norm matrix completion through its PSD lift.
    Matcomp(RunArgs),
    /// Robust PCA: trace norm plus l1 residual.
    Rpca(RunArgs),
    /// Sparse inverse covariance selection.
    Sics(RunArgs),
    /// Basis pursuit: min |x|_1 subject to Ax = b.
    Bp(RunArgs),
    /// Run the configurations listed in a file, one per line, concurrently.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["synthetic", "input"]))]
struct RunArgs {
    /// Synthetic instance, e.g. `50x50,rank=2,p=0.05,seed=7`.
    #[arg(long)]
    synthetic: Option<String>,
    /// Data file (MatrixMarket or headered CSV).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Right-hand side `b` for bp with --input.
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Seed for synthetic instances, unless given in the spec.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// fixed:<beta>, dynamic:<a> or dynamic:auto.
    #[arg(long, default_value = "dynamic:auto")]
    schedule: String,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1)]
    trace_every: usize,
    /// Trace CSV to write.
    #[arg(long)]
    output: PathBuf,
    /// Also write the solution as a MatrixMarket array.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// File with one `<kind> [flags]` run per line; `#` starts a comment.
    file: PathBuf,
    /// Concurrent runs (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn to_config(kind: ProblemKind, a: RunArgs) -> Result<RunConfig, CliError> {
    let source = match (a.synthetic, a.input) {
        (Some(spec), None) => {
            if a.rhs.is_some() {
                return Err(CliError::Config("--rhs applies only with --input".into()));
            }
            synthetic_source(&spec, a.seed)?
        }
        (None, Some(path)) => {
            if a.seed.is_some() {
                return Err(CliError::Config(
                    "--seed applies only to synthetic instances".into(),
                ));
            }
            InstanceSource::File { path, rhs: a.rhs }
        }
        _ => {
            return Err(CliError::Config(
                "give exactly one of --synthetic and --input".into(),
            ))
        }
    };
    let config = RunConfig {
        kind,
        source,
        lambda: a.lambda,
        schedule: a.schedule.parse::<ScheduleSpec>()?,
        max_iter: a.max_iter,
        rel_tol: a.rel_tol,
        trace_every: a.trace_every,
        output: a.output,
        solution: a.solution,
    };
    config.validate()?;
    Ok(config)
}

fn report_lines(r: &RunReport) -> Vec<String> {
    let mut lines = Vec::new();
    if let Some(a) = r.auto_a {
        lines.push(format!("schedule=dynamic:auto a={a:e}"));
    }
    lines.push(r.summary.to_string());
    lines
}

fn single(kind: ProblemKind, args: RunArgs) -> ExitCode {
    match to_config(kind, args).and_then(|c| run(&c)) {
        Ok(report) => {
            for line in report_lines(&report) {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn sweep(args: SweepArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.file.display());
            return ExitCode::FAILURE;
        }
    };
    let mut configs = Vec::new();
    let mut outputs = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let argv = std::iter::once("smoothprox").chain(line.split_whitespace());
        let parsed = Cli::try_parse_from(argv)
            .map_err(|e| CliError::Config(e.render().to_string().trim_end().to_string()))
            .and_then(|cli| match cli.command {
                Command::Matcomp(a) => to_config(ProblemKind::MatComp, a),
                Command::Rpca(a) => to_config(ProblemKind::Rpca, a),
                Command::Sics(a) => to_config(ProblemKind::Sics, a),
                Command::Bp(a) => to_config(ProblemKind::Bp, a),
                Command::Sweep(_) => Err(CliError::Config("sweeps cannot be nested".into())),
            })
            .and_then(|c| {
                if outputs.insert(c.output.clone()) {
                    Ok(c)
                } else {
                    Err(CliError::Config(format!(
                        "output {} is used by an earlier line",
                        c.output.display()
                    )))
                }
            });
        match parsed {
            Ok(c) => configs.push((n + 1, c)),
            Err(e) => {
                eprintln!("error: {}:{}: {e}", args.file.display(), n + 1);
                return ExitCode::FAILURE;
            }
        }
    }

    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, configs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunReport, CliError>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((_, config)) = configs.get(i) else {
                    break;
                };
                let r = run(config);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });

    let mut failed = false;
    for ((line, _), result) in configs.iter().zip(results.into_inner().unwrap()) {
        match result.expect("every configuration runs") {
            Ok(report) => {
                for l in report_lines(&report) {
                    println!("line={line} {l}");
                }
            }
            Err(e) => {
                failed = true;
                eprintln!("error: {}:{line}: {e}", args.file.display());
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Matcomp(a) => single(ProblemKind::MatComp, a),
        Command::Rpca(a) => single(ProblemKind::Rpca, a),
        Command::Sics(a) => single(ProblemKind::Sics, a),
        Command::Bp(a) => single(ProblemKind::Bp, a),
        Command::Sweep(a) => sweep(a),
    }
}
