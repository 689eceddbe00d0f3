//! Building an instance from a [`RunConfig`], solving it and reporting.

use std::fmt;
use std::time::Instant;

use smoothprox_core::problems::synth::{
    synth_completion, synth_lowrank_sparse, synth_sparse_precision, synth_sparse_recovery,
};
use smoothprox_core::problems::{
    make_basis_pursuit, make_maxnorm_completion, make_rpca, make_sics, MaxNormLift, ProblemInstance,
};
use smoothprox_core::{solve_with, BetaSchedule, Clock, Mat, Solution, SolveOptions, StopReason};

use crate::config::{resolve_seed, InstanceSource, ProblemKind, RunConfig, ScheduleSpec};
use crate::{io, trace, CliError};

/// Wall time since construction.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// An assembled instance plus what is needed to report on it.
pub struct Built {
    pub instance: ProblemInstance,
    /// Present for max-norm completion, whose variable is the lift.
    pub lift: Option<MaxNormLift>,
    /// Ground truth of a synthetic instance, compared with the reported
    /// solution.
    pub truth: Option<Mat>,
    pub lambda: Option<f64>,
}

impl Built {
    /// The part of the iterate a user cares about: the completion block for
    /// max-norm completion, the whole variable otherwise.
    pub fn reported(&self, x: &Mat) -> Mat {
        match &self.lift {
            Some(lift) => lift.x_block(x),
            None => x.clone(),
        }
    }
}

pub fn build(config: &RunConfig) -> Result<Built, CliError> {
    let (data, truth) = match &config.source {
        InstanceSource::File { path, rhs } => (load(config.kind, path, rhs.as_deref())?, None),
        InstanceSource::Synthetic { spec, seed } => synthesize(config.kind, spec, *seed)?,
    };
    let mut lambda = config.lambda;
    let (instance, lift) = match data {
        Data::Observed(obs) => {
            let l = *lambda.get_or_insert(0.2 * obs.len() as f64);
            let (inst, lift) = make_maxnorm_completion(&obs, l)?;
            (inst, Some(lift))
        }
        Data::Matrix(m) if config.kind == ProblemKind::Rpca => {
            (make_rpca(&m, need(lambda)?)?, None)
        }
        Data::Matrix(sigma) => (make_sics(&sigma, need(lambda)?)?, None),
        Data::System(a, b) => (make_basis_pursuit(&a, &b)?, None),
    };
    Ok(Built {
        instance,
        lift,
        truth,
        lambda,
    })
}

fn need(lambda: Option<f64>) -> Result<f64, CliError> {
    lambda.ok_or_else(|| CliError::Config("--lambda is required for this problem".into()))
}

enum Data {
    Observed(smoothprox_core::problems::ObservedEntries),
    Matrix(Mat),
    System(Mat, Mat),
}

fn load(
    kind: ProblemKind,
    path: &std::path::Path,
    rhs: Option<&std::path::Path>,
) -> Result<Data, CliError> {
    Ok(match kind {
        ProblemKind::MatComp => Data::Observed(io::load_observed(path)?),
        ProblemKind::Rpca | ProblemKind::Sics => Data::Matrix(io::load_matrix(path)?),
        ProblemKind::Bp => {
            let rhs = rhs.ok_or_else(|| CliError::Config("bp with --input needs --rhs".into()))?;
            Data::System(io::load_matrix(path)?, io::load_matrix(rhs)?)
        }
    })
}

fn synthesize(
    kind: ProblemKind,
    spec: &crate::config::SyntheticSpec,
    seed: u64,
) -> Result<(Data, Option<Mat>), CliError> {
    Ok(match kind {
        ProblemKind::MatComp => {
            spec.check_keys(&["rank", "q", "seed"])?;
            let (m, n) = spec.require_shape()?;
            let (full, obs) =
                synth_completion(m, n, spec.require("rank")?, spec.require("q")?, seed)?;
            (Data::Observed(obs), Some(full))
        }
        ProblemKind::Rpca => {
            spec.check_keys(&["rank", "p", "seed"])?;
            let (n1, n2) = spec.require_shape()?;
            let inst =
                synth_lowrank_sparse(n1, n2, spec.require("rank")?, spec.require("p")?, seed)?;
            (Data::Matrix(inst.m), Some(inst.w_true))
        }
        ProblemKind::Sics => {
            spec.check_keys(&["n", "density", "seed"])?;
            if spec.shape.is_some() {
                return Err(CliError::Config(
                    "sics synthetic spec takes n=<size>, not a shape".into(),
                ));
            }
            let inst = synth_sparse_precision(spec.require("n")?, spec.require("density")?, seed)?;
            (Data::Matrix(inst.sigma), None)
        }
        ProblemKind::Bp => {
            spec.check_keys(&["m", "d", "k", "seed"])?;
            if spec.shape.is_some() {
                return Err(CliError::Config(
                    "bp synthetic spec takes m=, d=, k=, not a shape".into(),
                ));
            }
            let inst = synth_sparse_recovery(
                spec.require("m")?,
                spec.require("d")?,
                spec.require("k")?,
                seed,
            )?;
            (Data::System(inst.a, inst.b), Some(inst.x_true))
        }
    })
}

/// Turns the command-line schedule into a [`BetaSchedule`], resolving
/// `dynamic:auto` to the builder's default `a`.
pub fn resolve_schedule(spec: ScheduleSpec, default_a: f64) -> Result<BetaSchedule, CliError> {
    Ok(match spec {
        ScheduleSpec::Fixed(b) => BetaSchedule::fixed(b)?,
        ScheduleSpec::Dynamic(a) => BetaSchedule::dynamic(a)?,
        ScheduleSpec::DynamicAuto => BetaSchedule::dynamic(default_a)?,
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub kind: ProblemKind,
    pub iterations: usize,
    pub final_objective: f64,
    pub best_objective: f64,
    pub stop: StopReason,
    pub time_s: f64,
    /// `|x - x_true| / |x_true|` for synthetic instances with a ground truth.
    pub recovery_error: Option<f64>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} iters={} F_final={:.10e} F_best={:.10e} stop={} time_s={:.3}",
            self.kind,
            self.iterations,
            self.final_objective,
            self.best_objective,
            self.stop.as_str(),
            self.time_s
        )?;
        if let Some(e) = self.recovery_error {
            write!(f, " recovery_err={e:.3e}")?;
        }
        Ok(())
    }
}

pub struct RunReport {
    pub summary: RunSummary,
    pub schedule: BetaSchedule,
    /// The `a` chosen by `dynamic:auto`.
    pub auto_a: Option<f64>,
    pub lambda: Option<f64>,
    pub solution: Solution,
}

pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let built = build(config)?;
    let schedule = resolve_schedule(config.schedule, built.instance.default_a)?;
    let opts = SolveOptions {
        max_iter: config.max_iter,
        rel_tol: config.rel_tol,
        trace_every: config.trace_every,
    };
    let clock = WallClock::start();
    let solution = solve_with(
        &built.instance.problem,
        &schedule,
        &opts,
        &clock,
        &mut |_| {},
    )?;
    let time_s = clock.elapsed_secs();

    trace::write_trace(&config.output, &solution.trace)?;
    let reported = built.reported(&solution.x);
    if let Some(path) = &config.solution {
        io::write_matrix(path, &reported)?;
    }
    let recovery_error = built
        .truth
        .as_ref()
        .map(|t| (&reported - t).norm() / t.norm().max(f64::MIN_POSITIVE));
    Ok(RunReport {
        summary: RunSummary {
            kind: config.kind,
            iterations: solution.iterations,
            final_objective: solution.last_objective,
            best_objective: solution.best_objective,
            stop: solution.stop,
            time_s,
            recovery_error,
        },
        auto_a: matches!(config.schedule, ScheduleSpec::DynamicAuto)
            .then_some(built.instance.default_a),
        lambda: built.lambda,
        schedule,
        solution,
    })
}

/// Parses an optional seed for synthetic sources; kept here so the binary
/// and the sweep runner agree.
pub fn synthetic_source(spec: &str, seed: Option<u64>) -> Result<InstanceSource, CliError> {
    let spec: crate::config::SyntheticSpec = spec.parse()?;
    let seed = resolve_seed(&spec, seed)?;
    Ok(InstanceSource::Synthetic { spec, seed })
}
