//! Run configuration and the small string grammars used on the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    MatComp,
    Rpca,
    Sics,
    Bp,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::MatComp => "matcomp",
            ProblemKind::Rpca => "rpca",
            ProblemKind::Sics => "sics",
            ProblemKind::Bp => "bp",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `fixed:<beta>`, `dynamic:<a>` or `dynamic:auto`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    Fixed(f64),
    Dynamic(f64),
    DynamicAuto,
}

impl FromStr for ScheduleSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "schedule '{s}': expected fixed:<beta>, dynamic:<a> or dynamic:auto"
            ))
        };
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        let positive = |v: &str, what: &str| -> Result<f64, CliError> {
            match v.parse::<f64>() {
                Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
                _ => Err(CliError::Config(format!(
                    "schedule '{s}': {what} must be a positive number"
                ))),
            }
        };
        match (name, arg) {
            ("dynamic", "auto") => Ok(ScheduleSpec::DynamicAuto),
            ("dynamic", a) => positive(a, "a").map(ScheduleSpec::Dynamic),
            ("fixed", b) => positive(b, "beta").map(ScheduleSpec::Fixed),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Fixed(b) => write!(f, "fixed:{b}"),
            ScheduleSpec::Dynamic(a) => write!(f, "dynamic:{a}"),
            ScheduleSpec::DynamicAuto => f.write_str("dynamic:auto"),
        }
    }
}

/// Comma-separated synthetic instance description, e.g.
/// `50x50,rank=2,p=0.05,seed=7` or `m=20,d=100,k=5,seed=1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntheticSpec {
    pub shape: Option<(usize, usize)>,
    params: BTreeMap<String, String>,
}

impl FromStr for SyntheticSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let mut spec = SyntheticSpec::default();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            if let Some((k, v)) = item.split_once('=') {
                if spec
                    .params
                    .insert(k.trim().to_string(), v.trim().to_string())
                    .is_some()
                {
                    return Err(CliError::Config(format!(
                        "synthetic spec: '{}' given twice",
                        k.trim()
                    )));
                }
            } else if let Some((r, c)) = item.split_once('x') {
                let dim = |v: &str| {
                    v.trim().parse::<usize>().map_err(|_| {
                        CliError::Config(format!("synthetic spec: bad shape '{item}'"))
                    })
                };
                if spec.shape.replace((dim(r)?, dim(c)?)).is_some() {
                    return Err(CliError::Config("synthetic spec: shape given twice".into()));
                }
            } else {
                return Err(CliError::Config(format!(
                    "synthetic spec: '{item}' is neither ROWSxCOLS nor key=value"
                )));
            }
        }
        Ok(spec)
    }
}

impl SyntheticSpec {
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.params
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    CliError::Config(format!("synthetic spec: invalid value '{v}' for '{key}'"))
                })
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::Config(format!("synthetic spec: missing '{key}'")))
    }

    pub fn require_shape(&self) -> Result<(usize, usize), CliError> {
        self.shape
            .ok_or_else(|| CliError::Config("synthetic spec: missing shape ROWSxCOLS".into()))
    }

    /// Fails on keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "synthetic spec: unknown key '{k}' (expected one of {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// Data file; basis pursuit also needs the right-hand side `b`.
    File {
        path: PathBuf,
        rhs: Option<PathBuf>,
    },
    Synthetic {
        spec: SyntheticSpec,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ProblemKind,
    pub source: InstanceSource,
    pub lambda: Option<f64>,
    pub schedule: ScheduleSpec,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub trace_every: usize,
    pub output: PathBuf,
    /// Where to write the returned iterate, if anywhere.
    pub solution: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(l) = self.lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(CliError::Config(format!(
                    "--lambda must be positive, got {l}"
                )));
            }
            if self.kind == ProblemKind::Bp {
                return Err(CliError::Config("bp takes no --lambda".into()));
            }
        } else if matches!(self.kind, ProblemKind::Rpca | ProblemKind::Sics) {
            return Err(CliError::Config(format!("{} needs --lambda", self.kind)));
        }
        if self.max_iter == 0 {
            return Err(CliError::Config("--max-iter must be at least 1".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(CliError::Config(format!(
                "--rel-tol must be >= 0, got {}",
                self.rel_tol
            )));
        }
        if self.trace_every == 0 {
            return Err(CliError::Config("--trace-every must be at least 1".into()));
        }
        match &self.source {
            InstanceSource::File { rhs: None, .. } if self.kind == ProblemKind::Bp => {
                Err(CliError::Config("bp with --input needs --rhs".into()))
            }
            InstanceSource::File { rhs: Some(_), .. } if self.kind != ProblemKind::Bp => {
                Err(CliError::Config("--rhs applies only to bp".into()))
            }
            _ => Ok(()),
        }
    }
}

/// The seed may come from the spec string, from `--seed`, or both if they
/// agree; one of them is required.
pub fn resolve_seed(spec: &SyntheticSpec, flag: Option<u64>) -> Result<u64, CliError> {
    match (spec.get::<u64>("seed")?, flag) {
        (Some(a), Some(b)) if a != b => Err(CliError::Config(format!(
            "seed {a} in the synthetic spec conflicts with --seed {b}"
        ))),
        (Some(s), _) | (None, Some(s)) => Ok(s),
        (None, None) => Err(CliError::Config(
            "synthetic instances need a seed (seed=N in the spec or --seed N)".into(),
        )),
    }
}
