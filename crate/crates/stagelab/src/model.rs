//! Turning command-line model flags into a network.

use std::collections::BTreeMap;
use std::fmt;

use anyhow::anyhow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stagelab_core::dsl::{self, DslError, NetworkDoc};
use stagelab_core::experiments::{ExperimentError, PresetKind, TransferSource, WalbornMode};
use stagelab_core::whichpath::PathDisambiguation;
use stagelab_core::{Network, C64};

use crate::cli::{Experiment, Mode, ModelArgs, Transfer};

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: error.into() }
    }

    pub fn invalid(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub fn parse_assignment(s: &str) -> Outcome<(String, String)> {
    match s.split_once('=') {
        Some((name, expr)) if !name.trim().is_empty() => Ok((name.trim().to_string(), expr.trim().to_string())),
        _ => Err(Failure::usage(anyhow!("expected NAME=EXPR, got `{s}`"))),
    }
}

fn preset_kind(e: Experiment) -> PresetKind {
    match e {
        Experiment::Ds => PresetKind::DoubleSlit,
        Experiment::Dcqe => PresetKind::Dcqe,
        Experiment::Wheeler => PresetKind::Wheeler,
        Experiment::Walborn => PresetKind::Walborn,
    }
}

fn walborn_mode(m: Mode) -> WalbornMode {
    match m {
        Mode::NoPolarizers => WalbornMode::NoPolarizers,
        Mode::CaseI => WalbornMode::CaseI,
        Mode::CaseII => WalbornMode::CaseII,
    }
}

fn dsl_failure(origin: &str, e: DslError) -> Failure {
    let err = anyhow!("{origin}:{e}");
    match e {
        DslError::ConstraintViolated { .. } | DslError::NonFinite { .. } | DslError::Semantic { .. } => Failure::invalid(err),
        _ => Failure::usage(err),
    }
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::UnknownParameter(_) | ExperimentError::UnknownExperiment(_) => Failure::usage(e),
        _ => Failure::invalid(e),
    }
}

enum Origin {
    Preset(PresetKind),
    File { name: String, doc: NetworkDoc },
}

/// A network family: a preset or a parsed file, plus the model flags.
pub struct Family {
    origin: Origin,
    args: ModelArgs,
    /// `--set` values, evaluated once.
    sets: Vec<(String, C64)>,
}

pub struct Model {
    pub net: Network,
    pub reveal: PathDisambiguation,
}

impl Family {
    pub fn new(args: &ModelArgs) -> Outcome<Self> {
        let origin = match (&args.experiment, &args.file) {
            (Some(e), None) => Origin::Preset(preset_kind(*e)),
            (None, Some(path)) => {
                let name = path.display().to_string();
                let bytes = std::fs::read(path).map_err(|e| Failure::usage(anyhow!("{name}: {e}")))?;
                let doc = dsl::parse_bytes(&bytes).map_err(|e| dsl_failure(&name, e))?;
                Origin::File { name, doc }
            }
            _ => return Err(Failure::usage(anyhow!("give exactly one of --experiment or --file"))),
        };
        let mut family = Self { origin, args: args.clone(), sets: Vec::new() };
        for s in &args.set {
            let (name, expr) = parse_assignment(s)?;
            let value = family.eval(&expr, &family.sets.clone())?;
            family.check_param(&name)?;
            family.sets.push((name, value));
        }
        Ok(family)
    }

    fn origin_name(&self) -> String {
        match &self.origin {
            Origin::Preset(k) => format!("preset {k}"),
            Origin::File { name, .. } => name.clone(),
        }
    }

    /// Current parameter values under `overrides`.
    pub fn env(&self, overrides: &[(String, C64)]) -> Outcome<BTreeMap<String, C64>> {
        match &self.origin {
            Origin::Preset(kind) => {
                let mut env: BTreeMap<String, C64> = kind.default_params(self.args.screen).into_iter().collect();
                for (n, v) in overrides {
                    env.insert(n.clone(), *v);
                }
                Ok(env)
            }
            Origin::File { name, doc } => Ok(dsl::evaluate_params(doc, overrides)
                .map_err(|e| dsl_failure(name, e))?
                .into_iter()
                .collect()),
        }
    }

    pub fn check_param(&self, name: &str) -> Outcome<()> {
        if self.env(&[])?.contains_key(name) {
            Ok(())
        } else {
            Err(Failure::usage(anyhow!("{}: unknown parameter `{name}`", self.origin_name())))
        }
    }

    /// Evaluate an expression over the parameters under `overrides`.
    pub fn eval(&self, expr: &str, overrides: &[(String, C64)]) -> Outcome<C64> {
        let env = self.env(overrides)?;
        dsl::evaluate(expr, &env).map_err(|e| Failure::usage(anyhow!("in `{expr}`: {e}")))
    }

    pub fn sets(&self) -> &[(String, C64)] {
        &self.sets
    }

    /// Build with `--set` values followed by `extra`.
    pub fn build(&self, extra: &[(String, C64)]) -> Outcome<Model> {
        let mut overrides = self.sets.clone();
        overrides.extend_from_slice(extra);
        let (net, default_reveal) = match &self.origin {
            Origin::Preset(kind) => {
                let params = self.env(&overrides)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.args.seed);
                let transfer = match self.args.transfer {
                    Transfer::Twoslit => TransferSource::TwoSlit,
                    Transfer::Random => TransferSource::Random(&mut rng),
                };
                kind.build(&params, walborn_mode(self.args.mode), transfer).map_err(experiment_failure)?
            }
            Origin::File { name, doc } => {
                let net = dsl::elaborate(doc, &overrides).map_err(|e| dsl_failure(name, e))?;
                (net, PathDisambiguation::none())
            }
        };
        let reveal = if self.args.reveal.is_empty() {
            default_reveal
        } else {
            PathDisambiguation::from_patterns(
                self.args.reveal.iter().map(|p| p.split('&').map(|s| s.trim().to_string()).collect()).collect(),
            )
        };
        Ok(Model { net, reveal })
    }
}

/// Tolerance from `STAGELAB_TOL`, default 1e-10.
pub fn tolerance() -> Outcome<f64> {
    match std::env::var("STAGELAB_TOL") {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(Failure::usage(anyhow!("STAGELAB_TOL must be a positive number, got `{s}`"))),
        },
        Err(_) => Ok(stagelab_core::DEFAULT_TOL),
    }
}
