//! Report assembly behind the `wmog` binary.

pub mod check;
pub mod oracle;
pub mod text;
pub mod transfer;

use wmog_core::model::{BuildOptions, InterfMode, ModelError, ModelInstance, ScModel, TsoModel, DEFAULT_STATE_CAP};
use wmog_core::obligations::ObligationSet;
use wmog_core::syntax::{Config, ConfigError, HoareTriple, Register, Tid, Value};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const STATE_CAP: i32 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Sc,
    Tso,
}

/// Deliberately broken model variants, used to exercise the axiom checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Every thread counts as view maximal everywhere.
    TrivialVmax,
    /// Interference is `β ⨟ T ⨟ β` instead of the model's own relation.
    DefaultInterf,
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub buffer_bound: usize,
    pub state_cap: usize,
    pub mutation: Option<Mutation>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { kind: ModelKind::Sc, buffer_bound: 2, state_cap: DEFAULT_STATE_CAP, mutation: None }
    }
}

impl ModelSpec {
    pub fn build(&self, config: &Config) -> Result<ModelInstance, ModelError> {
        let mut opts = BuildOptions { state_cap: self.state_cap, ..Default::default() };
        if self.mutation == Some(Mutation::DefaultInterf) {
            opts.interf = InterfMode::Default;
        }
        match self.kind {
            ModelKind::Sc => ModelInstance::build(&ScModel::new(config.clone()), &opts),
            ModelKind::Tso if self.mutation == Some(Mutation::TrivialVmax) => {
                ModelInstance::build(&TsoModel::with_trivial_vmax(config.clone(), self.buffer_bound)?, &opts)
            }
            ModelKind::Tso => ModelInstance::build(&TsoModel::new(config.clone(), self.buffer_bound)?, &opts),
        }
    }

    /// Lazily explored model for litmus runs.
    pub fn lazy(&self, config: &Config) -> Result<Box<dyn wmog_core::model::MemoryModel>, ModelError> {
        Ok(match self.kind {
            ModelKind::Sc => Box::new(ScModel::new(config.clone())),
            ModelKind::Tso => Box::new(TsoModel::new(config.clone(), self.buffer_bound)?),
        })
    }
}

pub fn exit_for_model_error(e: &ModelError) -> i32 {
    match e {
        ModelError::StateCapExceeded(_) => exit::STATE_CAP,
        ModelError::BadBufferBound => exit::INPUT,
    }
}

/// `config` with its value domain replaced.
pub fn with_values(config: &Config, values: Vec<Value>) -> Result<Config, ConfigError> {
    Config::new(config.threads.clone(), config.globals.clone(), config.registers.clone(), values)
}

/// A config built from command-line flags alone.
pub fn config_from_flags(
    threads: u32,
    globals: &[String],
    registers: &[Register],
    values: Vec<Value>,
) -> Result<Config, ConfigError> {
    Config::new((1..=threads).map(Tid).collect(), globals.to_vec(), registers.to_vec(), values)
}

/// `r1@2 r2@3 r3@3`, minus registers whose owner exceeds `threads`.
pub fn default_registers(threads: u32) -> Vec<Register> {
    [("r1", 2), ("r2", 3), ("r3", 3)]
        .into_iter()
        .filter(|&(_, t)| t <= threads)
        .map(|(name, t)| Register { name: name.into(), owner: Tid(t) })
        .collect()
}

/// Three threads, globals `x y`, the default registers, values `0 1`.
pub fn desk_config() -> Config {
    config_from_flags(3, &["x".into(), "y".into()], &default_registers(3), vec![0, 1]).expect("valid config")
}

/// Parses `name@owner`.
pub fn parse_register(s: &str) -> Result<Register, String> {
    let (name, owner) = s.split_once('@').ok_or_else(|| format!("expected name@thread, got `{s}`"))?;
    let owner = owner.parse().map_err(|_| format!("bad owner thread in `{s}`"))?;
    if name.is_empty() {
        return Err(format!("empty register name in `{s}`"));
    }
    Ok(Register { name: name.into(), owner: Tid(owner) })
}

/// Triples with their report ids: `L` local, `P` plumbing, `G` global.
pub fn numbered_triples(set: &ObligationSet) -> Vec<(String, &HoareTriple)> {
    let groups = [("L", &set.local_triples), ("P", &set.plumbing_triples), ("G", &set.global_triples)];
    groups
        .into_iter()
        .flat_map(|(tag, ts)| ts.iter().enumerate().map(move |(i, h)| (format!("{tag}{}", i + 1), h)))
        .collect()
}
