use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wmog_cli::check::{check, CheckOptions};
use wmog_cli::transfer::{axioms_from_report, TransferReport};
use wmog_cli::{
    default_registers, desk_config, exit, exit_for_model_error, parse_register, text, ModelKind, ModelSpec, Mutation,
};
use wmog_core::axioms::{check_all, AxiomId};
use wmog_core::litmus::{run_litmus, LitmusError, DEFAULT_CONFIG_CAP};
use wmog_core::model::{ModelInstance, DEFAULT_STATE_CAP};
use wmog_core::parser::{parse_bytes, Mode};
use wmog_core::syntax::{Config, ProofOutline, Register, Value};

#[derive(Parser)]
#[command(name = "wmog", version, about = "Owicki-Gries proof outlines under generic weak memory models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discharge every obligation of an outline with the proof rules.
    Check {
        path: PathBuf,
        /// Only use rules and facts whose axioms are in this list.
        #[arg(long, value_delimiter = ',')]
        allow_axioms: Option<Vec<AxiomId>>,
        /// Re-check failed obligations on the selected model.
        #[arg(long)]
        semantic_fallback: bool,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check every obligation semantically on a model.
    Oracle {
        path: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check all axioms on a model, for an outline's config or one given by flags.
    Axioms {
        path: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        threads: u32,
        #[arg(long, value_delimiter = ',', default_value = "x,y")]
        globals: Vec<String>,
        /// Registers as name@thread; defaults drop owners beyond --threads.
        #[arg(long, value_delimiter = ',', value_parser = parse_register)]
        registers: Option<Vec<Register>>,
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decide whether a proof carries over to a model.
    Transfer {
        /// Outline to check, unless --report is given.
        path: Option<PathBuf>,
        /// A saved JSON check report.
        #[arg(long, conflicts_with = "path")]
        report: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Enumerate the final register outcomes of a program.
    Litmus {
        path: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "sc")]
    model: ModelArg,
    #[arg(long, default_value_t = 2)]
    buffer_bound: usize,
    /// Replace the value domain.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<Value>>,
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
}

#[derive(Args)]
struct OutArgs {
    /// Also write the report as JSON (`-` for stdout only).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Sc,
    Tso,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    TrivialVmax,
    DefaultInterf,
}

impl ModelArgs {
    fn spec(&self, mutation: Option<Mutation>) -> ModelSpec {
        let kind = match self.model {
            ModelArg::Sc => ModelKind::Sc,
            ModelArg::Tso => ModelKind::Tso,
        };
        ModelSpec { kind, buffer_bound: self.buffer_bound, state_cap: self.state_cap, mutation }
    }

    fn apply_values(&self, config: Config) -> Result<Config, i32> {
        match &self.values {
            None => Ok(config),
            Some(vs) => wmog_cli::with_values(&config, vs.clone()).map_err(|e| fail(exit::INPUT, &e)),
        }
    }
}

fn fail(code: i32, msg: &dyn std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn load(path: &Path, mode: Mode) -> Result<ProofOutline, i32> {
    let bytes = std::fs::read(path).map_err(|e| fail(exit::INPUT, &format!("{}: {e}", path.display())))?;
    parse_bytes(&bytes, &path.display().to_string(), mode)
        .map_err(|e| fail(exit::INPUT, &format!("{}: {}: {}", e.span, e.kind, e.message)))
}

fn load_with_values(path: &Path, mode: Mode, m: &ModelArgs) -> Result<ProofOutline, i32> {
    let mut o = load(path, mode)?;
    o.config = m.apply_values(o.config)?;
    Ok(o)
}

fn build(spec: &ModelSpec, config: &Config) -> Result<ModelInstance, i32> {
    spec.build(config).map_err(|e| fail(exit_for_model_error(&e), &e))
}

/// Prints the text form, writes JSON if requested, and returns `code`.
fn emit<T: Serialize>(out: &OutArgs, report: &T, text: String, started: Instant, code: i32) -> Result<i32, i32> {
    let json = serde_json::to_string_pretty(report).expect("reports serialize");
    match out.json.as_deref() {
        Some(p) if p == Path::new("-") => println!("{json}"),
        other => {
            print!("{text}");
            println!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
            if let Some(p) = other {
                std::fs::write(p, json + "\n").map_err(|e| fail(exit::INPUT, &format!("{}: {e}", p.display())))?;
            }
        }
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<i32, i32> {
    let started = Instant::now();
    match cli.command {
        Cmd::Check { path, allow_axioms, semantic_fallback, model, out } => {
            let o = load_with_values(&path, Mode::Strict, &model)?;
            let opts = CheckOptions { allowed: allow_axioms.map(|v| v.into_iter().collect()) };
            let mut report = check(&o, &opts);
            if semantic_fallback && !report.all_discharged() {
                let m = build(&model.spec(None), &o.config)?;
                report.apply_semantic_fallback(&o, &m);
            }
            let code = report.exit_code();
            emit(&out, &report, text::check(&report), started, code)
        }
        Cmd::Oracle { path, model, out } => {
            let o = load_with_values(&path, Mode::Strict, &model)?;
            let m = build(&model.spec(None), &o.config)?;
            let report = wmog_cli::oracle::oracle(&o, &m);
            emit(&out, &report, text::oracle(&report), started, report.exit_code())
        }
        Cmd::Axioms { path, threads, globals, registers, mutate, model, out } => {
            let config = match path {
                Some(p) => load(&p, Mode::Lenient)?.config,
                None => {
                    let registers = registers.unwrap_or_else(|| default_registers(threads));
                    wmog_cli::config_from_flags(threads, &globals, &registers, vec![0, 1])
                        .map_err(|e| fail(exit::INPUT, &e))?
                }
            };
            let config = model.apply_values(config)?;
            let mutation = mutate.map(|m| match m {
                MutationArg::TrivialVmax => Mutation::TrivialVmax,
                MutationArg::DefaultInterf => Mutation::DefaultInterf,
            });
            let m = build(&model.spec(mutation), &config)?;
            let report = check_all(&m);
            let code = if report.all_hold() { exit::OK } else { exit::FAILED };
            emit(&out, &report, text::axioms(&report), started, code)
        }
        Cmd::Transfer { path, report, model, out } => {
            let (proof_axioms, complete, config) = match (path, report) {
                (_, Some(r)) => {
                    let json =
                        std::fs::read_to_string(&r).map_err(|e| fail(exit::INPUT, &format!("{}: {e}", r.display())))?;
                    let (axioms, complete) = axioms_from_report(&json).map_err(|e| fail(exit::INPUT, &e))?;
                    (axioms, complete, None)
                }
                (Some(p), None) => {
                    let o = load_with_values(&p, Mode::Strict, &model)?;
                    let r = check(&o, &CheckOptions::default());
                    (r.axiom_union.clone(), r.all_discharged(), Some(o.config))
                }
                (None, None) => return Err(fail(exit::INPUT, &"give an outline or --report")),
            };
            // A saved report carries no config; the default desk-scale one is used.
            let config = match config {
                Some(c) => c,
                None => model.apply_values(desk_config())?,
            };
            let m = build(&model.spec(None), &config)?;
            let satisfied = check_all(&m).satisfied();
            let report = TransferReport::new(m.name.clone(), proof_axioms, satisfied, complete);
            emit(&out, &report, text::transfer(&report), started, report.exit_code())
        }
        Cmd::Litmus { path, model, out } => {
            let o = load_with_values(&path, Mode::Lenient, &model)?;
            let m = model.spec(None).lazy(&o.config).map_err(|e| fail(exit_for_model_error(&e), &e))?;
            let report = run_litmus(&o, m.as_ref(), DEFAULT_CONFIG_CAP).map_err(|e| match e {
                LitmusError::BoundExceeded(_) => fail(exit::STATE_CAP, &e),
                LitmusError::Evaluation { .. } => fail(exit::INPUT, &e),
            })?;
            let code = if report.post_violations().next().is_some() { exit::FAILED } else { exit::OK };
            emit(&out, &report, text::litmus(&report), started, code)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(c) | Err(c) => c,
    };
    ExitCode::from(code as u8)
}
