//! Command-line front end: instance generation, strategy runs, ratio tables,
//! bound curves and the repacking-lemma fuzzer.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vecpack::engine::trace_to_jsonl;
use vecpack::exact::DEFAULT_NODE_BUDGET;
use vecpack::generators::{
    anyfit_lower_bound_instance, even_k_tightness, odd_k_adversary, random_cone_instance,
    GeneratedInstance,
};
use vecpack::harness::{
    bench_batch, bench_csv, bench_row, curve_csv, curve_json, curve_rows, default_curve_grid,
    lemma_batch, random_bench_instances, BenchInstance, ExecMode, StrategySpec,
};
use vecpack::io::{
    instance_from_json, instance_to_json, witness_from_json, witness_to_json, Instance,
};
use vecpack::model::validate_packing;
use vecpack::rational::{format_rational, int, parse_rational};
use vecpack::scaled::{solve_scaled_opt, BoxCounts, ScaledMode};
use vecpack::{Error, Rational, Result};

pub const NODE_BUDGET_VAR: &str = "VECPACK_NODE_BUDGET";

#[derive(Parser, Debug)]
#[command(
    name = "vecpack",
    version,
    about = "Online 2D vector packing with advice"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Anyfit,
    EvenK,
    OddK,
    Random,
}

#[derive(clap::Args, Debug, Clone)]
pub struct StrategyArgs {
    /// firstfit, a, aprime, combined or ak; comma-separated for bench.
    #[arg(long, default_value = "firstfit")]
    pub variant: String,
    /// Cone slope t = tan(π/4 − γ/2), as a fraction or exact decimal.
    #[arg(long)]
    pub cone_t: Option<String>,
    /// Strip precision of the restricted strategies.
    #[arg(long, default_value = "1/8")]
    pub epsilon: String,
    /// Grid resolution of A_k.
    #[arg(long, default_value_t = 100)]
    pub k: u32,
    /// Accept only k >= 640 for A_k. Slow.
    #[arg(long, conflicts_with = "diagnostic")]
    pub theory: bool,
    /// Accept any k for A_k, including odd k.
    #[arg(long)]
    pub diagnostic: bool,
}

impl StrategyArgs {
    fn mode(&self) -> ScaledMode {
        if self.theory {
            ScaledMode::Theory
        } else if self.diagnostic {
            ScaledMode::Diagnostic
        } else {
            ScaledMode::Desk
        }
    }

    fn specs(&self, fallback_t: Option<Rational>) -> Result<Vec<StrategySpec>> {
        let t = match &self.cone_t {
            Some(s) => Some(parse_rational(s)?),
            None => fallback_t,
        };
        let eps = parse_rational(&self.epsilon)?;
        self.variant
            .split(',')
            .map(|name| StrategySpec::from_name(name.trim(), t, eps, self.k, self.mode()))
            .collect()
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated instance (and its witness packing) as JSON.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Prefix length for anyfit, vector count for random.
        #[arg(long, default_value_t = 60)]
        n: usize,
        /// Witness size for even-k and odd-k.
        #[arg(long, default_value_t = 20)]
        s: usize,
        #[arg(long, default_value_t = 100)]
        k: u32,
        #[arg(long, default_value = "1/1000")]
        epsilon: String,
        #[arg(long, default_value = "1/1000")]
        delta: String,
        #[arg(long)]
        cone_t: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "0")]
        l1_min: String,
        #[arg(long, default_value = "2")]
        l1_max: String,
        /// Instance file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run one strategy on an instance file.
    Run {
        instance: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Witness packing used as the OPT reference if the exact search runs out.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Write the placement trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Ratio table over random cone instances or instance files.
    Bench {
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Instance files; random instances are drawn when none are given.
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Largest random instance size.
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core, 1 runs sequentially.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Add a wall-clock column. Output is then no longer byte-stable.
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Competitive-ratio bounds as functions of the cone slope.
    Curve {
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Comma-separated slopes; defaults to i/steps plus 1/3 and 7/15.
        #[arg(long)]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 20)]
        steps: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Repack random feasible long-vector bins into two bins and a half bin.
    VerifyLemma {
        #[arg(long, default_value_t = 100)]
        k: u32,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        max_items: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// Failure of a command, with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.error.kind(), "message": self.error.to_string()}}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        let code = match error {
            Error::Parse(_) => 2,
            Error::Io(_) => 3,
            _ => 1,
        };
        CliError { code, error }
    }
}

/// Exact-search budget from `VECPACK_NODE_BUDGET`, defaulting to 10^7.
pub fn node_budget() -> Result<u64> {
    match std::env::var(NODE_BUDGET_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "{NODE_BUDGET_VAR}={s} is not a non-negative integer"
            ))
        }),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce(ExecMode) -> T + Send) -> Result<T> {
    if jobs == 1 {
        return Ok(f(ExecMode::Sequential));
    }
    #[cfg(feature = "parallel")]
    {
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidParams(e.to_string()))?;
            return Ok(pool.install(|| f(ExecMode::Parallel)));
        }
    }
    Ok(f(ExecMode::default_for_build()))
}

/// Runs a parsed command and returns what goes to stdout.
pub fn execute(cli: Cli) -> std::result::Result<String, CliError> {
    let budget = node_budget()?;
    match cli.command {
        Command::Gen {
            kind,
            n,
            s,
            k,
            epsilon,
            delta,
            cone_t,
            seed,
            l1_min,
            l1_max,
            out,
            witness,
        } => {
            let eps = parse_rational(&epsilon)?;
            let t = cone_t.as_deref().map(parse_rational).transpose()?;
            let inst: GeneratedInstance = match kind {
                GenKind::Anyfit => anyfit_lower_bound_instance(n, eps, parse_rational(&delta)?)?,
                GenKind::EvenK => even_k_tightness(s, k, eps)?,
                GenKind::OddK => odd_k_adversary(s, k, eps)?,
                GenKind::Random => {
                    let t = t.ok_or_else(|| {
                        Error::InvalidParams("random instances need --cone-t".into())
                    })?;
                    random_cone_instance(
                        n,
                        t,
                        seed,
                        (parse_rational(&l1_min)?, parse_rational(&l1_max)?),
                    )?
                }
            };
            let text = instance_to_json(&Instance {
                vectors: inst.sigma.clone(),
                cone_t: t,
            })?;
            if let (Some(path), Some(w)) = (&witness, &inst.witness) {
                write(path, &witness_to_json(w)?)?;
            }
            let summary = json!({
                "vectors": inst.sigma.len(),
                "witness_bins": inst.witness.as_ref().map(|w| w.len()),
                "expected": inst.expected,
                "notes": inst.notes,
            });
            match out {
                Some(path) => {
                    write(&path, &text)?;
                    Ok(format!("{summary}\n"))
                }
                None => Ok(format!("{text}\n")),
            }
        }
        Command::Run {
            instance,
            strategy,
            witness,
            trace,
            format,
        } => {
            let inst = instance_from_json(&read(&instance)?)?;
            let witness = witness
                .map(|p| read(&p).and_then(|t| witness_from_json(&t)))
                .transpose()?;
            if let Some(w) = &witness {
                validate_packing(w, &inst.vectors).map_err(|v| {
                    Error::Parse(format!("witness does not pack the instance: {v:?}"))
                })?;
            }
            let specs = strategy.specs(inst.cone_t)?;
            let [spec] = specs.as_slice() else {
                return Err(Error::InvalidParams("run takes exactly one --variant".into()).into());
            };
            let bench = BenchInstance {
                id: instance.display().to_string(),
                sigma: inst.vectors.clone(),
                witness,
            };
            let report = vecpack::harness::run_spec(spec, &bench.sigma)?;
            if let Some(path) = trace {
                write(&path, &trace_to_jsonl(&report.packing.trace)?)?;
            }
            let row = bench_row(&bench, spec, budget, false)?;
            match format {
                Format::Csv => Ok(bench_csv(&[row])),
                Format::Json => {
                    let mut out = json!({
                        "strategy": report.strategy,
                        "bins_used": report.bins_used,
                        "advice_bits_read": report.advice_bits_read,
                        "kind_counts": report.kind_counts,
                        "row": row,
                    });
                    if let StrategySpec::Scaled { k, .. } = spec {
                        out["scaled_bin_types"] = scaled_types_json(&bench.sigma, *k)?;
                    }
                    Ok(format!(
                        "{}\n",
                        serde_json::to_string_pretty(&out).map_err(Error::from)?
                    ))
                }
            }
        }
        Command::Bench {
            strategy,
            instances,
            count,
            n,
            seed,
            jobs,
            timing,
            format,
        } => {
            let (insts, slope) = if instances.is_empty() {
                let t = strategy
                    .cone_t
                    .as_deref()
                    .map(parse_rational)
                    .transpose()?
                    .ok_or_else(|| {
                        Error::InvalidParams("bench needs --cone-t or instance files".into())
                    })?;
                (
                    random_bench_instances(t, count, n, seed, (int(0), int(2)))?,
                    Some(t),
                )
            } else {
                let mut out = Vec::new();
                let mut slope = None;
                for path in &instances {
                    let inst = instance_from_json(&read(path)?)?;
                    slope = slope.or(inst.cone_t);
                    out.push(BenchInstance {
                        id: path.display().to_string(),
                        sigma: inst.vectors,
                        witness: None,
                    });
                }
                (out, slope)
            };
            let specs = strategy.specs(slope)?;
            let rows = with_jobs(jobs, |mode| {
                bench_batch(&insts, &specs, budget, mode, timing)
            })??;
            match format {
                Format::Csv => Ok(bench_csv(&rows)),
                Format::Json => Ok(format!(
                    "{}\n",
                    serde_json::to_string_pretty(&rows).map_err(Error::from)?
                )),
            }
        }
        Command::Curve {
            epsilon,
            t_grid,
            steps,
            format,
        } => {
            let eps = parse_rational(&epsilon)?;
            let ts = match t_grid {
                Some(list) => list
                    .split(',')
                    .map(|s| parse_rational(s.trim()))
                    .collect::<Result<Vec<_>>>()?,
                None => default_curve_grid(steps),
            };
            if let Some(bad) = ts.iter().find(|t| **t <= int(0) || **t > int(1)) {
                return Err(Error::InvalidParams(format!(
                    "slope {} outside (0, 1]",
                    format_rational(bad)
                ))
                .into());
            }
            let rows = curve_rows(&ts, eps);
            match format {
                Format::Csv => Ok(curve_csv(&rows)),
                Format::Json => Ok(format!("{}\n", curve_json(&rows)?)),
            }
        }
        Command::VerifyLemma {
            k,
            count,
            max_items,
            seed,
            jobs,
            format,
        } => {
            let summary = with_jobs(jobs, |mode| lemma_batch(k, count, max_items, seed, mode))??;
            let text = match format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&summary).map_err(Error::from)?
                ),
                Format::Csv => format!(
                    "k,bins,succeeded,max_items\n{},{},{},{}\n",
                    summary.k, summary.bins, summary.succeeded, summary.max_items
                ),
            };
            if summary.failures.is_empty() {
                Ok(text)
            } else {
                Err(Error::Precondition(format!(
                    "{} of {} bins could not be repacked: {text}",
                    summary.failures.len(),
                    summary.bins
                ))
                .into())
            }
        }
    }
}

fn scaled_types_json(sigma: &[vecpack::Vec2], k: u32) -> Result<Value> {
    let sol = solve_scaled_opt(&BoxCounts::of_long_vectors(sigma, k), k)?;
    Ok(Value::Array(
        sol.types()
            .into_iter()
            .map(|(t, c)| json!({"type": t.to_string(), "count": c}))
            .collect(),
    ))
}
