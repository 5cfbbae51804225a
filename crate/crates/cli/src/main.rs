use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use multlab_core::arith::{PrimeSet, Sieve};
use multlab_core::correlations::{log_correlation, natural_correlations, CheckpointSpec, Forms};
use multlab_core::density::{rough_ap_density, structured_set_density, thin_set_sums};
use multlab_core::explab::{self, ChudakovConfig, ExperimentConfig};
use multlab_core::fixtures::{FunctionSpec, SetupSpec};
use multlab_core::pretentious::{pretender_scan, StepSpec};
use multlab_core::{correlations::parse_count, Error};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "multlab", version, about = "Experiments on multiplicative functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank characters χ (mod q ≤ Q) and twists n^{it} by distance to f.
    Pretend {
        /// Function: fixture name, inline JSON or a JSON file.
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long = "Q", default_value_t = 10)]
        q: u64,
        #[arg(long = "T", default_value_t = 0.0)]
        t: f64,
        /// "auto" (1/log x) or a positive number.
        #[arg(long, default_value = "auto")]
        step: String,
        /// Ranked table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation sums of f(a₁n+b₁) and g(a₂n+b₂).
    Correlate {
        #[arg(long)]
        f: String,
        /// Second function for the logarithmic sum; defaults to f.
        #[arg(long)]
        g: Option<String>,
        /// a1,b1,a2,b2
        #[arg(long, default_value = "1,0,1,1")]
        forms: String,
        /// Logarithmic weights (otherwise natural f(n)·conj f(n+d)).
        #[arg(long)]
        log: bool,
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long, default_value = "geometric:6")]
        checkpoints: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial sums and the closed-form correlation check for a perturbed character.
    Chudakov {
        /// Setup: fixture name, inline JSON or a JSON file.
        #[arg(long)]
        setup: String,
        #[arg(long, default_value_t = 12)]
        dmax: u64,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        x: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Logarithmic densities of rough and structured sets.
    Density {
        #[arg(long, value_enum)]
        mode: DensityMode,
        /// Mode parameters: inline JSON or a JSON file.
        #[arg(long)]
        params: String,
        #[arg(long, value_parser = parse_count)]
        x: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment from a JSON config.
    Run {
        #[arg(value_enum)]
        experiment: ExperimentId,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the series as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityMode {
    RoughAp,
    Structured,
    Thin,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentId {
    Gap,
    Ks,
    Arith,
    Chudakov,
    Cohn,
}

impl ExperimentId {
    fn name(self) -> &'static str {
        match self {
            ExperimentId::Gap => "gap",
            ExperimentId::Ks => "ks",
            ExperimentId::Arith => "arith",
            ExperimentId::Chudakov => "chudakov",
            ExperimentId::Cohn => "cohn",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoughApParams {
    q: u64,
    a: u64,
    t: u32,
    n_max: u64,
    #[serde(default)]
    checkpoints: CheckpointSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructuredParams {
    g: FunctionSpec,
    /// Order data; taken from the fixture when omitted.
    #[serde(default)]
    m: Option<u32>,
    #[serde(default)]
    k: Option<u32>,
    q: u64,
    t: u32,
    n_max: u64,
    #[serde(default)]
    checkpoints: CheckpointSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThinParams {
    set: PrimeSet,
    #[serde(default)]
    checkpoints: CheckpointSpec,
}

/// Reads inline JSON, a JSON file, or (when `bare` is given) a bare fixture name.
fn read_json<T: DeserializeOwned>(arg: &str, bare: Option<fn(&str) -> T>) -> anyhow::Result<T> {
    let t = arg.trim();
    if t.starts_with('{') || t.starts_with('"') {
        return Ok(serde_json::from_str(t).map_err(Error::from)?);
    }
    let path = Path::new(t);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(serde_json::from_str(&text).map_err(Error::from)?);
    }
    match bare {
        Some(make) => Ok(make(t)),
        None => Err(Error::Config(format!("{t:?} is neither JSON nor a readable file")).into()),
    }
}

fn function_arg(arg: &str) -> anyhow::Result<FunctionSpec> {
    read_json(arg, Some(|name: &str| FunctionSpec::Fixture { name: name.to_string() }))
}

fn parse_forms(s: &str) -> anyhow::Result<Forms> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Config(format!("cannot parse forms {s:?}")))?;
    let [a1, b1, a2, b2] = parts[..] else {
        bail!(Error::Config("forms need four integers a1,b1,a2,b2".into()));
    };
    if a1 <= 0 || a2 <= 0 {
        bail!(Error::Config("leading coefficients must be positive".into()));
    }
    Ok(Forms::new(a1 as u64, b1, a2 as u64, b2))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn sieve(limit: u64) -> anyhow::Result<Sieve> {
    log::info!("sieving to {limit}");
    Ok(Sieve::new(limit.max(2))?)
}

fn run_report(cfg: &ExperimentConfig, out: Option<&Path>, csv: Option<&Path>) -> anyhow::Result<u8> {
    let report = explab::run(cfg, None)?;
    emit(out, &report.to_json()?)?;
    if let Some(c) = csv {
        fs::write(c, report.to_csv()).with_context(|| format!("writing {}", c.display()))?;
    }
    for c in &report.checks {
        eprintln!("{:?}: {} ({})", c.verdict, c.name, c.detail);
    }
    Ok(report.exit_code() as u8)
}

fn density_limit(q: u64, t: u32, x: u64) -> anyhow::Result<u64> {
    (2 * q)
        .checked_pow(t)
        .and_then(|d| d.checked_mul(x))
        .and_then(|v| v.checked_add(2))
        .ok_or_else(|| Error::Config("(2q)^T x overflows".into()).into())
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Pretend { f, x, q, t, step, out } => {
            let f = function_arg(&f)?.build()?;
            let step = if step == "auto" {
                StepSpec::Auto
            } else {
                StepSpec::Fixed(step.parse().map_err(|_| Error::Config(format!("bad step {step:?}")))?)
            };
            let s = sieve(x)?;
            let scan = pretender_scan(&f, x, q, t, step, &s)?;
            if let Some(p) = &out {
                fs::write(p, scan.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            print!("{}", to_json(&scan.best)?);
            Ok(0)
        }
        Command::Correlate {
            f,
            g,
            forms,
            log,
            x,
            checkpoints,
            out,
        } => {
            let forms = parse_forms(&forms)?;
            let cps = CheckpointSpec::parse(&checkpoints)?.resolve(x)?;
            let f = function_arg(&f)?.build()?;
            let report = if log {
                let g = match g {
                    Some(g) => function_arg(&g)?.build()?,
                    None => f.clone(),
                };
                let top = (forms.a1.max(forms.a2) as i128 * x as i128 + forms.b1.max(forms.b2).max(0) as i128) as u64;
                let s = sieve(top + 1)?;
                log_correlation(&f, &g, forms, &cps, &s)?
            } else {
                if g.is_some() || forms.a1 != 1 || forms.a2 != 1 || forms.b1 != 0 || forms.b2 < 0 {
                    bail!(Error::Config(
                        "natural correlations take one function and forms 1,0,1,d; use --log for general forms".into()
                    ));
                }
                let s = sieve(x + forms.b2 as u64 + 1)?;
                natural_correlations(&f, &[forms.b2 as u64], &cps, &s)?.remove(0)
            };
            emit(out.as_deref(), &to_json(&report)?)?;
            Ok(0)
        }
        Command::Chudakov { setup, dmax, x, out } => {
            let setup: SetupSpec = read_json(&setup, Some(|name: &str| SetupSpec::Fixture { name: name.to_string() }))?;
            let cfg: ChudakovConfig = serde_json::from_value(serde_json::json!({
                "setup": setup,
                "x": x,
                "dmax": dmax,
            }))?;
            run_report(&ExperimentConfig::Chudakov(cfg), out.as_deref(), None)
        }
        Command::Density { mode, params, x, out } => {
            let text = match mode {
                DensityMode::RoughAp => {
                    let p: RoughApParams = read_json(&params, None)?;
                    let s = sieve(density_limit(p.q, p.t, x)?)?;
                    let cps = p.checkpoints.resolve(x)?;
                    to_json(&rough_ap_density(p.q, p.a, p.t, p.n_max, x, &cps, &s)?)?
                }
                DensityMode::Structured => {
                    let p: StructuredParams = read_json(&params, None)?;
                    let (m, k) = match (p.m, p.k, p.g.order_data()) {
                        (Some(m), Some(k), _) => (m, k),
                        (None, None, Some(mk)) => mk,
                        _ => bail!(Error::Config("give m and k, or a fixture with known order data".into())),
                    };
                    let g = p.g.build()?;
                    let s = sieve(density_limit(p.q, p.t, x)?)?;
                    let cps = p.checkpoints.resolve(x)?;
                    to_json(&structured_set_density(&g, m, k, p.q, p.t, p.n_max, x, &cps, &s)?)?
                }
                DensityMode::Thin => {
                    let p: ThinParams = read_json(&params, None)?;
                    let cps = p.checkpoints.resolve(x)?;
                    let s = match p.set {
                        PrimeSet::Listed(_) => None,
                        _ => Some(sieve(x)?),
                    };
                    to_json(&thin_set_sums(&p.set, x, &cps, s.as_ref())?)?
                }
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Run {
            experiment,
            config,
            out,
            csv,
        } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
            let obj = value
                .as_object_mut()
                .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
            match obj.get("experiment").and_then(|v| v.as_str()) {
                Some(name) if name != experiment.name() => bail!(Error::Config(format!(
                    "config is for experiment {name:?}, not {:?}",
                    experiment.name()
                ))),
                _ => {
                    obj.insert("experiment".into(), experiment.name().into());
                }
            }
            let cfg: ExperimentConfig = serde_json::from_value(value).map_err(Error::from)?;
            run_report(&cfg, out.as_deref(), csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            // runs that fail to complete exit 2; inconsistent verdicts exit 1 above
            ExitCode::from(2)
        }
    }
}
