use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use gml::campaign::{run_campaign, Campaign, CampaignConfig};
use gml::query::{self, parse_matrix, parse_point, parse_vector, parse_vectors};
use gml::torus::WeightedModel;
use gml::{Error, Result, Tolerances};

#[derive(Parser)]
#[command(name = "gml", version, about = "Gradient-flow limits of weighted torus actions on real projective space")]
struct Cli {
    /// Tolerance override `key=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a model file.
    Describe { model: PathBuf },
    /// Run a seeded verification campaign and write a JSON report.
    Run {
        /// theorem1, theorem2, lemma-linearization, convexity or numerics.
        #[arg(long)]
        campaign: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// With `theorem2`, evaluate at eps equal to the threshold.
        #[arg(long)]
        probe_tightness: bool,
    },
    /// exp(t beta) x.
    Flow {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// lim exp(t beta) x as t -> +inf.
    Limit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Successive flow limits along an ordered basis (default: the stored basis).
    Composed {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Flow limit along alpha_1 + sum eps_k alpha_k, compared with the composed limit.
    Perturbed {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alphas: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Kernel threshold of a commuting pair.
    Delta {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        /// Absolute zero test for eigenvalues.
        #[arg(long = "kernel-tol")]
        kernel_tol: Option<f64>,
    },
    /// Infinitesimal stabilizer of a point.
    Stabilizer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Components of X^beta, or of X^A without --beta.
    Components {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
    },
}

fn overrides(raw: &[String]) -> Result<BTreeMap<String, f64>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Argument(format!("expected KEY=VALUE, got {kv:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Argument(format!("bad tolerance value in {kv:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn tolerances(raw: &[String]) -> Result<Tolerances> {
    let mut tol = Tolerances::from_env()?;
    for (k, v) in overrides(raw)? {
        tol.set(&k, v)?;
    }
    Ok(tol)
}

fn load(path: &PathBuf, tol: Tolerances) -> Result<WeightedModel> {
    let mut model = WeightedModel::load(path)?;
    model.set_tolerances(tol);
    Ok(model)
}

fn basis(model: &WeightedModel, alphas: &Option<String>) -> Result<Vec<Vec<f64>>> {
    alphas.as_deref().map_or_else(|| Ok(model.subalgebra().to_vec()), parse_vectors)
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn run(cli: Cli) -> Result<bool> {
    let tol = tolerances(&cli.tol)?;
    match cli.command {
        Command::Describe { model } => print(&query::describe_model(&load(&model, tol)?)),
        Command::Run { campaign, model, trials, seed, out, probe_tightness } => {
            let mut config = CampaignConfig::new(model, campaign.parse::<Campaign>()?, trials, seed);
            config.tolerances = overrides(&cli.tol)?;
            config.output_path = out.clone();
            config.probe_tightness = probe_tightness;
            let report = run_campaign(&config)?;
            if out.is_none() {
                println!("{}", report.to_json());
            }
            eprintln!(
                "{} on {}: {}/{} passed in {:.2}s",
                report.campaign,
                report.model,
                report.passes,
                report.trials,
                report.wall_time
            );
            return Ok(report.success());
        }
        Command::Flow { model, beta, t, point } => {
            let m = load(&model, tol)?;
            print(&query::flow_query(&m, &parse_vector(&beta)?, t, &parse_point(&m, &point)?)?);
        }
        Command::Limit { model, beta, point } => {
            let m = load(&model, tol)?;
            print(&query::limit_query(&m, &parse_vector(&beta)?, &parse_point(&m, &point)?)?);
        }
        Command::Composed { model, alphas, point } => {
            let m = load(&model, tol)?;
            print(&query::composed_query(&m, &basis(&m, &alphas)?, &parse_point(&m, &point)?)?);
        }
        Command::Perturbed { model, alphas, eps, point } => {
            let m = load(&model, tol)?;
            let x = parse_point(&m, &point)?;
            print(&query::perturbed_query(&m, &basis(&m, &alphas)?, &parse_vector(&eps)?, &x)?);
        }
        Command::Delta { alpha, beta, kernel_tol } => {
            print(&query::delta_query(&parse_matrix(&alpha)?, &parse_matrix(&beta)?, kernel_tol)?);
        }
        Command::Stabilizer { model, point } => {
            let m = load(&model, tol)?;
            print(&query::stabilizer_query(&m, &parse_point(&m, &point)?)?);
        }
        Command::Components { model, beta } => {
            let m = load(&model, tol)?;
            let beta = beta.as_deref().map(parse_vector).transpose()?;
            print(&query::components_query(&m, beta.as_deref())?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Argument(_) | Error::UnknownCampaign(_)) {
                eprintln!("run `gml --help` for usage");
            }
            ExitCode::from(2)
        }
    }
}
