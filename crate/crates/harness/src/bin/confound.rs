use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use confound_core::data::{write_pair_file, PairFormat};
use confound_core::synth::{generate, GeneratorSpec};
use confound_core::RngSeed;
use confound_harness::experiment::{parse_family, parse_noise, write_sensitivity_csv};
use confound_harness::{run_accuracy, run_real, run_sensitivity, Algorithm, ExperimentPlan, RunConfig};
use serde::Serialize;

/// Detect latent common causes in bivariate data.
#[derive(Parser)]
#[command(name = "confound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one synthetic dataset as a two-column file plus a JSON sidecar.
    Generate {
        /// Family name or short code (d1..d6, c1..c6, r1..r4, sd, sc).
        #[arg(long)]
        spec: String,
        #[arg(long, default_value = "normal")]
        noise: String,
        #[arg(long, default_value_t = 250)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Noise strength for the sensitivity families.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on a pair file.
    Discover {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "modKCDC")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy of one or more algorithms on a synthetic family.
    Experiment {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value = "normal")]
        noise: String,
        /// Comma-separated list.
        #[arg(long, value_delimiter = ',', default_value = "modKCDC,modIGCI")]
        algorithm: Vec<Algorithm>,
        #[arg(long, default_value_t = 100)]
        n_datasets: usize,
        #[arg(long, default_value_t = 250)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lambda: Option<f64>,
        /// Feed the columns in reverse order.
        #[arg(long)]
        swap: bool,
        /// 25 datasets instead of --n-datasets.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy against noise strength on the sensitivity families (CSV).
    Sensitivity {
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1,1.5,2")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "modIGCI")]
        algorithm: Vec<Algorithm>,
        #[arg(long, default_value_t = 100)]
        n_datasets: usize,
        #[arg(long, default_value_t = 250)]
        n_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms on real pair files; prints one JSON array.
    Real {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
        #[arg(long, value_delimiter = ',', default_value = "modKCDC,modIGCI")]
        algorithm: Vec<Algorithm>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct FormatArgs {
    /// Read a headed CSV and take the named columns instead of two whitespace columns.
    #[arg(long, requires_all = ["col_a", "col_b"])]
    csv: bool,
    #[arg(long)]
    col_a: Option<String>,
    #[arg(long)]
    col_b: Option<String>,
}

impl FormatArgs {
    fn format(&self) -> PairFormat {
        match (self.csv, &self.col_a, &self.col_b) {
            (true, Some(a), Some(b)) => PairFormat::CsvWithHeader { col_a: a.clone(), col_b: b.clone() },
            _ => PairFormat::TwoColumnWhitespace,
        }
    }
}

const QUICK_DATASETS: usize = 25;

fn load_config(path: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate { spec, noise, n_samples, seed, lambda, out } => {
            let gs = GeneratorSpec {
                lambda,
                ..GeneratorSpec::new(parse_family(&spec)?, parse_noise(&noise)?, n_samples, RngSeed(seed))
            };
            let d = generate(&gs)?;
            write_pair_file(&out, &d.data)?;
            let meta = serde_json::json!({ "spec": gs, "truth": d.truth, "seed": gs.seed, "rejected_rows": d.rejected });
            fs::write(sidecar_path(&out), serde_json::to_string_pretty(&meta)? + "\n")?;
            eprintln!("wrote {} rows to {} (truth {})", d.data.len(), out.display(), d.truth.tag);
        }
        Command::Discover { input, algorithm, seed, config, out } => {
            let cfg = load_config(&config)?;
            let r = run_real(&input.input, &input.format.format(), algorithm, &cfg, RngSeed(seed))?;
            eprintln!("{}: {} -> {}", r.dataset_id, algorithm, r.verdict);
            write_json(&out, &r)?;
        }
        Command::Experiment {
            spec,
            noise,
            algorithm,
            n_datasets,
            n_samples,
            seed,
            lambda,
            swap,
            quick,
            threads,
            config,
            out,
        } => {
            let cfg = load_config(&config)?;
            let n = if quick { QUICK_DATASETS } else { n_datasets };
            let mut plan = ExperimentPlan::new(parse_family(&spec)?, parse_noise(&noise)?, n, n_samples, RngSeed(seed))
                .with_algorithms(&algorithm);
            plan.lambda = lambda;
            plan.swap_columns = swap;
            plan.threads = threads;
            let report = run_accuracy(&plan, &cfg)?;
            for s in &report.summaries {
                let acc = s.accuracy.map(|a| format!("{a:.3}")).unwrap_or_else(|| "n/a".into());
                eprintln!(
                    "{:?}/{} {}: accuracy {} ({}/{}), undecided {}, fit failures {}, errors {}",
                    plan.family,
                    plan.noise.short_name(),
                    s.algorithm,
                    acc,
                    s.correct,
                    s.evaluated,
                    s.undecided,
                    s.fit_failures,
                    s.errors
                );
            }
            write_json(&out, &report)?;
        }
        Command::Sensitivity { lambdas, algorithm, n_datasets, n_samples, seed, quick, config, out } => {
            if lambdas.is_empty() {
                bail!("no lambdas given");
            }
            let cfg = load_config(&config)?;
            let n = if quick { QUICK_DATASETS } else { n_datasets };
            let points = run_sensitivity(&lambdas, &algorithm, n, n_samples, RngSeed(seed), &cfg)?;
            let mut w = output(&out)?;
            write_sensitivity_csv(&points, &mut w)?;
            w.flush()?;
        }
        Command::Real { input, format, algorithm, seed, config, out } => {
            let cfg = load_config(&config)?;
            let fmt = format.format();
            let mut results = Vec::new();
            for path in &input {
                for &a in &algorithm {
                    let r = run_real(path, &fmt, a, &cfg, RngSeed(seed))?;
                    eprintln!("{}: {} -> {} {}", r.dataset_id, a, r.verdict, r.detail.as_deref().unwrap_or(""));
                    results.push(r);
                }
            }
            write_json(&out, &results)?;
        }
    }
    Ok(())
}
