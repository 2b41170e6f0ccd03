use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairpoi::fairness::{ExposureFamily, FairnessWeights};
use fairpoi::recommenders::ModelKind;
use fairpoi::runner::{self, ExperimentConfig, SingleRun, TestKind};
use fairpoi::Result;

#[derive(Parser, Debug)]
#[command(
    name = "fairpoi",
    version,
    about = "Consumer and provider fairness re-scoring for POI recommendation"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "FAIRPOI_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "FAIRPOI_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "FAIRPOI_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "FAIRPOI_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, env = "FAIRPOI_DELIMITER")]
    delimiter: Option<DelimiterArg>,
    /// Config override `section.key=value`; repeatable, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DelimiterArg {
    Tab,
    Comma,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and filter the configured check-in files.
    Ingest {
        #[arg(long)]
        checkins: Option<PathBuf>,
        #[arg(long)]
        pois: Option<PathBuf>,
        #[arg(long)]
        social: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth,
    /// Split chronologically and assign groups.
    Split,
    /// Train the configured base models.
    Train,
    /// Fit the configured exposure models.
    FitExposure,
    /// Write top-k lists for one fairness setting.
    Recommend(Setting),
    /// Evaluate one fairness setting on the test split.
    Evaluate(Setting),
    /// Run the full sweep and write tables.
    Sweep {
        /// Also select (alpha, beta) on the validation split.
        #[arg(long)]
        tune: bool,
    },
    /// Run a significance test over the columns of a delimited file.
    Stats {
        input: PathBuf,
        #[arg(long, default_value = "kruskal")]
        test: String,
    },
    /// Mark the Pareto front of a points file.
    Pareto {
        input: PathBuf,
        /// Defaults to rewriting the input.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Setting {
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value = "linear")]
    family: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
}

impl Setting {
    fn run(&self) -> Result<SingleRun> {
        let model: ModelKind = self.model.parse()?;
        let family: ExposureFamily = self.family.parse()?;
        let weights = FairnessWeights::new(self.alpha, self.beta, family);
        weights.validate()?;
        Ok(SingleRun {
            model,
            weights,
            k: self.k,
        })
    }
}

fn overrides(cli: &Cli) -> Vec<String> {
    let mut o = Vec::new();
    if let Some(s) = cli.seed {
        o.push(format!("run.seed={s}"));
    }
    if let Some(p) = &cli.out {
        o.push(format!("run.out={}", toml_string(p)));
    }
    if let Some(j) = cli.jobs {
        o.push(format!("run.jobs={j}"));
    }
    if let Some(d) = cli.delimiter {
        let name = match d {
            DelimiterArg::Tab => "tab",
            DelimiterArg::Comma => "comma",
        };
        o.push(format!("data.delimiter=\"{name}\""));
    }
    if let Command::Ingest {
        checkins,
        pois,
        social,
    } = &cli.command
    {
        for (key, p) in [("checkins", checkins), ("pois", pois), ("social", social)] {
            if let Some(p) = p {
                o.push(format!("data.{key}={}", toml_string(p)));
            }
        }
    }
    o.extend(cli.set.iter().cloned());
    o
}

fn toml_string(p: &std::path::Path) -> String {
    toml::Value::String(p.display().to_string()).to_string()
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides(&cli))?;
    let pool = runner::thread_pool(cfg.run.jobs)?;
    pool.install(|| match &cli.command {
        Command::Ingest { .. } => {
            let d = runner::ingest_stage(&cfg)?;
            println!(
                "users={} pois={} checkins={}",
                d.num_users(),
                d.num_pois(),
                d.num_checkins()
            );
            Ok(())
        }
        Command::Synth => {
            let d = runner::synth_stage(&cfg)?;
            println!(
                "users={} pois={} checkins={}",
                d.num_users(),
                d.num_pois(),
                d.num_checkins()
            );
            Ok(())
        }
        Command::Split => {
            let (_, stats) = runner::split_stage(&cfg)?;
            print!("{}", stats.to_key_value());
            Ok(())
        }
        Command::Train => {
            for f in runner::train_stage(&cfg)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::FitExposure => {
            for f in runner::fit_exposure_stage(&cfg)? {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Recommend(s) => {
            let lists = runner::recommend_stage(&cfg, s.run()?)?;
            println!(
                "{} lists written to {}",
                lists.len(),
                cfg.run.out.join("recommendations.csv").display()
            );
            Ok(())
        }
        Command::Evaluate(s) => print_json(&runner::evaluate_stage(&cfg, s.run()?)?),
        Command::Sweep { tune } => {
            let r = runner::run_sweep(&cfg, *tune)?;
            println!("{} rows written to {}", r.rows.len(), cfg.run.out.display());
            Ok(())
        }
        Command::Stats { input, test } => {
            let test: TestKind = test.parse()?;
            print_json(&runner::stats_from_file(
                input,
                cfg.data.delimiter.byte(),
                test,
            )?)
        }
        Command::Pareto { input, output } => {
            let out = output.clone().unwrap_or_else(|| input.clone());
            let n = runner::mark_pareto_file(input, &out)?;
            println!("{n} points on the front");
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
