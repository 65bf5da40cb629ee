//! Command-line front end: run the online experiment, the offline baseline,
//! batch prediction, snapshot inspection and benchmark-data generation.
//!
//! Exit codes: 0 success, 1 data error, 2 config error, 3 internal error.

mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use netsoinn::data::{encode_features, parse_nslkdd};
use netsoinn::engine::DetectionEngine;
use netsoinn::harness::{
    emit_report, prepare_experiment_data, render_offline_csv, render_offline_json, run_offline,
    run_online, ExperimentConfig, ReportFormat, TrainingDigest,
};
use netsoinn::synth::{generate_to_path, FileKind};

use error::CliError;

#[derive(Parser)]
#[command(name = "netsoinn", version, about = "Online incremental intrusion detection benchmark")]
struct Cli {
    /// Override the experiment seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the report format (json|csv|both).
    #[arg(long, global = true, value_parser = parse_format)]
    report: Option<ReportFormat>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    match s {
        "json" => Ok(ReportFormat::Json),
        "csv" => Ok(ReportFormat::Csv),
        "both" => Ok(ReportFormat::Both),
        other => Err(format!("unknown report format `{other}` (json|csv|both)")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Initial training plus the test-then-feed-back rounds; writes round
    /// reports, the training digest and the engine snapshot.
    RunOnline {
        #[arg(long)]
        config: PathBuf,
    },
    /// One-batch baseline trained on the multiset recorded by a previous
    /// online run.
    RunOffline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        training_digest: PathBuf,
    },
    /// Classify the records of an NSL-KDD file with a saved engine.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Summarize a saved engine: node counts, SVM sizes, parameters.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
    /// Generate benchmark data files in NSL-KDD format.
    GenData {
        /// Records in the initial-training file.
        #[arg(long, default_value_t = 22_544)]
        initial: usize,
        /// Records in the rounds file.
        #[arg(long, default_value_t = 125_973)]
        rounds: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn load_config(path: &Path, cli_seed: Option<u64>, cli_report: Option<ReportFormat>, cli_out: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    // Anything wrong with the config file itself is a config error.
    let mut config =
        ExperimentConfig::from_path(path).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = cli_seed {
        config.experiment.seed = seed;
    }
    if let Some(report) = cli_report {
        config.report.format = report;
    }
    if let Some(out) = cli_out {
        config.report.out_dir = out.display().to_string();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RunOnline { config } => {
            let config = load_config(&config, cli.seed, cli.report, cli.out.as_ref())?;
            let data = prepare_experiment_data(&config)?;
            let outcome = run_online(&config, &data)?;
            let out_dir = PathBuf::from(&config.report.out_dir);
            let written = emit_report(
                &outcome.reports,
                config.report.format,
                &out_dir,
                "online_report",
                data.total_available,
                config.experiment.zero_times,
            )?;
            let snapshot = out_dir.join("engine.snapshot.json");
            outcome.engine.save(&snapshot)?;
            let digest_path = out_dir.join("training_digest.json");
            outcome.digest.save(&digest_path)?;

            println!("round  accuracy%   time_s  cumulative  failures");
            for r in &outcome.reports {
                println!(
                    "{:>5}  {:>8.2}  {:>7.1}  {:>10}  {:>8}",
                    r.round, r.accuracy_pct, r.time_s, r.cumulative_samples, r.failures
                );
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", snapshot.display());
            println!("wrote {}", digest_path.display());
            Ok(())
        }
        Command::RunOffline {
            config,
            training_digest,
        } => {
            let config = load_config(&config, cli.seed, cli.report, cli.out.as_ref())?;
            let data = prepare_experiment_data(&config)?;
            let digest = TrainingDigest::load(&training_digest)?;
            let outcome = run_offline(&config, &data, &digest)?;
            let out_dir = PathBuf::from(&config.report.out_dir);
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
            let zero = config.experiment.zero_times;
            let mut written = Vec::new();
            if matches!(config.report.format, ReportFormat::Csv | ReportFormat::Both) {
                let path = out_dir.join("offline_report.csv");
                std::fs::write(&path, render_offline_csv(&outcome, zero))
                    .map_err(|e| CliError::io(&path, e))?;
                written.push(path);
            }
            if matches!(config.report.format, ReportFormat::Json | ReportFormat::Both) {
                let path = out_dir.join("offline_report.json");
                std::fs::write(&path, render_offline_json(&outcome, zero))
                    .map_err(|e| CliError::io(&path, e))?;
                written.push(path);
            }
            println!(
                "offline baseline: {} training samples, {:.1}s training time",
                outcome.training_samples, outcome.train_time_s
            );
            for eval in &outcome.evals {
                println!(
                    "  {:<20} accuracy {:>6.2}%  ({} records)",
                    eval.eval_set, eval.accuracy_pct, eval.samples
                );
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Predict { model, input } => {
            let engine = DetectionEngine::load(&model)?;
            let records = parse_nslkdd(&input)?;
            let classes = &engine.config().classes;
            let header: Vec<String> = classes.iter().map(|c| format!("score_{c}")).collect();
            println!("record,predicted,{}", header.join(","));
            for (idx, record) in records.iter().enumerate() {
                let features = encode_features(record, engine.schema())?;
                let prediction = engine.predict(&features)?;
                let scores: Vec<String> = prediction
                    .scores
                    .iter()
                    .map(|s| format!("{s:.6}"))
                    .collect();
                println!("{},{},{}", idx, prediction.final_class, scores.join(","));
            }
            Ok(())
        }
        Command::Inspect { model } => {
            let engine = DetectionEngine::load(&model)?;
            let config = engine.config();
            println!("engine snapshot");
            println!("  seed: {}", engine.seed());
            println!(
                "  cumulative training samples: {}",
                engine.cumulative_training_samples()
            );
            println!("  encoded dimension: {}", engine.schema().dimension);
            println!(
                "  win caps: positive {} / negative {}, top-m {}",
                config.n_pos, config.n_neg, config.m
            );
            println!(
                "  soinn: age_max {}, lambda {}, neighbor divisor {}",
                config.soinn.age_max, config.soinn.lambda, config.soinn.neighbor_rate_divisor
            );
            let svm = config.resolved_svm_params(engine.schema().dimension);
            println!("  svm: C {}, kernel {:?}", svm.c, svm.kernel);
            println!("  classes:");
            for model in engine.class_models() {
                let svs = model
                    .binary_svm
                    .as_ref()
                    .map(|m| m.support_vector_count().to_string())
                    .unwrap_or_else(|| "-".to_string());
                println!(
                    "    {:<7} positive nodes {:>5}  negative nodes {:>5}  svm SVs {:>5}",
                    model.class.to_string(),
                    model.positive.node_count(),
                    model.negative.node_count(),
                    svs
                );
            }
            println!("  pairwise models: {}", engine.pairwise_models().len());
            Ok(())
        }
        Command::GenData { initial, rounds } => {
            let out_dir = cli.out.unwrap_or_else(|| PathBuf::from("data"));
            std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
            let seed = cli.seed.unwrap_or(0);
            let initial_path = out_dir.join("initial.txt");
            let rounds_path = out_dir.join("rounds.txt");
            generate_to_path(&initial_path, FileKind::Initial, initial, seed)
                .map_err(|e| CliError::io(&initial_path, e))?;
            generate_to_path(
                &rounds_path,
                FileKind::Rounds,
                rounds,
                seed.wrapping_add(1),
            )
            .map_err(|e| CliError::io(&rounds_path, e))?;
            println!("wrote {} ({} records)", initial_path.display(), initial);
            println!("wrote {} ({} records)", rounds_path.display(), rounds);
            Ok(())
        }
    }
}
