use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lyrix::pipeline::{exit_code, run_features, run_multivariate, run_trends, PipelineConfig};
use lyrix::Result;

#[derive(Parser)]
#[command(name = "lyrix", version, about = "Lyrical complexity analysis pipeline")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "lyrix.toml")]
    config: PathBuf,

    /// Overrides the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-song features, topic model and rejects report.
    Features,
    /// Time series, changepoints and event windows for one feature.
    Trends {
        #[arg(long)]
        feature: String,
    },
    /// PCA, clustering, correlations and regressions over features.csv.
    Multivariate,
    /// Checks the config and that every referenced path exists.
    ValidateConfig,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    match cli.command {
        Command::Features => {
            let out = run_features(&cfg)?;
            println!(
                "{} songs ({} rejected), {} topics -> {}",
                out.songs,
                out.rejects,
                out.num_topics,
                out.features_path.display()
            );
        }
        Command::Trends { feature } => {
            let report = run_trends(&cfg, &feature)?;
            for s in &report.series {
                println!(
                    "{} {}: {} periods, changepoints at [{}]",
                    feature,
                    s.series.granularity,
                    s.series.points.len(),
                    s.changepoint_periods.join(", ")
                );
            }
            println!("{} event windows", report.events.len());
        }
        Command::Multivariate => {
            let report = run_multivariate(&cfg)?;
            let ratios: Vec<String> = report
                .pca
                .explained_variance_ratio
                .iter()
                .map(|r| format!("{r:.3}"))
                .collect();
            println!(
                "{} rows; PCA ratios [{}]; k-means elbow k = {}",
                report.rows,
                ratios.join(", "),
                report.clusters.k
            );
        }
        Command::ValidateConfig => {
            cfg.validate()?;
            println!("config ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
