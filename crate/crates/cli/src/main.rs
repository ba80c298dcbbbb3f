use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iqa_prep::bench::{parse_size, run_bench, verify_pair, BenchOptions, MIN_REPETITIONS};
use iqa_prep::{
    compute_factor, load_pnm, matrix_by_name, score, synth_image, write_pnm, ChannelSet, Error,
    MetricConfig, PipelinePlan, Strategy,
};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "iqa-prep",
    version,
    about = "Compare color-transform/downsample orderings for IQA front-ends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time both orderings across image sizes and write CSV plus a Markdown summary.
    Bench {
        #[arg(long, default_value = "384x512,1080x1920,2160x3840", value_delimiter = ',', value_parser = size_arg)]
        sizes: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Skip timing; report operation counts with zeroed milliseconds.
        #[arg(long)]
        counters_only: bool,
    },
    /// Check that both orderings give the same channels and score.
    Verify {
        #[arg(long, value_parser = size_arg)]
        size: (usize, usize),
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "yiq")]
        matrix: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Score a distorted PPM against a reference PPM.
    Score {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "dst")]
        distorted: PathBuf,
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
        #[arg(long)]
        luma_only: bool,
        #[arg(long, default_value = "yiq")]
        matrix: String,
    },
    /// Write a deterministic synthetic PPM.
    Synth {
        #[arg(long, value_parser = size_arg)]
        size: (usize, usize),
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn size_arg(s: &str) -> Result<(usize, usize), String> {
    parse_size(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Bench {
            sizes,
            seed,
            reps,
            out,
            counters_only,
        } => {
            if reps < MIN_REPETITIONS {
                return Err(Error::TooFewRepetitions {
                    min: MIN_REPETITIONS,
                    got: reps,
                });
            }
            let mut opts = BenchOptions::new(sizes, seed, reps);
            opts.counters_only = counters_only;
            let report = run_bench(&opts)?;
            fs::write(&out, report.to_csv()).map_err(|source| Error::Io { path: out, source })?;
            print!("{}", report.to_markdown());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            size,
            seed,
            matrix,
            tol,
        } => {
            let matrix = matrix_by_name(&matrix)?;
            let outcome = verify_pair(size, seed, &matrix, tol, &MetricConfig::default())?;
            println!(
                "size {}x{} seed {seed} matrix {} M={}",
                size.0,
                size.1,
                matrix.name(),
                outcome.factor.factor()
            );
            for (ch, diff) in &outcome.channels.per_channel {
                println!("max_abs_diff {ch}: {diff:e}");
            }
            match outcome.scores {
                Some((a, b)) => println!(
                    "score convert-first {a:.15} downsample-first {b:.15} delta {:e}",
                    (a - b).abs()
                ),
                None => println!("score skipped: reduced image smaller than 3x3"),
            }
            let passed = outcome.passed();
            println!(
                "tolerance {tol:e}: {}",
                if passed { "PASS" } else { "FAIL" }
            );
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATION)
            })
        }
        Command::Score {
            reference,
            distorted,
            strategy,
            luma_only,
            matrix,
        } => {
            let reference = load_pnm(&reference)?;
            let distorted = load_pnm(&distorted)?;
            let (h, w) = (reference.height(), reference.width());
            let channels = if luma_only {
                ChannelSet::LUMA
            } else {
                ChannelSet::ALL
            };
            let spec = compute_factor(h, w);
            let plan = PipelinePlan::new(strategy, channels, spec, matrix_by_name(&matrix)?, h, w)?;
            let r = plan.execute(&reference)?;
            let d = plan.execute(&distorted)?;
            let s = score(&r, &d, &MetricConfig::default())?;
            let c = r.counters();
            println!("score {:.12}", s.value);
            println!("gradient {:.12}", s.gradient);
            for (ch, v) in &s.chroma {
                println!("chroma {ch} {v:.12}");
            }
            println!("strategy {}", plan.strategy());
            println!("M {}", spec.factor());
            println!("channels {channels}");
            println!(
                "conversion mul {} add {}; filtering mul {} add {} (per image)",
                c.conversion.multiplies,
                c.conversion.adds,
                c.filtering.multiplies,
                c.filtering.adds
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth { size, seed, out } => {
            write_pnm(&synth_image(size.0, size.1, seed)?, &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
