//! Command-line driver for the verification engine.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scalarflat::families::FAMILY_NAMES;
use scalarflat::report::{emit, run, OutputFormat, Report, RunConfig};

#[derive(Parser)]
#[command(
    name = "scalarflat",
    version,
    about = "Numerical verification of scalar-flat Kähler geometries with a symplectomorphic Killing field"
)]
struct Cli {
    /// Number of worker threads (defaults to SCALARFLAT_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured checks on one family.
    Verify {
        /// Configuration file (TOML); flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Family spec, e.g. `instanton:k=3,m=1` or `s2h2:hyperbolic,diagonal`.
        #[arg(long)]
        family: Option<String>,
        /// Momentum grid bounds and size.
        #[arg(long)]
        z_min: Option<f64>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long)]
        grid: Option<usize>,
        /// Random sample count and seed.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the evolution and inequality checks across the whole catalogue.
    Scan {
        /// Comma-separated family specs; the full catalogue when absent.
        #[arg(long)]
        families: Option<String>,
        /// Grid points per family.
        #[arg(long, default_value_t = 3)]
        grid: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the built-in golden suite with default settings.
    SelfTest,
    /// List the family specs understood by `--family`.
    Families,
}

fn install_thread_pool(threads: Option<usize>) {
    let count = threads.or_else(|| {
        std::env::var("SCALARFLAT_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(count) = count {
        // Ignore failure: the pool can only be installed once (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global();
    }
}

fn write_out(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn deliver(report: &Report, output: &OutputArgs) -> std::io::Result<bool> {
    let format = output.format.unwrap_or(report.config.output.format);
    write_out(&emit(report, format), &output.out)?;
    Ok(report.all_passed())
}

fn verify(
    config: Option<PathBuf>,
    family: Option<String>,
    z_min: Option<f64>,
    z_max: Option<f64>,
    grid: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    output: &OutputArgs,
) -> Result<bool, String> {
    let mut run_config = match config {
        Some(path) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::from_toml(&text).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(family) = family {
        run_config.family.name = family;
    }
    if z_min.is_some() {
        run_config.grid.z_min = z_min;
    }
    if z_max.is_some() {
        run_config.grid.z_max = z_max;
    }
    if let Some(grid) = grid {
        run_config.grid.count = grid;
    }
    if let Some(samples) = samples {
        run_config.samples.count = samples;
    }
    if let Some(seed) = seed {
        run_config.samples.seed = seed;
    }
    if let Some(format) = output.format {
        run_config.output.format = format;
    }
    let report = run(&run_config).map_err(|e| e.to_string())?;
    deliver(&report, output).map_err(|e| e.to_string())
}

fn scan(families: Option<String>, grid: usize, output: &OutputArgs) -> Result<bool, String> {
    let names: Vec<String> = match families {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => FAMILY_NAMES.iter().map(|s| s.to_string()).collect(),
    };
    let mut all_passed = true;
    let mut pieces = Vec::new();
    let format = output.format.unwrap_or(OutputFormat::Csv);
    for (i, name) in names.iter().enumerate() {
        let mut config = RunConfig::default();
        config.family.name = name.clone();
        config.grid.count = grid;
        // The scan sweeps integral quantities; pointwise identities
        // belong to `verify`.
        config.checks.pointwise = false;
        config.checks.curvature = false;
        config.checks.toda = false;
        config.checks.transgression = false;
        let report = run(&config).map_err(|e| format!("{name}: {e}"))?;
        all_passed &= report.all_passed();
        let text = emit(&report, format);
        // Single csv header across the sweep.
        let text = match format {
            OutputFormat::Csv if i > 0 => text.split_once('\n').map_or(String::new(), |x| x.1.to_string()),
            _ => text,
        };
        pieces.push(text);
    }
    write_out(&pieces.concat(), &output.out).map_err(|e| e.to_string())?;
    Ok(all_passed)
}

fn self_test() -> Result<bool, String> {
    let mut all_passed = true;
    for name in [
        "flat",
        "instanton:k=3,m=1",
        "s2h2:hyperbolic,diagonal",
        "ansatz-broken",
    ] {
        let mut config = RunConfig::default();
        config.family.name = name.to_string();
        config.grid.count = 3;
        config.samples.count = 12;
        config.checks.deep_points = 1;
        let report = run(&config).map_err(|e| format!("{name}: {e}"))?;
        all_passed &= report.all_passed();
        print!("{}", emit(&report, OutputFormat::Table));
        println!();
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    install_thread_pool(cli.threads);
    let outcome = match &cli.command {
        Command::Verify {
            config,
            family,
            z_min,
            z_max,
            grid,
            samples,
            seed,
            output,
        } => verify(
            config.clone(),
            family.clone(),
            *z_min,
            *z_max,
            *grid,
            *samples,
            *seed,
            output,
        ),
        Command::Scan {
            families,
            grid,
            output,
        } => scan(families.clone(), *grid, output),
        Command::SelfTest => self_test(),
        Command::Families => {
            for name in FAMILY_NAMES {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
