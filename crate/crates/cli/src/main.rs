use clap::{Args, Parser, Subcommand};
use ilrep::commands;
use ilrep::{CliError, ExperimentConfig, Preset, RawConfig};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ilrep", version, about = "Impermanent loss of concentrated-liquidity positions and its option replication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Holdings, impermanent loss and its option decomposition at each exit price.
    Il(Common),
    /// Heston Monte Carlo E[UIL] against its option-strip replication.
    Table1(Common),
    /// Closed-form GBM E[UIL] across volatility and horizon.
    Figure1(Common),
    /// Build static hedges from an option chain CSV.
    Hedge {
        #[command(flatten)]
        common: Common,
        /// Chain CSV with header kind,strike,maturity_years,price.
        #[arg(long)]
        chain: PathBuf,
        /// Write the per-position summary here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Accept quotes whose maturity is within this many years of the horizon.
        #[arg(long)]
        maturity_tol: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output CSV (stdout when omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    strikes: Option<usize>,
    /// Override a configuration key, e.g. `--set heston.kappa=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for path simulation.
    #[arg(long)]
    threads: Option<usize>,
    /// Append a wall-time column to table1 output.
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn load(&self, preset: Preset, extra: &[(&str, String)]) -> Result<ExperimentConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
                RawConfig::parse(&text, &path.display().to_string())?
            }
            None => RawConfig::default(),
        };
        for o in &self.overrides {
            raw.set(o)?;
        }
        let flags = [
            ("mc.seed", self.seed.map(|v| v.to_string())),
            ("mc.paths", self.paths.map(|v| v.to_string())),
            ("quadrature.strikes", self.strikes.map(|v| v.to_string())),
            ("output", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))) {
            raw.set_value(key, value, &format!("command line ({key})"));
        }
        for (key, value) in extra {
            raw.set_value(key, value, &format!("command line ({key})"));
        }
        ExperimentConfig::load(preset, raw)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(format!("creating {}", p.display()), e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Il(c) => {
            set_threads(c.threads)?;
            let cfg = c.load(Preset::Il, &[])?;
            let rows = commands::run_il(&cfg)?;
            commands::write_il(&rows, open_output(cfg.output.as_deref())?)
        }
        Command::Table1(c) => {
            set_threads(c.threads)?;
            let cfg = c.load(Preset::Table1, &[])?;
            let rows = commands::run_table1(&cfg)?;
            ilrep::output::write_results(&rows, open_output(cfg.output.as_deref())?, c.timings)
        }
        Command::Figure1(c) => {
            set_threads(c.threads)?;
            let cfg = c.load(Preset::Figure1, &[])?;
            let rows = commands::run_figure1(&cfg)?;
            commands::write_figure1(&rows, open_output(cfg.output.as_deref())?)
        }
        Command::Hedge { common: c, chain, summary, maturity_tol } => {
            set_threads(c.threads)?;
            let extra: Vec<(&str, String)> =
                maturity_tol.map(|t| ("hedge.maturity_tolerance", t.to_string())).into_iter().collect();
            let cfg = c.load(Preset::Hedge, &extra)?;
            let file = File::open(&chain).map_err(|e| CliError::io(format!("opening {}", chain.display()), e))?;
            let quotes = commands::read_chain(file, &chain.display().to_string())?;
            let results = commands::run_hedge(&cfg, &quotes)?;
            for r in &results {
                for issue in &r.portfolio.rejected {
                    eprintln!(
                        "warning: {}: skipped {} K={} T={}: {}",
                        r.position.name,
                        issue.quote.kind.as_str(),
                        issue.quote.strike,
                        issue.quote.maturity,
                        issue.reason
                    );
                }
            }
            commands::write_hedge_legs(&results, open_output(cfg.output.as_deref())?)?;
            match summary {
                Some(p) => commands::write_hedge_summary(&results, open_output(Some(&p))?),
                None => commands::write_hedge_summary(&results, io::stderr().lock()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
