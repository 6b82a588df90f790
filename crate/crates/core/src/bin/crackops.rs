use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crackops::cli::{self, CliError, Suite};

#[derive(Parser)]
#[command(name = "crackops", version, about = "Interface crack solver and identity checks")]
struct Args {
    /// Worker threads (falls back to CRACKOPS_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario in a config file and write its artifacts.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a built-in verification suite (all suites by default).
    Verify {
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
    },
    /// Error against the closed form for several mesh sizes.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
    Table,
}

fn threads(arg: Option<usize>) -> Result<Option<usize>, CliError> {
    if arg.is_some() {
        return Ok(arg);
    }
    match std::env::var("CRACKOPS_THREADS") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::Config(cli::ConfigErrors(vec![cli::ConfigIssue {
                line: None,
                field: "CRACKOPS_THREADS".into(),
                message: format!("expected a positive integer, got `{s}`"),
            }]))
        }),
        Err(_) => Ok(None),
    }
}

fn run(args: Args) -> Result<(), CliError> {
    if let Some(t) = threads(args.threads)? {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match args.command {
        Command::Solve { config, n, l, output } => {
            let mut c = cli::load_config(&config)?;
            c.apply_overrides(n, l, output)?;
            let summary = cli::run_scenario(&c)?;
            for (label, v) in &summary.values {
                println!("{label} = {}", cli::fmt_num(*v));
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Verify { suite } => {
            let suites = match suite {
                Some(SuiteArg::TwoD) => vec![Suite::TwoD],
                Some(SuiteArg::ThreeD) => vec![Suite::ThreeD],
                Some(SuiteArg::Table) => vec![Suite::Table],
                None => vec![Suite::TwoD, Suite::ThreeD, Suite::Table],
            };
            let mut failed = 0;
            for s in suites {
                for c in cli::verify_suite(s)? {
                    let status = if c.passed() { "PASS" } else { "FAIL" };
                    println!("{status} {} (n={}): {:.3e} < {:.0e}", c.name, c.n, c.value, c.tolerance);
                    failed += usize::from(!c.passed());
                }
            }
            if failed > 0 {
                return Err(CliError::Verification { failed });
            }
        }
        Command::Converge { config, n, output } => {
            let mut c = cli::load_config(&config)?;
            c.apply_overrides(None, None, output)?;
            let (report, path) = cli::run_convergence(&c, &n)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.to_csv());
            if let Some(p) = report.observed_order {
                println!("observed order: {p:.3}");
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
