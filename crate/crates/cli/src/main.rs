use clap::Parser;
use spinvar_cli::commands::{self, Cli};
use spinvar_cli::{config, CliError};

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SPINVAR_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!("SPINVAR_THREADS must be a positive integer, got {v:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run() -> Result<(), CliError> {
    configure_threads()?;
    let args = config::expand(std::env::args().collect())?;
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    commands::dispatch(cli)
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
