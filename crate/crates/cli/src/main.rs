mod args;
mod commands;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// clap has already printed the diagnostic.
#[derive(Debug)]
struct ArgsReported;

impl std::fmt::Display for ArgsReported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("invalid arguments")
    }
}

impl std::error::Error for ArgsReported {}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("DYSPARSE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("DYSPARSE_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        anyhow::bail!("DYSPARSE_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

/// Parses and runs one command line; used by `main` and by `rerun`.
pub fn run(argv: Vec<OsString>) -> Result<(), (u8, anyhow::Error)> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            if code == 0 {
                return Ok(());
            }
            return Err((code, anyhow::Error::new(ArgsReported)));
        }
    };
    let args = &argv[1.min(argv.len())..];
    commands::dispatch(cli.command, args).map_err(|e| (commands::exit_code(&e), e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            if !e.is::<ArgsReported>() {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}
