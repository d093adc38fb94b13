//! Binary entry point: logging, argument parsing, configuration merge, and
//! dispatch with the documented exit codes (0 success, 2 configuration
//! error, 3 numerical failure).
//!
//! The log level is controlled by the `LMSZ_SPIN_LOG` environment variable.

mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Cmd};

/// Restores the default disposition for a closed output pipe, so that
/// `lmsz ... | head` ends the process quietly instead of panicking on a
/// write to the closed end.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LMSZ_SPIN_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.common.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            std::process::exit(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> error::Result<()> {
    let rc = config::merged(&cli.common)?;
    if cli.common.dump_config {
        print!("{}", rc.to_toml()?);
        return Ok(());
    }
    match &cli.cmd {
        Cmd::Simulate => commands::simulate(&rc),
        Cmd::Scan => commands::scan(&rc, &cli.common),
        Cmd::Classify { p_plus, p_minus } => {
            commands::classify(&rc, &cli.common, *p_plus, *p_minus)
        }
        Cmd::EntangleCondition => commands::entangle_condition(&rc, &cli.common),
        Cmd::Selftest => commands::selftest(&rc),
    }
}
