// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for the neurasim simulator and kernels.

pub mod args;
pub mod cmd;
pub mod compare;
pub mod error;
pub mod load;
pub mod out;

use args::{Cli, Command};
use error::{CliError, CliResult};

pub fn run_cli(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(a) => cmd::run(a),
        Command::Verify(a) => {
            let r = cmd::verify(a)?;
            if r.pass() {
                Ok(())
            } else {
                let failed: Vec<&str> = r.paths.iter().filter(|p| !p.pass).map(|p| p.path.as_str()).collect();
                Err(CliError::Verify(format!("mismatch in {}", failed.join(", "))))
            }
        }
        Command::Sweep(a) => cmd::sweep(a).map(drop),
        Command::Bloat(a) => cmd::bloat(a).map(drop),
        Command::Smash(a) => cmd::smash(a),
        Command::Gcn(a) => cmd::gcn(a).map(drop),
    }
}
