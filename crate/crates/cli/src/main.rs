// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

use qbattery_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("qbattery: {e}");
        std::process::exit(e.exit_code());
    }
}
