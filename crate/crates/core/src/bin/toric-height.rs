use clap::Parser;

use toric_height::cli::{run, Cli, EXIT_INVALID_INPUT};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                0
            });
        }
    };
    std::process::exit(run(&cli));
}
