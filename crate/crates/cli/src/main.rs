//! Entry point: parse arguments, dispatch, map the outcome to an exit code
//! (0 clean, 1 completed with warnings, 2 fatal).

mod args;
mod emit;
mod pipeline;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    match pipeline::dispatch(cli.command) {
        Ok(false) => {}
        Ok(true) => std::process::exit(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}
