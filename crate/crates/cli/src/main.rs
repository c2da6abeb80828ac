use clap::error::ErrorKind;
use clap::Parser;

use vtreg::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(&cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
