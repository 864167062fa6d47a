use std::io::Write;

use clap::Parser;
use deflation::cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let out = run(&cli);
    // a closed pipe is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{}", out.text);
    std::process::exit(out.code);
}
