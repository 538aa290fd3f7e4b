use clap::Parser;
use coherence_kit_cli::{commands, configure_threads, Cli};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::run(&cli.command));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
