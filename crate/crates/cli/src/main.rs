use clap::Parser;
use pertlag_cli::config::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = pertlag_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
