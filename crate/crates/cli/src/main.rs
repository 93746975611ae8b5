use clap::Parser;

fn main() {
    let cli = hglfr_cli::Cli::parse();
    if let Err(e) = hglfr_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
