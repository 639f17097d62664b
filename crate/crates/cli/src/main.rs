use clap::Parser;

fn main() {
    let cli = exitsim_cli::Cli::parse();
    if let Err(e) = exitsim_cli::run(cli) {
        eprintln!("exitsim: {e}");
        std::process::exit(e.exit_code());
    }
}
