use clap::Parser;

fn main() {
    let cli = tmax::cli::Cli::parse();
    if let Err(e) = tmax::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
