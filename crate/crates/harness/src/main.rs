use clap::Parser;

fn main() {
    let cli = pwrc_harness::cli::Cli::parse();
    if let Err(e) = pwrc_harness::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
