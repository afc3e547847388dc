use clap::Parser;

fn main() {
    let cli = fide::cli::Cli::parse();
    fide::runner::configure_threads();
    if let Err(err) = fide::cli::run(cli) {
        if err.is::<fide::cli::UsageError>() {
            eprintln!("error: {err}");
            eprintln!("Run 'fide --help' for usage.");
            std::process::exit(2);
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
