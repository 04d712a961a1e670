use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_target(false)
        .init();
    if let Err(error) = rca::cli::run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
