use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = grantscope_cli::Cli::parse();
    if let Err(e) = grantscope_cli::run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(grantscope_cli::exit_code(&e));
    }
}
