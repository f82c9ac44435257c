use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = aoi_cli::Args::parse();
    std::process::exit(aoi_cli::run(&args));
}
