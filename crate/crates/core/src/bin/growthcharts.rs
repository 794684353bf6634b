fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(growthcharts::cli::LOG_ENV, "warn")).init();
    std::process::exit(growthcharts::cli::run(std::env::args_os()));
}
