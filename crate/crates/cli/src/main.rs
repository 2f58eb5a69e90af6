fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    richards_cli::commands::init_threads();
    std::process::exit(richards_cli::main_with(std::env::args()));
}
