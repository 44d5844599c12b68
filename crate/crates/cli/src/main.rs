fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SAFEGUARD_LOG", "warn")).init();
    std::process::exit(safeguard_cli::main_with_args(std::env::args_os()));
}
