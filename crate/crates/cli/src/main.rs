fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = echomesh_cli::run(std::env::args_os()) {
        eprintln!("{}", e.to_line());
        std::process::exit(e.exit_code());
    }
}
