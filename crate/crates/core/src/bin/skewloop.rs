fn main() {
    env_logger::init();
    std::process::exit(skewloops::cli::main_with_args(std::env::args_os()));
}
