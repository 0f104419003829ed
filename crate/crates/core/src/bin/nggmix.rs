fn main() {
    std::process::exit(nggmix::cli::main_with_args(std::env::args_os().collect()));
}
