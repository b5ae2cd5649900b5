fn main() {
    std::process::exit(nashcode::cli::run(std::env::args_os()));
}
