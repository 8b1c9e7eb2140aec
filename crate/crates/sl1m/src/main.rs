fn main() {
    std::process::exit(sl1m::cli::run(std::env::args_os()));
}
