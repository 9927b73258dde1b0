fn main() {
    std::process::exit(lifshitz::cli::run(std::env::args_os()));
}
