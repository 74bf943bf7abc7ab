fn main() {
    std::process::exit(quintic_bvp::cli::run(std::env::args_os()));
}
