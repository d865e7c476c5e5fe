fn main() {
    std::process::exit(strsolve::cli::main_with_args(std::env::args().skip(1).collect()));
}
