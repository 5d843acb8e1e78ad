fn main() {
    std::process::exit(mdpsolve::cli::run());
}
