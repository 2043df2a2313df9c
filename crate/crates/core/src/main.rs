fn main() {
    std::process::exit(robustnet::cli::run());
}
