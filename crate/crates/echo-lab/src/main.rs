fn main() {
    std::process::exit(echo_lab::cli::run());
}
