fn main() {
    std::process::exit(quncert::cli::run());
}
