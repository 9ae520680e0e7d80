fn main() {
    std::process::exit(dirmi::cli::run());
}
