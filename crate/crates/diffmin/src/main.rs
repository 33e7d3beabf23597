fn main() {
    std::process::exit(diffmin::cli::run());
}
