fn main() {
    std::process::exit(xip::cli::run());
}
