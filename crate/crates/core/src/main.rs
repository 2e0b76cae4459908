fn main() {
    std::process::exit(epr_lab::cli::run());
}
