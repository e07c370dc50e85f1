fn main() {
    std::process::exit(bb1spin::cli::run());
}
