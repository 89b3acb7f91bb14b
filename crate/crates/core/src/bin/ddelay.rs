fn main() {
    std::process::exit(discrete_delay::cli::main_with_args());
}
