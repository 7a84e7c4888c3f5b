fn main() {
    std::process::exit(raynav::cli::main());
}
