fn main() {
    std::process::exit(mqg::cli::main());
}
