fn main() {
    std::process::exit(cellnet::cli::main());
}
