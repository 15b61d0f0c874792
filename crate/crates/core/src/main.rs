fn main() {
    std::process::exit(glyphforge::cli::main());
}
