fn main() {
    std::process::exit(recipro_cli::commands::main_with(std::env::args()));
}
