fn main() {
    std::process::exit(mixflow_cli::main_with(std::env::args_os()));
}
