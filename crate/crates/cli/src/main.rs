fn main() {
    std::process::exit(ehdspray_cli::main_with_args(std::env::args_os()));
}
