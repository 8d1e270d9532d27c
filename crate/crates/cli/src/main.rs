fn main() {
    std::process::exit(conirep_cli::main_with_args(std::env::args_os()));
}
