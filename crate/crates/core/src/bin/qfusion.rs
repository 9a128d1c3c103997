fn main() {
    std::process::exit(qfusion::cli::main_with_args(std::env::args_os()));
}
