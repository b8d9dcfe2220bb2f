fn main() {
    std::process::exit(elflow_cli::cli_main(std::env::args_os()));
}
