fn main() {
    std::process::exit(fracvar::cli::cli_main(std::env::args_os()));
}
