fn main() {
    std::process::exit(rem_core::cli::cli_main(std::env::args_os()));
}
