fn main() {
    std::process::exit(eqw_cli::run(std::env::args_os()));
}
