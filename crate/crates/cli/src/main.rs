fn main() {
    std::process::exit(wavelab_cli::run(std::env::args_os()));
}
