fn main() {
    std::process::exit(icg_cli::run(std::env::args_os()));
}
