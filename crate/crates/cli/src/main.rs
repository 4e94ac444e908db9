fn main() {
    std::process::exit(stockpile_cli::run(std::env::args_os()));
}
