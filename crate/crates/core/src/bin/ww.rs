fn main() {
    std::process::exit(wittwel::cli::run(std::env::args_os()));
}
