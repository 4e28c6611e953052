fn main() {
    std::process::exit(ioncrystal::cli::run(std::env::args_os()));
}
