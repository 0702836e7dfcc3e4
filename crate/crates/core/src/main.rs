fn main() {
    std::process::exit(ncbrane::cli::run(std::env::args_os()));
}
