fn main() {
    std::process::exit(fpou::cli::run(std::env::args_os()));
}
