fn main() {
    std::process::exit(cdl::cli::run(std::env::args_os()));
}
