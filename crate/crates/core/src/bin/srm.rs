fn main() {
    std::process::exit(srm_ltrc::cli::run(std::env::args_os()));
}
