fn main() {
    std::process::exit(cmspec::cli::run(std::env::args_os()));
}
