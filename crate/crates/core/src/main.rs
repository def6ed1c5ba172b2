fn main() {
    std::process::exit(tmp_align::cli::run(std::env::args_os()));
}
