fn main() {
    std::process::exit(verse_eval::cli::run(std::env::args_os()));
}
