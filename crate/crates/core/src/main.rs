fn main() {
    std::process::exit(ppsi::cli::run(std::env::args_os()));
}
