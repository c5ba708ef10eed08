fn main() {
    std::process::exit(grouping5d::cli::run(std::env::args_os()));
}
