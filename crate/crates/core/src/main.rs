fn main() {
    std::process::exit(ruleprune::cli::run(std::env::args_os()));
}
