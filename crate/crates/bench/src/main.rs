fn main() {
    std::process::exit(alkrig_bench::cli::main(std::env::args().collect()));
}
