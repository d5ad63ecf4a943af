fn main() {
    std::process::exit(hyperbarrier::pipeline::cli::main_with_args(
        std::env::args_os(),
    ));
}
