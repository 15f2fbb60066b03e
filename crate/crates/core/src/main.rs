fn main() {
    std::process::exit(slepian::cli::main_with_args(std::env::args_os()));
}
