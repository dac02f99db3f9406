fn main() {
    std::process::exit(qcsynth::cli::main_with_args(std::env::args_os()));
}
