fn main() {
    std::process::exit(spectral_lift::cli::main_with_args(std::env::args_os()));
}
