fn main() {
    std::process::exit(bci_featsel::cli::main_with_args(std::env::args_os()));
}
