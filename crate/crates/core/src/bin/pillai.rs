fn main() {
    std::process::exit(pillai::cli::main_with(std::env::args_os()));
}
