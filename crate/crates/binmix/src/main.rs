fn main() {
    std::process::exit(binmix::cli::main(std::env::args_os()));
}
