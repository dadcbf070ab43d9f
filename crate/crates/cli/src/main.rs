fn main() {
    std::process::exit(gridcut::run(std::env::args_os()));
}
