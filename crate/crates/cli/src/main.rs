fn main() {
    std::process::exit(multirank::app::run(std::env::args_os()));
}
