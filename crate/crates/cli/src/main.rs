fn main() {
    std::process::exit(lorenz_tools::run(std::env::args_os()));
}
