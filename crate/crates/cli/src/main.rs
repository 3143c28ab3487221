fn main() {
    std::process::exit(kmodel_cli::run(std::env::args_os()));
}
