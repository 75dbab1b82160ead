fn main() {
    std::process::exit(qlb_cli::run(std::env::args_os()));
}
