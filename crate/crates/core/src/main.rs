fn main() {
    std::process::exit(milburn::harness::cli_main(std::env::args_os()));
}
