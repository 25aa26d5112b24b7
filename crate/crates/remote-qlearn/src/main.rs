fn main() {
    std::process::exit(remote_qlearn::cli::run_main());
}
