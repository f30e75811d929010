fn main() -> std::process::ExitCode {
    coarse_covers::cli::main()
}
