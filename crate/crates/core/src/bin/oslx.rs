fn main() -> std::process::ExitCode {
    oslx::cli::main()
}
