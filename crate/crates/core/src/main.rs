fn main() -> std::process::ExitCode {
    sgenome::cli::main()
}
