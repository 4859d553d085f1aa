fn main() -> std::process::ExitCode {
    keigs::cli::main()
}
