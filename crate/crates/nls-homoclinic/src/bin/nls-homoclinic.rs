fn main() -> std::process::ExitCode {
    nls_homoclinic::cli::main()
}
