fn main() -> std::process::ExitCode {
    subdirect::cli::main_entry()
}
