fn main() {
    std::process::exit(approval_incentives::cli::main_from_env());
}
