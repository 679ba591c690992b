fn main() {
    std::process::exit(intineq::cli_report::run(std::env::args_os()));
}
