fn main() {
    std::process::exit(asg_cli::app::run(std::env::args_os()));
}
