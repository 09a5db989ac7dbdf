fn main() {
    std::process::exit(voxprompt::cli::run(std::env::args_os()));
}
