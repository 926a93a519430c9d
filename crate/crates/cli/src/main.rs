fn main() {
    std::process::exit(repeater_ad_cli::main_with(std::env::args_os()));
}
