use clap::Parser;

fn main() {
    std::process::exit(wqed_cli::main_with(wqed_cli::Cli::parse()));
}
