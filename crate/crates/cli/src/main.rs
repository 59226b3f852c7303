use clap::Parser;

fn main() {
    let args = iogd_cli::Args::parse();
    std::process::exit(iogd_cli::main_with(&args));
}
