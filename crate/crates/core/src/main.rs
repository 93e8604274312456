use clap::Parser;

fn main() {
    let cli = kdvlab::cli::Cli::parse();
    std::process::exit(kdvlab::cli::run(&cli));
}
