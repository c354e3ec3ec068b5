use clap::Parser;

fn main() {
    let cli = accbias_cli::Cli::parse();
    std::process::exit(accbias_cli::run(&cli));
}
