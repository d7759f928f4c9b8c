use clap::Parser;

fn main() {
    let cli = ris_chanest::cli::Cli::parse();
    std::process::exit(ris_chanest::cli::execute(cli));
}
