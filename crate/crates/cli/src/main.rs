use clap::Parser;

fn main() -> anyhow::Result<()> {
    qillum_cli::cli::run(qillum_cli::cli::Cli::parse())
}
