use clap::Parser;

fn main() {
    let cli = irisparse_cli::Cli::parse();
    match irisparse_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
