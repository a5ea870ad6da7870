use clap::Parser;

fn main() {
    let cli = light_cli::Cli::parse();
    std::process::exit(light_cli::run(cli) as i32);
}
