use clap::Parser;

use scopeprobe_cli::{main_with, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                scopeprobe_cli::exit::INVALID_INPUT
            } else {
                scopeprobe_cli::exit::SUCCESS
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(main_with(&cli));
}
