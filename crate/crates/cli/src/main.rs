use std::process::ExitCode;

use clap::Parser;
use tensorforge_cli::{execute, summary, Cli, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (code, value) = execute(&cli);
    if let Some(e) = value.get("error") {
        eprintln!("error: {}: {}", e["kind"].as_str().unwrap_or("Error"), e["message"].as_str().unwrap_or(""));
    }
    let text = match cli.common.format {
        Format::Json => serde_json::to_string(&value).expect("json values serialize") + "\n",
        Format::Summary => summary(&value),
    };
    match &cli.common.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code as u8)
}
