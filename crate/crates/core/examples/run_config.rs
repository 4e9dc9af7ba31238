//! Drives a subcommand from an inline TOML configuration, exactly as the
//! binary does after resolving flags and environment.

use fusedfocus::cli::{execute, Command};
use fusedfocus::config::RunConfig;

const RECIPE: &str = r#"
schema = 1
system = "welander-nonsmooth"

[params]
epsilon = 0.05

[output]
format = "json"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::from_toml(RECIPE)?;
    cfg.validate()?;
    let mut diagnostics = Vec::new();
    let product = execute(Command::Sliding, &cfg, &mut diagnostics)?;
    print!("{}", String::from_utf8(product.bytes)?);
    eprint!("{}", String::from_utf8_lossy(&diagnostics));
    Ok(())
}
