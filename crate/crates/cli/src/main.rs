mod config;
mod report;

use clap::error::ErrorKind;
use clap::Parser;
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectra, resolvent traces, zeta functions and heat traces of -d²/dx² + g(g-1)/x² on (0, 1).
#[derive(Parser)]
#[command(name = "sspec", version)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    /// Worker threads (results do not depend on it)
    #[arg(long, env = "SSPEC_THREADS")]
    threads: Option<usize>,
    /// Re-run the configuration stored in a JSON report
    #[arg(long, conflicts_with = "command")]
    from_json: Option<PathBuf>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn load(path: &PathBuf) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg = v.get("config").ok_or_else(|| format!("{}: no \"config\" object", path.display()))?;
    serde_json::from_value(cfg.clone()).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_VALIDATION),
            };
        }
    };
    let cfg = match &cli.from_json {
        Some(path) => {
            if cli.config != RunConfig::default() {
                eprintln!("error: --from-json takes no other run flags");
                return ExitCode::from(EXIT_VALIDATION);
            }
            match load(path) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_VALIDATION);
                }
            }
        }
        None => cli.config,
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_VALIDATION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    match report::run(&cfg) {
        Ok(r) => {
            print!("{}", r.text);
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}
