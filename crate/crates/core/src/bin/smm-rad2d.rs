use clap::{Parser, ValueEnum};
use smm_rad2d::harness::{config::parse_methods, run, Config, Driver};
use smm_rad2d::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

/// Second moment method study drivers.
#[derive(Debug, Parser)]
#[command(name = "smm-rad2d", version)]
struct Cli {
    /// mms, diffusion-limit, multimaterial or sn-convergence
    driver: Driver,
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Restrict to one method (ip, cg, rt, hrt) or a comma list.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, value_enum)]
    fixup: Option<Toggle>,
    /// Anderson history size; 0 is Picard iteration.
    #[arg(long)]
    anderson: Option<usize>,
}

fn configure(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::new(cli.driver),
    };
    if cfg.driver != cli.driver {
        return Err(Error::Config(format!(
            "configuration is for the {} driver, not {}",
            cfg.driver, cli.driver
        )));
    }
    if let Some(m) = &cli.method {
        cfg.methods = parse_methods(m)?;
    }
    if let Some(f) = cli.fixup {
        cfg.fixup = matches!(f, Toggle::On);
    }
    if let Some(a) = cli.anderson {
        cfg.anderson = Some(a);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match configure(&cli).and_then(|cfg| run(&cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = report.write(&cli.out) {
        eprintln!("error: writing reports: {e}");
        return ExitCode::from(2);
    }
    print!("{}", report.header());
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
