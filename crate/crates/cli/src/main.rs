use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use heatlab_cli::{default_format, parse_config, render, render_json, run, Command, Format};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Scenario,
    Sweep,
    Evolve,
    Bounds,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Heat currents, scaling bounds and collective scenarios of open quantum
/// systems.
#[derive(Debug, Parser)]
#[command(name = "heatlab", version)]
struct Cli {
    command: CommandArg,
    /// Scenario name and/or `key=value` settings, e.g. `superradiance L=3`.
    args: Vec<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file; with CSV output the JSON report is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        CommandArg::Scenario => Command::Scenario,
        CommandArg::Sweep => Command::Sweep,
        CommandArg::Evolve => Command::Evolve,
        CommandArg::Bounds => Command::Bounds,
    };
    let mut overrides = Vec::new();
    for (i, a) in cli.args.iter().enumerate() {
        if a.contains('=') {
            overrides.push(a.clone());
        } else if i == 0 {
            overrides.push(format!("scenario=\"{a}\""));
        } else {
            eprintln!("error: unexpected argument `{a}`; settings are key=value");
            return ExitCode::from(2);
        }
    }
    overrides.extend(cli.set);
    let cfg = match parse_config(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run(command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => cfg.format.unwrap_or_else(|| default_format(command)),
    };
    let out = cli.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
    let text = render(&outcome, format);
    let written = match &out {
        Some(path) => write(path, &text).and_then(|_| match format {
            Format::Csv => write(&path.with_extension("json"), &render_json(&outcome)),
            Format::Json => Ok(()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for f in &outcome.failures {
        eprintln!("violation: {f}");
    }
    if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
