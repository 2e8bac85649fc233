//! Configuration parsing, run dispatch and report rendering behind the
//! `heatlab` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_str, ConfigError, Format, RunConfig};
pub use run::{run, Command, Outcome, RunError};

/// Default output format of a command.
pub fn default_format(command: Command) -> Format {
    match command {
        Command::Sweep | Command::Evolve => Format::Csv,
        Command::Scenario | Command::Bounds => Format::Json,
    }
}

pub fn render_json(outcome: &Outcome) -> String {
    let mut s = serde_json::to_string_pretty(&outcome.report).expect("JSON values serialize");
    s.push('\n');
    s
}

/// The primary output text in `format`.
pub fn render(outcome: &Outcome, format: Format) -> String {
    match (format, &outcome.csv) {
        (Format::Csv, Some(csv)) => csv.clone(),
        _ => render_json(outcome),
    }
}
