mod args;
mod output;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Format};
use output::{exit_code, render_json, render_text, write_atomic, Document, TOOL, VERSION};
use run::UsageError;

const EXIT_USAGE: u8 = 64;
const EXIT_SOFTWARE: u8 = 70;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("COARSE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("COARSE_THREADS: expected a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let out = match run::dispatch(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_SOFTWARE
            };
            return ExitCode::from(code);
        }
    };
    let doc = Document {
        tool: TOOL,
        version: VERSION,
        timestamp: (!cli.no_timestamp)
            .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        command: out.command,
        group: out.group,
        status: out.status,
        result: out.result,
    };
    let text = match cli.format {
        Format::Json => render_json(&doc),
        Format::Text => render_text(&doc),
    };
    let written = match &cli.report {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Into::into),
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_SOFTWARE);
    }
    ExitCode::from(exit_code(doc.status))
}
