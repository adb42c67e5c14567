mod args;
mod commands;
mod error;
mod inputs;
mod manifest;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use commands::Outputs;
use error::{CliError, CliResult};
use inputs::Sources;
use manifest::RunManifest;

fn execute(command: &Command, format: Format, sources: &mut Sources) -> CliResult<Outputs> {
    let mut out = Outputs::default();
    match command {
        Command::Design(a) => commands::design(a, format, sources, &mut out)?,
        Command::Model(a) => commands::model(a, format, sources, &mut out)?,
        Command::Basis(a) => commands::basis(a, format, sources, &mut out)?,
        Command::Test(a) => commands::test(a, format, sources, &mut out)?,
        Command::Enumerate(a) => commands::enumerate(a, format, sources, &mut out)?,
        Command::Correspond(a) => commands::correspond(a, format, sources, &mut out)?,
        Command::Replay(_) => return Err(CliError::Invalid("nested replay".into())),
    }
    Ok(out)
}

fn write_files(out: &Outputs) -> CliResult<()> {
    for (path, bytes) in &out.files {
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let (out, extra) = match &cli.command {
        Command::Replay(a) => manifest::replay(a, execute)?,
        command => {
            let mut sources = Sources::default();
            let out = execute(command, cli.format, &mut sources)?;
            if let Some(path) = &cli.manifest {
                let m = RunManifest::new(command, cli.format, &sources, &out);
                std::fs::write(path, m.to_json()).map_err(|e| CliError::io(path, e))?;
            }
            (out, String::new())
        }
    };
    write_files(&out)?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    if !extra.is_empty() {
        eprint!("{extra}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
