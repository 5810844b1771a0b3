mod args;
mod commands;
mod render;
mod syntax;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{Map, Value};

use bdstein::Exec;

use crate::args::{Cli, Format};
use crate::commands::{default_tol, run, Context, Failure, EXIT_USAGE};
use crate::render::{render, Envelope};

fn read_spec(cli: &Cli) -> Result<Map<String, Value>, Failure> {
    let Some(path) = &cli.spec_file else { return Ok(Map::new()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::usage("spec file must hold a JSON object")),
        Err(e) => Err(Failure::usage(format!("{}: {e}", path.display()))),
    }
}

fn exec_for(threads: Option<usize>) -> Result<Exec, Failure> {
    match threads {
        Some(0) => Err(Failure::usage("thread count must be positive")),
        Some(1) => Ok(Exec::Sequential),
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::usage(e.to_string()))?;
            Ok(Exec::Parallel)
        }
        None => Ok(Exec::Parallel),
    }
}

fn main_inner(cli: &Cli) -> Result<(String, i32), Failure> {
    let spec = read_spec(cli)?;
    let tol = default_tol(cli.tol);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::usage("--tol must lie in (0, 1)"));
    }
    let ctx = Context { seed: cli.seed, tol, exec: exec_for(cli.threads)?, spec: spec.clone() };
    let outcome = run(&cli.command, &ctx)?;
    let mut config = serde_json::to_value(cli).unwrap_or(Value::Null);
    if let Value::Object(c) = &mut config {
        c.insert("tol".into(), tol.into());
        c.insert("spec".into(), Value::Object(spec));
        c.insert("resolved".into(), outcome.resolved);
    }
    let env = Envelope::new(config, outcome.result);
    let text = match (&outcome.human, cli.format) {
        (Some(h), Format::Human) => h.clone(),
        _ => render(&env, cli.format),
    };
    Ok((text, outcome.code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match main_inner(&cli) {
        Ok((text, code)) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(code as u8)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
