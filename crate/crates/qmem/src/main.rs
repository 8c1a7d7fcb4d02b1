//! Command-line front end.
//!
//! ```text
//! qmem simulate <config> [--verify] [--out DIR]
//! qmem sweep <config>
//! qmem diagnostics <config>
//! qmem compare <config>
//! ```
//!
//! Exit status: 0 success, 1 configuration or usage problem, 2 numerical
//! failure, 3 failed `--verify` self-check.

use qmem::error::QmemError;
use qmem::{execute_compare, execute_diagnostics, execute_run, execute_sweep, parse_config};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage:
  qmem simulate <config> [--verify] [--out DIR]
  qmem sweep <config>
  qmem diagnostics <config>
  qmem compare <config>

The config file holds one `key = value` per line; an empty file runs the
reference configuration. See README.md for the key table.";

fn read_config(path: &str) -> Result<qmem::RunConfig, QmemError> {
    let text = std::fs::read_to_string(path).map_err(|e| QmemError::FileAccess {
        path: path.to_string(),
        source: e,
    })?;
    parse_config(&text)
}

fn run(args: &[String]) -> Result<(), QmemError> {
    let command = args.first().map(String::as_str).unwrap_or("");
    match command {
        "simulate" => {
            let mut config_path: Option<&str> = None;
            let mut verify = false;
            let mut out: Option<PathBuf> = None;
            let mut it = args[1..].iter();
            while let Some(arg) = it.next() {
                match arg.as_str() {
                    "--verify" => verify = true,
                    "--out" => {
                        let dir = it
                            .next()
                            .ok_or_else(|| QmemError::Usage("--out needs a directory".into()))?;
                        out = Some(PathBuf::from(dir));
                    }
                    flag if flag.starts_with('-') => {
                        return Err(QmemError::Usage(format!("unknown flag `{flag}`")))
                    }
                    path if config_path.is_none() => config_path = Some(path),
                    extra => {
                        return Err(QmemError::Usage(format!("unexpected argument `{extra}`")))
                    }
                }
            }
            let path = config_path.ok_or_else(|| {
                QmemError::Usage(format!("simulate needs a config file\n{USAGE}"))
            })?;
            let mut cfg = read_config(path)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            execute_run(&cfg, verify)?;
            println!("wrote {}", cfg.output_dir.join("timeseries.csv").display());
            println!("wrote {}", cfg.output_dir.join("summary.json").display());
            if cfg.emit_svg {
                println!("wrote {}", cfg.output_dir.join("hysteresis.svg").display());
            }
            Ok(())
        }
        "sweep" | "diagnostics" | "compare" => {
            let [config_path] = &args[1..] else {
                return Err(QmemError::Usage(format!(
                    "{command} needs a config file\n{USAGE}"
                )));
            };
            let cfg = read_config(config_path)?;
            match command {
                "sweep" => {
                    execute_sweep(&cfg)?;
                    println!("wrote {}", cfg.output_dir.join("sweep.csv").display());
                }
                "diagnostics" => print!("{}", execute_diagnostics(&cfg)?),
                _ => print!("{}", execute_compare(&cfg)?),
            }
            Ok(())
        }
        "" => Err(QmemError::Usage(format!("no command given\n{USAGE}"))),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(QmemError::Usage(format!(
            "unknown command `{other}`\n{USAGE}"
        ))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
