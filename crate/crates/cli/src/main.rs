use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use tavis_cli::{parse_config, run_sweep, write_csv, CliArgs};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = CliArgs::parse();
    let spec = match parse_config(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("tavis: {e}");
            return ExitCode::from(2);
        }
    };
    let rows = run_sweep(&spec);
    let written = match &spec.output {
        Some(path) => File::create(path)
            .map_err(csv::Error::from)
            .and_then(|f| write_csv(&rows, BufWriter::new(f))),
        None => write_csv(&rows, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("tavis: cannot write output: {e}");
        return ExitCode::from(2);
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    if failed > 0 {
        eprintln!("tavis: {failed} of {} points failed", rows.len());
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
