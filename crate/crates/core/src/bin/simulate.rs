use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use qutrit_dba::distribution::{write_party_list_jsonl, write_runs_jsonl, GeneralId};
use qutrit_dba::harness::{
    emit_report, parse_cli, run_scenario, run_trial_detailed, CliError, SimulationSpec, Timing,
};

fn export(spec: &SimulationSpec, dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(dir)?;
    let artifacts = run_trial_detailed(spec, &spec.strategy()?, 0)?;

    let mut runs = BufWriter::new(File::create(dir.join("runs.jsonl"))?);
    write_runs_jsonl(&artifacts.records, &mut runs)?;
    runs.flush()?;

    if let Some(lists) = &artifacts.lists {
        for g in GeneralId::ALL {
            let name = format!("list_{}.jsonl", format!("{g:?}").to_lowercase());
            let mut out = BufWriter::new(File::create(dir.join(name))?);
            write_party_list_jsonl(lists, g, &mut out)?;
            out.flush()?;
        }
    }
    if let Some(t) = &artifacts.transcript {
        let out = BufWriter::new(File::create(dir.join("transcript.json"))?);
        serde_json::to_writer_pretty(out, t)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let inv = match parse_cli(std::env::args_os()) {
        Ok(inv) => inv,
        Err(CliError::Display(s)) => {
            print!("{s}");
            return ExitCode::SUCCESS;
        }
        Err(CliError::Usage(s)) => {
            eprintln!("{}", s.trim_end());
            return ExitCode::from(1);
        }
    };

    let start = Instant::now();
    let mut report = match run_scenario(&inv.spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if inv.timing {
        report.timing = Some(Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }

    if let Some(dir) = &inv.export_dir {
        if let Err(e) = export(&inv.spec, dir) {
            eprintln!("error: export failed: {e}");
            return ExitCode::from(2);
        }
    }

    let mut stdout = io::stdout().lock();
    if stdout
        .write_all(emit_report(&report, inv.format).as_bytes())
        .is_err()
    {
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
