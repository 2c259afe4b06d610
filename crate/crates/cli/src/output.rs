use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use serde_json::{json, Map, Value};

use hypctrl::{Error, GridField, Signal};

/// Result of a run: artifacts plus the outcome of its acceptance check.
pub struct Outcome {
    pub field: Option<GridField>,
    /// Columns after `t`, all sampled on the same grid.
    pub controls: Option<(Vec<String>, Vec<Signal>)>,
    pub report: Map<String, Value>,
    pub check_passed: bool,
}

impl Outcome {
    pub fn new(report: Map<String, Value>, check_passed: bool) -> Self {
        Self {
            field: None,
            controls: None,
            report,
            check_passed,
        }
    }
}

pub fn controls_csv(names: &[String], signals: &[Signal]) -> String {
    let mut out = String::from("t");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    let samples = signals.iter().map(Signal::len).max().unwrap_or(0);
    let horizon = signals.first().map(Signal::horizon).unwrap_or(0.0);
    for k in 0..samples {
        let t = horizon * k as f64 / (samples - 1) as f64;
        out.push_str(&format!("{t:.16e}"));
        for s in signals {
            out.push_str(&format!(",{:.16e}", s.eval(t)));
        }
        out.push('\n');
    }
    out
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> std::io::Result<()> {
    let mut f = fs::File::create(dir.join(name))?;
    f.write_all(contents)
}

/// Write artifacts and map the outcome to an exit code: 0 success, 2 invalid
/// input, 3 solver failure, 4 failed check.
pub fn finish(dir: &Path, command: &str, outcome: Result<Outcome, Error>, check: bool) -> ExitCode {
    if let Err(e) = fs::create_dir_all(dir) {
        eprintln!("cannot create {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let (mut report, code) = match outcome {
        Ok(o) => {
            let mut report = o.report;
            let written = (|| -> std::io::Result<()> {
                if let Some(f) = &o.field {
                    write(dir, "field.csv", f.to_csv_string().as_bytes())?;
                }
                if let Some((names, signals)) = &o.controls {
                    write(dir, "controls.csv", controls_csv(names, signals).as_bytes())?;
                }
                Ok(())
            })();
            if let Err(e) = written {
                eprintln!("cannot write artifacts: {e}");
                return ExitCode::from(2);
            }
            report.insert("error".into(), Value::Null);
            report.insert("check".into(), json!(if check { Some(o.check_passed) } else { None }));
            let code = if check && !o.check_passed { 4 } else { 0 };
            (report, code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut report = Map::new();
            report.insert("error".into(), json!(e.name()));
            report.insert("message".into(), json!(e.to_string()));
            if let Error::TimeTooShort { t, t_star } = e {
                report.insert("T".into(), json!(t));
                report.insert("T_star".into(), json!(t_star));
            }
            (report, if e.is_validation() { 2 } else { 3 })
        }
    };
    report.insert("command".into(), json!(command));
    let text = serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
    if let Err(e) = write(dir, "report.json", text.as_bytes()) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
