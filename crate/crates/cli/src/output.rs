//! CSV and JSON emission with deterministic formatting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use loewner_ito::loewner_flow::Trajectory;

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes trajectories as `path_id,t,re,im,exited`, one row per recorded
/// state; `exited` is true only on the last row of a trajectory that
/// stopped at the boundary.
pub fn write_trajectories(path: &Path, rows: &[(usize, Trajectory)]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Runtime(format!("write {}: {e}", path.display()));
    writeln!(writer, "path_id,t,re,im,exited").map_err(io_err)?;
    for (path_id, trajectory) in rows {
        let last = trajectory.states().len() - 1;
        for (j, (t, state)) in trajectory.iter().enumerate() {
            let exited = trajectory.exit().is_some() && j == last;
            writeln!(
                writer,
                "{},{},{},{},{}",
                path_id,
                fmt_f64(t),
                fmt_f64(state.re),
                fmt_f64(state.im),
                exited
            )
            .map_err(io_err)?;
        }
    }
    writer.flush().map_err(io_err)
}

/// Report envelope: every JSON artifact carries the command name, the seed
/// and the fully resolved config for provenance.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a Value,
    report: T,
}

pub fn write_report<T: Serialize>(
    path: &Path,
    command: &str,
    seed: u64,
    config: &Value,
    report: T,
) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    let mut writer = BufWriter::new(file);
    let envelope = Envelope {
        command,
        seed,
        config,
        report,
    };
    serde_json::to_writer_pretty(&mut writer, &envelope)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    writer
        .write_all(b"\n")
        .and_then(|()| writer.flush())
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}
