use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{sidecar_path, RunManifest};
use crate::dynamics::Trajectory;
use crate::Result;

/// Shortest representation that parses back to the same `f64`;
/// `nan`, `inf` and `-inf` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

/// Header `t, u<i>.<label>…, H_q, phi, L_q, theta, gap`, one row per sample.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(traj.path_names.iter().cloned());
    header.extend(["H_q", "phi", "L_q", "theta", "gap"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for k in 0..traj.times.len() {
        let d = &traj.diagnostics[k];
        let mut row = vec![format_float(traj.times[k])];
        row.extend(traj.flows[k].iter().map(|&v| format_float(v)));
        row.extend([d.entropy, d.potential, d.adjoint, d.theta, d.gap].map(format_float));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the CSV to `path` and, when given, the manifest next to it
/// (see [`sidecar_path`]) with the trajectory metadata attached.
pub fn write_trajectory(
    traj: &Trajectory,
    path: impl AsRef<Path>,
    manifest: Option<&RunManifest>,
) -> Result<()> {
    let path = path.as_ref();
    write_trajectory_csv(traj, BufWriter::new(File::create(path)?))?;
    if let Some(m) = manifest {
        let mut m = m.clone();
        let mut details = serde_json::to_value(&traj.meta)?;
        details["status"] = serde_json::to_value(&traj.status)?;
        m.details = details;
        m.write(sidecar_path(path))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for v in [0.0, 1.0, 2.0, 0.1, 1.0 / 3.0, 1e-300, -7.25e10, f64::MAX] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(2.0), "2.0");
    }
}
