//! Trajectory files.
//!
//! CSV: header `t,x1,x2,x3` followed by one column per monitor, LF line
//! endings, every value written with 17 significant digits so that reading a
//! file back reproduces the states bit for bit. JSON: an object with `meta`
//! (the scenario echo) and `data` (column arrays).

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::dynamics::{MonitorSeries, Trajectory};
use crate::error::{Error, Result};
use crate::state::StateVec;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 100);
    out.push_str("t,x1,x2,x3");
    for m in &traj.monitors {
        out.push(',');
        out.push_str(&m.name);
    }
    out.push('\n');
    for (k, x) in traj.states.iter().enumerate() {
        let _ = write!(out, "{},{},{},{}", fmt_f64(traj.time(k)), fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]));
        for m in &traj.monitors {
            out.push(',');
            out.push_str(&fmt_f64(m.values[k]));
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_json(traj: &Trajectory, meta: Value) -> Value {
    let mut data = Map::new();
    data.insert("t".into(), json!((0..traj.len()).map(|k| traj.time(k)).collect::<Vec<_>>()));
    for (i, name) in ["x1", "x2", "x3"].iter().enumerate() {
        data.insert((*name).into(), json!(traj.states.iter().map(|x| x[i]).collect::<Vec<_>>()));
    }
    for m in &traj.monitors {
        data.insert(m.name.clone(), json!(m.values));
    }
    json!({ "meta": meta, "data": Value::Object(data) })
}

pub fn write_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj))?;
    Ok(())
}

pub fn write_json(traj: &Trajectory, meta: Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&trajectory_json(traj, meta))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Columns of a trajectory file: times, states and named monitor series.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    pub monitors: Vec<MonitorSeries>,
}

impl TrajectoryTable {
    /// Rebuilds a fixed-step trajectory; the step is taken from the first two times.
    pub fn into_trajectory(self) -> Result<Trajectory> {
        let t0 = self.times.first().copied().unwrap_or(0.0);
        let dt = match self.times.get(1) {
            Some(t1) => t1 - t0,
            None => 1.0,
        };
        Trajectory::new(t0, dt, self.states, self.monitors)
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_csv(text: &str, path: &Path) -> Result<TrajectoryTable> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(parse_error(path, 1, "empty file"));
    };
    let cols: Vec<&str> = header.trim_end_matches('\r').split(',').map(str::trim).collect();
    if cols.len() < 4 || cols[..4] != ["t", "x1", "x2", "x3"] {
        return Err(parse_error(path, 1, format!("header must start with `t,x1,x2,x3`, found `{header}`")));
    }
    let mut monitors: Vec<MonitorSeries> = cols[4..]
        .iter()
        .map(|n| MonitorSeries {
            name: (*n).to_string(),
            values: Vec::new(),
        })
        .collect();
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(parse_error(
                path,
                line_no,
                format!("expected {} columns, found {}", cols.len(), fields.len()),
            ));
        }
        let mut vals = Vec::with_capacity(fields.len());
        for (c, f) in fields.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| parse_error(path, line_no, format!("column `{}`: not a number: `{f}`", cols[c])))?;
            vals.push(v);
        }
        times.push(vals[0]);
        states.push(StateVec::new(vals[1], vals[2], vals[3]));
        for (m, v) in monitors.iter_mut().zip(&vals[4..]) {
            m.values.push(*v);
        }
    }
    if states.is_empty() {
        return Err(parse_error(path, 2, "no data rows"));
    }
    Ok(TrajectoryTable { times, states, monitors })
}

pub fn parse_json(text: &str, path: &Path) -> Result<TrajectoryTable> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_error(path, e.line(), e.to_string()))?;
    let data = v
        .get("data")
        .and_then(Value::as_object)
        .ok_or_else(|| parse_error(path, 1, "missing `data` object"))?;
    let column = |name: &str| -> Result<Vec<f64>> {
        data.get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| parse_error(path, 1, format!("missing column `{name}`")))?
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| parse_error(path, 1, format!("non-numeric entry in `{name}`"))))
            .collect()
    };
    let times = column("t")?;
    let (x1, x2, x3) = (column("x1")?, column("x2")?, column("x3")?);
    if [x1.len(), x2.len(), x3.len()].iter().any(|&n| n != times.len()) || times.is_empty() {
        return Err(parse_error(path, 1, "columns are empty or of unequal length"));
    }
    let states = (0..times.len()).map(|k| StateVec::new(x1[k], x2[k], x3[k])).collect();
    let mut monitors = Vec::new();
    for name in data.keys() {
        if !["t", "x1", "x2", "x3"].contains(&name.as_str()) {
            monitors.push(MonitorSeries {
                name: name.clone(),
                values: column(name)?,
            });
        }
    }
    Ok(TrajectoryTable { times, states, monitors })
}

/// Reads a CSV or JSON trajectory, choosing by content.
pub fn read_trajectory(path: &Path) -> Result<TrajectoryTable> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_error(path, 0, format!("cannot read file: {e}")))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text, path)
    } else {
        parse_csv(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_rk4, Rabinovich};
    use crate::poisson::{c1, h1};

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let traj = integrate_rk4(&Rabinovich, StateVec::new(1.0, 2.0, 3.0), 1e-3, 500, &[h1(), c1()]).unwrap();
        let text = trajectory_csv(&traj);
        assert!(text.starts_with("t,x1,x2,x3,h1,c1\n"));
        assert!(!text.contains('\r'));
        let back = parse_csv(&text, Path::new("mem.csv")).unwrap();
        assert_eq!(back.states, traj.states);
        assert_eq!(back.monitors, traj.monitors);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn json_round_trip() {
        let traj = integrate_rk4(&Rabinovich, StateVec::new(0.1, 0.2, 0.3), 1e-2, 20, &[h1()]).unwrap();
        let text = serde_json::to_string(&trajectory_json(&traj, json!({"system": "classical"}))).unwrap();
        let back = parse_json(&text, Path::new("mem.json")).unwrap();
        assert_eq!(back.states, traj.states);
        assert_eq!(back.monitors[0].values, traj.monitors[0].values);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let p = Path::new("bad.csv");
        let text = "t,x1,x2,x3\n0,1,2,3\n0.1,1,2\n";
        match parse_csv(text, p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv("t,x1,x2,x3\n0,1,oops,3\n", p) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("x2"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("a,b\n", p), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_trajectory(Path::new("/nonexistent/traj.csv")), Err(Error::Parse { .. })));
    }
}
