//! CSV persistence for ensemble results and raw trajectories.
//!
//! Floats are written in Rust's shortest round-trip form, so re-reading a file
//! reproduces the in-memory values bit for bit.

use std::io::{Read, Write};

use qmem_core::dynamics::TrajectoryRecord;
use qmem_core::EnsembleResult;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("file has no rows")]
    Empty,
}

/// Fidelity ensemble plus one windowed ensemble per `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleTable {
    pub fidelity: EnsembleResult,
    pub windowed: Vec<(f64, EnsembleResult)>,
}

fn num(v: f64) -> String {
    v.to_string()
}

fn parse_num(row: usize, s: &str) -> Result<f64, CsvError> {
    s.parse().map_err(|e| CsvError::Row {
        row,
        reason: format!("`{s}`: {e}"),
    })
}

pub fn header(taus: &[f64]) -> Vec<String> {
    let mut h = vec!["t".to_string(), "F_mean".to_string(), "F_se".to_string()];
    for tau in taus {
        h.push(format!("Fstar_{tau}_mean"));
        h.push(format!("Fstar_{tau}_se"));
    }
    h
}

/// `t,F_mean,F_se[,Fstar_<tau>_mean,Fstar_<tau>_se]...`; windowed columns hold
/// `NaN` where the window would run past the horizon.
pub fn write_ensemble_csv<W: Write>(out: W, table: &EnsembleTable) -> Result<(), CsvError> {
    let taus: Vec<f64> = table.windowed.iter().map(|(t, _)| *t).collect();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(&taus))?;
    let f = &table.fidelity;
    for (i, t) in f.time_grid.iter().enumerate() {
        let mut row = vec![num(*t), num(f.mean[i]), num(f.std_error[i])];
        for (_, r) in &table.windowed {
            let (m, e) = if i < r.mean.len() {
                (r.mean[i], r.std_error[i])
            } else {
                (f64::NAN, f64::NAN)
            };
            row.push(num(m));
            row.push(num(e));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Inverse of [`write_ensemble_csv`]; `n_trajectories` and `seed` are not in the file.
pub fn read_ensemble_csv<R: Read>(input: R, n_trajectories: usize, seed: u64) -> Result<EnsembleTable, CsvError> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let head: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if head.len() < 3 || head.len() % 2 == 0 || head[..3] != ["t", "F_mean", "F_se"] {
        return Err(CsvError::Header(head.join(",")));
    }
    let mut taus = Vec::new();
    for pair in head[3..].chunks(2) {
        let tau = pair[0]
            .strip_prefix("Fstar_")
            .and_then(|s| s.strip_suffix("_mean"))
            .ok_or_else(|| CsvError::Header(pair[0].clone()))?;
        if pair[1] != format!("Fstar_{tau}_se") {
            return Err(CsvError::Header(pair[1].clone()));
        }
        taus.push(parse_num(0, tau)?);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        rows.push(rec.iter().map(|s| parse_num(i + 1, s)).collect::<Result<_, _>>()?);
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    let column = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let time_grid = column(0);
    let result = |mean: Vec<f64>, se: Vec<f64>| {
        let len = mean.iter().position(|m| m.is_nan()).unwrap_or(mean.len());
        EnsembleResult {
            time_grid: time_grid[..len].to_vec(),
            mean: mean[..len].to_vec(),
            std_error: se[..len].to_vec(),
            n_trajectories,
            seed,
        }
    };
    Ok(EnsembleTable {
        fidelity: result(column(1), column(2)),
        windowed: taus
            .iter()
            .enumerate()
            .map(|(k, &tau)| (tau, result(column(3 + 2 * k), column(4 + 2 * k))))
            .collect(),
    })
}

/// `t,traj_0,traj_1,...`: one column per trajectory for metric `metric`.
pub fn write_trajectory_csv<W: Write>(out: W, records: &[TrajectoryRecord], metric: usize) -> Result<(), CsvError> {
    let first = records.first().ok_or(CsvError::Empty)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut head = vec!["t".to_string()];
    head.extend((0..records.len()).map(|i| format!("traj_{i}")));
    w.write_record(&head)?;
    for (k, t) in first.time_grid.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(records.iter().map(|r| num(r.fidelity[metric][k])));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Records holding a single fidelity series each; jump lists are not stored.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRecord>, CsvError> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let head = r.headers()?.clone();
    if head.len() < 2 || &head[0] != "t" {
        return Err(CsvError::Header(head.iter().collect::<Vec<_>>().join(",")));
    }
    let n = head.len() - 1;
    let mut grid = Vec::new();
    let mut series = vec![Vec::new(); n];
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        grid.push(parse_num(i + 1, &rec[0])?);
        for (j, s) in series.iter_mut().enumerate() {
            s.push(parse_num(i + 1, &rec[j + 1])?);
        }
    }
    if grid.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(series
        .into_iter()
        .map(|s| TrajectoryRecord {
            time_grid: grid.clone(),
            fidelity: vec![s],
            jumps: Vec::new(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(mean: Vec<f64>, se: Vec<f64>) -> EnsembleResult {
        EnsembleResult {
            time_grid: (0..mean.len()).map(|k| k as f64 * 0.1).collect(),
            mean,
            std_error: se,
            n_trajectories: 4,
            seed: 9,
        }
    }

    #[test]
    fn ensemble_round_trip() {
        let table = EnsembleTable {
            fidelity: result(vec![1.0, 0.9, 1.0 / 3.0], vec![0.0, 0.01, 0.1 / 7.0]),
            windowed: vec![(0.1, result(vec![1.0, 0.95], vec![0.0, 2e-17]))],
        };
        let mut buf = Vec::new();
        write_ensemble_csv(&mut buf, &table).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,F_mean,F_se,Fstar_0.1_mean,Fstar_0.1_se\n"));
        assert!(text.ends_with(",NaN,NaN\n"));
        assert_eq!(read_ensemble_csv(&buf[..], 4, 9).unwrap(), table);
    }

    #[test]
    fn trajectory_round_trip() {
        let records: Vec<TrajectoryRecord> = [vec![1.0, 0.5], vec![1.0, 0.25]]
            .into_iter()
            .map(|s| TrajectoryRecord {
                time_grid: vec![0.0, 0.5],
                fidelity: vec![s],
                jumps: Vec::new(),
            })
            .collect();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &records, 0).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,traj_0,traj_1\n0,1,1\n0.5,0.5,0.25\n");
        assert_eq!(read_trajectory_csv(&buf[..]).unwrap(), records);
    }

    #[test]
    fn bad_header() {
        assert!(matches!(
            read_ensemble_csv("t,F\n0,1\n".as_bytes(), 1, 0),
            Err(CsvError::Header(_))
        ));
    }
}
