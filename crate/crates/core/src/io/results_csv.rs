//! Sweep results as CSV, one row per run in combination order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{RunStatus, SweepRecord};

pub const RESULTS_HEADER: [&str; 13] = [
    "method",
    "gamma",
    "mu",
    "alpha",
    "lambda",
    "seed",
    "outer_iters",
    "l2_error",
    "ssim",
    "data_residual",
    "J_final",
    "wall_ms",
    "status",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_results_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.index);
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(RESULTS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in sorted {
        w.write_record([
            r.method.as_str().to_string(),
            float(r.gamma),
            float(r.mu),
            float(r.alpha),
            float(r.lambda),
            r.seed.to_string(),
            r.outer_iters.to_string(),
            float(r.l2_error),
            float(r.ssim),
            float(r.data_residual),
            float(r.j_final),
            float(r.wall_ms),
            r.status.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a results file; `index` is the row position.
pub fn read_results_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::Invalid(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (index, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let bad = |col: &str| {
            Error::Invalid(format!("{}: row {}: bad {col}", path.display(), index + 1))
        };
        let f = |i: usize| row[i].parse::<f64>().map_err(|_| bad(RESULTS_HEADER[i]));
        let status = match &row[12] {
            "ok" => RunStatus::Ok,
            s => RunStatus::Failed(
                s.strip_prefix("failed: ")
                    .ok_or_else(|| bad("status"))?
                    .to_string(),
            ),
        };
        out.push(SweepRecord {
            index,
            method: row[0].parse()?,
            gamma: f(1)?,
            mu: f(2)?,
            alpha: f(3)?,
            lambda: f(4)?,
            seed: row[5].parse().map_err(|_| bad("seed"))?,
            outer_iters: row[6].parse().map_err(|_| bad("outer_iters"))?,
            l2_error: f(7)?,
            ssim: f(8)?,
            data_residual: f(9)?,
            j_final: f(10)?,
            wall_ms: f(11)?,
            status,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Method;
    use proptest::prelude::*;

    fn record(index: usize, x: f64) -> SweepRecord {
        SweepRecord {
            index,
            method: Method::ALL[index % 4],
            gamma: 0.25,
            mu: 1.0,
            alpha: 1.52587890625e-5,
            lambda: x,
            seed: 7,
            outer_iters: 100,
            l2_error: x.sqrt(),
            ssim: 1.0 / 3.0,
            data_residual: 0.1,
            j_final: x * 3.0,
            wall_ms: 12.5,
            status: RunStatus::Ok,
        }
    }

    #[test]
    fn header_only_and_single_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", RESULTS_HEADER.join(",")));
        assert!(read_results_csv(&path).unwrap().is_empty());

        write_results_csv(&[record(0, 0.5)], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    }

    #[test]
    fn rows_follow_combination_order_and_failures_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut failed = record(0, 0.5);
        failed.status = RunStatus::Failed("degenerate row 3, with comma".into());
        failed.l2_error = f64::NAN;
        let recs = vec![record(1, 0.25), failed];
        write_results_csv(&recs, &path).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back[0].status, recs[1].status);
        assert!(back[0].l2_error.is_nan());
        assert_eq!(back[1], recs[0]);
    }

    #[test]
    fn wrong_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_results_csv(&path).is_err());
    }

    proptest! {
        #[test]
        fn floats_roundtrip_exactly(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let recs: Vec<SweepRecord> = xs.iter().enumerate().map(|(i, &x)| {
                let mut r = record(i, x.abs());
                r.j_final = x;
                r
            }).collect();
            write_results_csv(&recs, &path).unwrap();
            let back = read_results_csv(&path).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (a, b) in back.iter().zip(&recs) {
                prop_assert_eq!(a.j_final.to_bits(), b.j_final.to_bits());
                prop_assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
                prop_assert_eq!(a.l2_error.to_bits(), b.l2_error.to_bits());
            }
        }
    }
}
