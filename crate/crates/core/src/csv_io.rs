//! CSV writers and readers. Floats are printed with 17 significant digits so every
//! value reads back to the identical double.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fundamental::FundamentalMatrix;
use crate::linalg::Vector;
use crate::solver::ComparisonReport;
use crate::system::Trajectory;

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `k,x_1,...,x_n`, one row per `k = −m … k_max`.
pub fn write_trajectory<W: Write>(mut w: W, x: &Trajectory) -> Result<()> {
    let header: Vec<String> = std::iter::once("k".to_string())
        .chain((1..=x.dim()).map(|i| format!("x_{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (k, v) in x.iter() {
        let row: Vec<String> = v.iter().map(|c| fmt_float(*c)).collect();
        writeln!(w, "{k},{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_trajectory(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty trajectory CSV".into()))?;
    let n = header.split(',').count() - 1;
    let mut ks = Vec::new();
    let mut states = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let parse_err = |what: &str| Error::Parse(format!("line {}: bad {what}", i + 2));
        let k: i64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| parse_err("k"))?;
        let values = fields
            .map(|f| f.trim().parse::<f64>().map_err(|_| parse_err("value")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(parse_err("column count"));
        }
        ks.push(k);
        states.push(Vector::from_vec(values));
    }
    let first = *ks.first().ok_or_else(|| Error::Parse("no rows".into()))?;
    if first > -1 || ks.iter().enumerate().any(|(i, k)| *k != first + i as i64) {
        return Err(Error::Parse("rows must cover consecutive k from -m".into()));
    }
    let m = (-first) as usize;
    let k_max = (first + ks.len() as i64 - 1).max(0) as usize;
    Trajectory::new(m, k_max, states)
}

/// `k,abs_err,rel_err`.
pub fn write_diff<W: Write>(mut w: W, report: &ComparisonReport) -> Result<()> {
    writeln!(w, "k,abs_err,rel_err")?;
    for s in &report.steps {
        writeln!(
            w,
            "{},{},{}",
            s.k,
            fmt_float(s.abs_err),
            fmt_float(s.rel_err)
        )?;
    }
    Ok(())
}

/// `k,row,col,value` blocks for `k = −m … k_max` (1-based row/col).
pub fn write_fundamental<W: Write>(mut w: W, phi: &FundamentalMatrix) -> Result<()> {
    writeln!(w, "k,row,col,value")?;
    for k in -(phi.delay() as i64)..=phi.k_max() as i64 {
        let value = phi.at(k);
        for (i, row) in value.row_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                writeln!(w, "{k},{},{},{}", i + 1, j + 1, fmt_float(*v))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            13.0,
        ] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(6.0), "6.0000000000000000e0");
    }

    #[test]
    fn trajectory_round_trip() {
        let states = (0..5)
            .map(|i| Vector::from_vec(vec![i as f64 / 7.0, -(i as f64).sqrt()]))
            .collect();
        let x = Trajectory::new(2, 2, states).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &x).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,x_1,x_2\n-2,"));
        assert_eq!(read_trajectory(&text).unwrap(), x);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_trajectory("").is_err());
        assert!(read_trajectory("k,x_1\n-1,1.0\n1,2.0\n").is_err());
        assert!(read_trajectory("k,x_1\n-1,abc\n").is_err());
    }
}
