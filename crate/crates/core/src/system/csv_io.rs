//! Orbit tables: `n,y1..yd` for sequences and `t,y1..yd,yp1..ypd` for functions of time.
//! `x`/`xp` columns are accepted in place of `y`/`yp`; other columns are ignored on input.
//! Floats are written with 17 significant digits.

use std::io::{Read, Write};

use crate::{Error, Result, Samples};

/// Formats a float so that it parses back to the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn column_groups(headers: &csv::StringRecord, prefix: &str) -> Vec<usize> {
    let mut cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            let h = h.trim();
            let rest = h.strip_prefix(prefix)?;
            let k: usize = rest.parse().ok()?;
            Some((k, i))
        })
        .collect();
    cols.sort();
    cols.into_iter().map(|(_, i)| i).collect()
}

fn state_columns(headers: &csv::StringRecord, deriv: bool) -> Result<Vec<usize>> {
    let (a, b) = if deriv { ("yp", "xp") } else { ("y", "x") };
    let mut cols = column_groups(headers, a);
    if cols.is_empty() {
        cols = column_groups(headers, b);
    }
    if cols.is_empty() {
        return Err(Error::Csv(format!(
            "no `{a}1..` or `{b}1..` columns in header"
        )));
    }
    Ok(cols)
}

fn parse(rec: &csv::StringRecord, i: usize, line: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or("").trim();
    s.parse()
        .map_err(|_| Error::Csv(format!("line {line}: cannot parse `{s}` as a number")))
}

fn read_table(
    reader: impl Read,
    key: &str,
    deriv: bool,
) -> Result<(Vec<f64>, Samples, Option<Samples>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0).map(str::trim) != Some(key) {
        return Err(Error::Csv(format!("first column must be `{key}`")));
    }
    let ycols = state_columns(&headers, false)?;
    let pcols = if deriv {
        let p = state_columns(&headers, true)?;
        if p.len() != ycols.len() {
            return Err(Error::Csv(
                "derivative columns do not match state columns".into(),
            ));
        }
        Some(p)
    } else {
        None
    };
    let d = ycols.len();
    let mut keys = Vec::new();
    let mut ys = Vec::new();
    let mut ps = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        keys.push(parse(&rec, 0, line)?);
        for &c in &ycols {
            ys.push(parse(&rec, c, line)?);
        }
        if let Some(pc) = &pcols {
            for &c in pc {
                ps.push(parse(&rec, c, line)?);
            }
        }
    }
    if keys.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    let n = keys.len();
    let y = Samples::from_vec(d, n, ys);
    let p = pcols.map(|_| Samples::from_vec(d, n, ps));
    Ok((keys, y, p))
}

/// Reads a sequence table; indices must be consecutive integers.
pub fn read_discrete(reader: impl Read) -> Result<(Vec<i64>, Samples)> {
    let (keys, y, _) = read_table(reader, "n", false)?;
    let idx: Vec<i64> = keys.iter().map(|&k| k as i64).collect();
    if keys.iter().zip(&idx).any(|(&k, &i)| k != i as f64)
        || idx.windows(2).any(|w| w[1] != w[0] + 1)
    {
        return Err(Error::Csv("indices must be consecutive integers".into()));
    }
    Ok((idx, y))
}

/// Reads a function-of-time table with explicit derivative columns.
pub fn read_continuous(reader: impl Read) -> Result<(Vec<f64>, Samples, Samples)> {
    let (t, y, p) = read_table(reader, "t", true)?;
    Ok((t, y, p.expect("derivative columns requested")))
}

/// Writes `key,<prefix>1..,<prefix>1..` with one row per column of the blocks.
pub fn write_table(
    writer: impl Write,
    key: &str,
    keys: &[String],
    blocks: &[(&str, &Samples)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![key.to_string()];
    for (prefix, m) in blocks {
        if m.ncols() != keys.len() {
            return Err(Error::WindowMismatch {
                expected: keys.len(),
                got: m.ncols(),
            });
        }
        header.extend((1..=m.nrows()).map(|i| format!("{prefix}{i}")));
    }
    w.write_record(&header)?;
    for (j, k) in keys.iter().enumerate() {
        let mut row = vec![k.clone()];
        for (_, m) in blocks {
            row.extend(m.column(j).iter().map(|&v| fmt_f64(v)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn index_keys(lo: i64, len: usize) -> Vec<String> {
    (0..len as i64).map(|k| (lo + k).to_string()).collect()
}

pub fn time_keys(times: &[f64]) -> Vec<String> {
    times.iter().map(|&t| fmt_f64(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bits() {
        let y = Samples::from_fn(2, 5, |i, j| (i as f64 + 1.0) / 3.0 * (j as f64 - 2.1).exp());
        let mut buf = Vec::new();
        write_table(&mut buf, "n", &index_keys(-2, 5), &[("y", &y)]).unwrap();
        let (idx, back) = read_discrete(buf.as_slice()).unwrap();
        assert_eq!(idx, vec![-2, -1, 0, 1, 2]);
        assert_eq!(back, y);
    }

    #[test]
    fn x_columns_accepted_z_ignored() {
        let text = "n,x1,z1\n0,1.5,9\n1,2.5,9\n";
        let (_, y) = read_discrete(text.as_bytes()).unwrap();
        assert_eq!(y.as_slice(), &[1.5, 2.5]);
    }

    #[test]
    fn continuous_needs_derivatives() {
        let text = "t,y1\n0,1\n1,2\n";
        assert!(read_continuous(text.as_bytes()).is_err());
        let text = "t,y1,yp1\n0,1,0.5\n1,2,0.5\n";
        let (t, y, p) = read_continuous(text.as_bytes()).unwrap();
        assert_eq!(t, vec![0.0, 1.0]);
        assert_eq!(y[(0, 1)], 2.0);
        assert_eq!(p[(0, 0)], 0.5);
    }

    #[test]
    fn gaps_rejected() {
        assert!(read_discrete("n,y1\n0,1\n2,2\n".as_bytes()).is_err());
        assert!(read_discrete("n,y1\n0,abc\n".as_bytes()).is_err());
    }
}
