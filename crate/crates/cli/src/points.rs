//! Weights and points for the Jensen commands, inline or from CSV.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

/// `(weights, points)` from a two-column `weight,point` CSV. A first row that
/// does not parse as numbers is taken as a header.
pub fn read_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    from_reader(file).with_context(|| format!("in {}", path.display()))
}

pub fn from_reader<R: std::io::Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r);
    let (mut w, mut x) = (Vec::new(), Vec::new());
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("row {}: expected 2 columns, got {}", i + 1, rec.len());
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                w.push(a);
                x.push(b);
            }
            _ if i == 0 => continue,
            _ => bail!("row {}: `{}` is not numeric", i + 1, rec.as_slice()),
        }
    }
    if x.is_empty() {
        bail!("no data rows");
    }
    Ok((w, x))
}

/// `x1,x2,…` with equal weights, or `w1:x1,w2:x2,…`.
pub fn parse_inline(s: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| anyhow!("`{}` is not a number", t.trim()))
    };
    let (mut w, mut x) = (Vec::new(), Vec::new());
    for item in s.split(',') {
        match item.split_once(':') {
            Some((a, b)) => {
                w.push(num(a)?);
                x.push(num(b)?);
            }
            None => {
                w.push(1.0);
                x.push(num(item)?);
            }
        }
    }
    Ok((w, x))
}
