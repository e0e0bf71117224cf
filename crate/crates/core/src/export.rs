//! Text renderings of grids and tables: CSV (header row, LF), JSON, plain PGM,
//! and a rounded human-readable table. Machine formats print the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::acf::AcfGrid;
use crate::error::{Error, Result};
use crate::ma::PsiTable;
use crate::sim::{FieldGrid, Provenance, SimMetadata};

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_owned).unwrap_or(s)
}

/// Six significant digits for people.
pub fn num6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.*e}", 5, x);
    let v: f64 = s.parse().expect("formatted float parses");
    num(v)
}

pub fn acf_csv(g: &AcfGrid) -> String {
    let mut out = String::from("h1,h2,gamma\n");
    for (h1, h2, v) in g.iter() {
        let _ = writeln!(out, "{h1},{h2},{}", num(v));
    }
    out
}

/// CSV with the quadrature value and absolute difference per lag.
pub fn acf_csv_with_oracle(g: &AcfGrid, oracle: &AcfGrid) -> String {
    let mut out = String::from("h1,h2,gamma,quadrature,abs_diff\n");
    for ((h1, h2, v), (_, _, q)) in g.iter().zip(oracle.iter()) {
        let _ = writeln!(
            out,
            "{h1},{h2},{},{},{}",
            num(v),
            num(q),
            num((v - q).abs())
        );
    }
    out
}

pub fn acf_json(g: &AcfGrid) -> Value {
    json!({
        "h1_min": g.h1_min,
        "h1_max": g.h1_max,
        "h2_min": g.h2_min,
        "h2_max": g.h2_max,
        "values": g.values(),
    })
}

pub fn acf_json_with_oracle(g: &AcfGrid, oracle: &AcfGrid) -> Value {
    let mut v = acf_json(g);
    let diff: Vec<f64> = g
        .values()
        .iter()
        .zip(oracle.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    v["quadrature"] = json!(oracle.values());
    v["abs_diff"] = json!(diff);
    v["max_abs_diff"] = json!(diff.iter().fold(0.0_f64, |m, d| m.max(*d)));
    v
}

/// Rows are `h2` from top (largest) to bottom, columns are `h1`.
pub fn acf_table(g: &AcfGrid) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>6}", "h2\\h1");
    for h1 in g.h1_min..=g.h1_max {
        let _ = write!(out, " {h1:>12}");
    }
    out.push('\n');
    for h2 in (g.h2_min..=g.h2_max).rev() {
        let _ = write!(out, "{h2:>6}");
        for h1 in g.h1_min..=g.h1_max {
            let _ = write!(out, " {:>12}", num6(g.get(h1, h2).unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("line {line}: '{}' is not a number", s.trim())))
}

fn parse_i64(s: &str, line: usize) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| Error::Input(format!("line {line}: '{}' is not an integer", s.trim())))
}

/// Leading three columns of a CSV whose header starts with `names`
/// (further columns are ignored), with 1-based line numbers.
fn triples(text: &str, names: [&str; 3]) -> Result<Vec<(String, String, String, usize)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Input(format!("bad CSV header: {e}")))?
        .clone();
    if header.len() < 3 || header.iter().take(3).ne(names) {
        return Err(Error::Input(format!(
            "expected header '{}', found '{}'",
            names.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Input(format!("bad CSV row: {e}")))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() < 3 {
                return Err(Error::Input(format!("line {line}: expected 3 columns")));
            }
            Ok((
                rec[0].to_owned(),
                rec[1].to_owned(),
                rec[2].to_owned(),
                line,
            ))
        })
        .collect()
}

/// Parses `h1,h2,gamma` CSV (extra columns ignored). The lags must cover a
/// full rectangle exactly once.
pub fn parse_acf_csv(text: &str) -> Result<AcfGrid> {
    let rows = triples(text, ["h1", "h2", "gamma"])?;
    let mut entries = Vec::with_capacity(rows.len());
    for (h1, h2, v, n) in rows {
        entries.push((parse_i64(&h1, n)?, parse_i64(&h2, n)?, parse_f64(&v, n)?));
    }
    rectangle(entries).and_then(|(b, vals)| AcfGrid::from_values(b.0, b.1, b.2, b.3, vals))
}

type Bounds = (i64, i64, i64, i64);

fn rectangle(entries: Vec<(i64, i64, f64)>) -> Result<(Bounds, Vec<f64>)> {
    if entries.is_empty() {
        return Err(Error::Input("no data rows".into()));
    }
    let lo1 = entries.iter().map(|e| e.0).min().unwrap();
    let hi1 = entries.iter().map(|e| e.0).max().unwrap();
    let lo2 = entries.iter().map(|e| e.1).min().unwrap();
    let hi2 = entries.iter().map(|e| e.1).max().unwrap();
    let (n1, n2) = ((hi1 - lo1 + 1) as u64, (hi2 - lo2 + 1) as u64);
    if n1 * n2 != entries.len() as u64 {
        return Err(Error::Input(format!(
            "{} entries do not fill the {n1} x {n2} rectangle they span",
            entries.len()
        )));
    }
    let mut vals: Vec<Option<f64>> = vec![None; (n1 * n2) as usize];
    for (a, b, v) in entries {
        let k = ((a - lo1) as u64 * n2 + (b - lo2) as u64) as usize;
        if vals[k].replace(v).is_some() {
            return Err(Error::Input(format!("duplicate entry ({a}, {b})")));
        }
    }
    // the count matches and nothing repeats, so every cell is filled
    Ok(((lo1, hi1, lo2, hi2), vals.into_iter().flatten().collect()))
}

pub fn parse_acf_json(v: &Value) -> Result<AcfGrid> {
    let int = |k: &str| {
        v.get(k)
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Input(format!("missing integer field '{k}'")))
    };
    let values = float_array(v.get("values"))?;
    AcfGrid::from_values(
        int("h1_min")?,
        int("h1_max")?,
        int("h2_min")?,
        int("h2_max")?,
        values,
    )
}

fn float_array(v: Option<&Value>) -> Result<Vec<f64>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::Input("missing array field 'values'".into()))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Input(format!("'{x}' is not a number")))
        })
        .collect()
}

pub fn psi_csv(t: &PsiTable) -> String {
    let mut out = String::from("k,l,psi\n");
    for (k, l, v) in t.iter() {
        let _ = writeln!(out, "{k},{l},{}", num(v));
    }
    out
}

pub fn psi_json(t: &PsiTable) -> Value {
    json!({
        "kmax": t.kmax,
        "lmax": t.lmax,
        "values": t.values(),
        "tail_bound_estimated": t.tail_bound,
    })
}

pub fn psi_table_text(t: &PsiTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>6}", "k\\l");
    for l in 0..=t.lmax {
        let _ = write!(out, " {l:>12}");
    }
    out.push('\n');
    for k in 0..=t.kmax {
        let _ = write!(out, "{k:>6}");
        for l in 0..=t.lmax {
            let _ = write!(out, " {:>12}", num6(t.get(k as i64, l as i64)));
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "estimated tail mass outside table: {}",
        num6(t.tail_bound)
    );
    out
}

pub fn field_metadata(meta: Option<&SimMetadata>, g: &FieldGrid) -> Value {
    let (lo, hi) = g.min_max();
    let mut v = match meta {
        Some(m) => json!({
            "params": m.params,
            "seed": m.seed,
            "method": m.method,
            "noise": m.noise,
            "truncation": { "tol": m.tol, "order": m.truncation },
            "flip": m.flip,
            "rng": m.rng,
        }),
        None => json!({ "provenance": g.provenance }),
    };
    v["n_rows"] = json!(g.n_rows);
    v["n_cols"] = json!(g.n_cols);
    v["min"] = json!(lo);
    v["max"] = json!(hi);
    v
}

pub fn field_csv(g: &FieldGrid) -> String {
    let mut out = String::from("i,j,x\n");
    for (i, j, v) in g.iter() {
        let _ = writeln!(out, "{i},{j},{}", num(v));
    }
    out
}

pub fn field_json(g: &FieldGrid, meta: Option<&SimMetadata>) -> Value {
    json!({
        "n_rows": g.n_rows,
        "n_cols": g.n_cols,
        "values": g.values(),
        "metadata": field_metadata(meta, g),
    })
}

/// Plain PGM (P2, maxval 255). Values are mapped affinely from `[min, max]`
/// to `0..=255`; a comment line carries the metadata as JSON.
pub fn field_pgm(g: &FieldGrid, meta: Option<&SimMetadata>) -> String {
    let (lo, hi) = g.min_max();
    let span = hi - lo;
    let mut out = String::from("P2\n");
    let _ = writeln!(out, "# {}", field_metadata(meta, g));
    let _ = writeln!(out, "{} {}\n255", g.n_cols, g.n_rows);
    for i in 0..g.n_rows {
        let mut line = String::new();
        for j in 0..g.n_cols {
            let v = g.get(i, j);
            let level = if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u8
            } else {
                0
            };
            let token = level.to_string();
            if !line.is_empty() && line.len() + 1 + token.len() > 70 {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&token);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parses `i,j,x` CSV covering a full rectangle starting at `(0, 0)`.
pub fn parse_field_csv(text: &str) -> Result<FieldGrid> {
    let rows = triples(text, ["i", "j", "x"])?;
    let mut entries = Vec::with_capacity(rows.len());
    for (i, j, v, n) in rows {
        let (i, j) = (parse_i64(&i, n)?, parse_i64(&j, n)?);
        if i < 0 || j < 0 {
            return Err(Error::Input(format!("line {n}: negative cell index")));
        }
        entries.push((i, j, parse_f64(&v, n)?));
    }
    let ((lo1, hi1, lo2, hi2), vals) = rectangle(entries)?;
    if lo1 != 0 || lo2 != 0 {
        return Err(Error::Input("field indices must start at (0, 0)".into()));
    }
    FieldGrid::from_values(
        hi1 as usize + 1,
        hi2 as usize + 1,
        vals,
        Provenance::Deterministic,
        None,
    )
}

pub fn parse_field_json(v: &Value) -> Result<FieldGrid> {
    let dim = |k: &str| {
        v.get(k)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| Error::Input(format!("missing integer field '{k}'")))
    };
    let seed = v.pointer("/metadata/seed").and_then(Value::as_u64);
    FieldGrid::from_values(
        dim("n_rows")?,
        dim("n_cols")?,
        float_array(v.get("values"))?,
        Provenance::Deterministic,
        seed,
    )
}

pub fn spectrum_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("nu1,nu2,density\n");
    for &(x, y, d) in rows {
        let _ = writeln!(out, "{},{},{}", num(x), num(y), num(d));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acf::acf_grid;
    use crate::params::ParamSet;
    use proptest::prelude::*;

    #[test]
    fn number_formatting() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.015), "-0.015");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num6(0.1234567), "0.123457");
        assert_eq!(num6(0.0), "0");
    }

    proptest! {
        #[test]
        fn num_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn acf_csv_round_trip() {
        let p = ParamSet::new(-0.1, 0.5, 0.2, 0.72).unwrap();
        let g = acf_grid(&p, -2, 3, -3, 3).unwrap();
        let text = acf_csv(&g);
        assert!(text.starts_with("h1,h2,gamma\n"));
        assert_eq!(parse_acf_csv(&text).unwrap(), g);
        assert_eq!(parse_acf_json(&acf_json(&g)).unwrap(), g);
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(parse_acf_csv("h1,h2,gamma\n0,0,1\n0,1,0.5\n1,0,0.1\n").is_err());
        assert!(parse_acf_csv("a,b,c\n0,0,1\n").is_err());
        assert!(parse_acf_csv("h1,h2,gamma\n0,0,x\n").is_err());
        assert!(parse_field_csv("i,j,x\n0,0,1\n0,1,2\n1,0,3\n").is_err());
        assert!(parse_field_csv("i,j,x\n0,0,1\n0,0,2\n").is_err());
    }

    #[test]
    fn field_formats() {
        let g = FieldGrid::from_values(
            2,
            3,
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            Provenance::Deterministic,
            None,
        )
        .unwrap();
        assert_eq!(
            parse_field_csv(&field_csv(&g)).unwrap().values(),
            g.values()
        );
        assert_eq!(
            parse_field_json(&field_json(&g, None)).unwrap().values(),
            g.values()
        );
        let pgm = field_pgm(&g, None);
        let lines: Vec<&str> = pgm.lines().collect();
        assert_eq!(lines[0], "P2");
        assert!(lines[1].starts_with("# {"));
        assert_eq!(lines[2], "3 2");
        assert_eq!(lines[3], "255");
        assert_eq!(lines[4], "0 51 102");
        assert_eq!(lines[5], "153 204 255");
        let meta: Value = serde_json::from_str(&lines[1][2..]).unwrap();
        assert_eq!(meta["max"], json!(5.0));
    }

    #[test]
    fn pgm_lines_stay_short() {
        let g = FieldGrid::from_values(
            1,
            100,
            (0..100).map(f64::from).collect(),
            Provenance::Deterministic,
            None,
        )
        .unwrap();
        assert!(field_pgm(&g, None).lines().skip(2).all(|l| l.len() <= 70));
    }
}
