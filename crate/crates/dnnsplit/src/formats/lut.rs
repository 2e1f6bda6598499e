use std::fmt::Write;

use dnnsplit_core::AccuracyLut;

use super::{field, lines, ParseError};

fn accuracy(raw: &str, line: usize, column: usize) -> Result<f64, ParseError> {
    let x: f64 = field(raw, line, column, "an accuracy")?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(ParseError::Field { line, column, message: format!("accuracy {x} outside [0, 1]") })
    }
}

pub fn parse_lut(text: &str) -> Result<AccuracyLut, ParseError> {
    let mut it = lines(text).peekable();
    let (_, header) =
        it.next().ok_or_else(|| ParseError::Header { expected: "snr_db,<g1>,...".into(), found: String::new() })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols[0].trim() != "snr_db" || cols.len() < 2 {
        return Err(ParseError::Header { expected: "snr_db,<g1>,...".into(), found: header.into() });
    }
    let snr_db = cols[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| field::<f64>(c, 1, i + 2, "an SNR in dB"))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, w) in snr_db.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(ParseError::Field {
                line: 1,
                column: i + 3,
                message: "SNR grid must be strictly increasing".into(),
            });
        }
    }

    let mut rows = Vec::new();
    let mut noiseless = None;
    for (line, row) in it {
        let cols: Vec<&str> = row.split(',').collect();
        if cols[0].trim() == "noiseless" {
            if cols.len() != 2 {
                return Err(ParseError::Line { line, message: "expected `noiseless,<value>`".into() });
            }
            noiseless = Some((line, accuracy(cols[1], line, 2)?));
            continue;
        }
        if let Some((at, _)) = noiseless {
            return Err(ParseError::Line { line, message: format!("rows after the `noiseless` line ({at})") });
        }
        let k: usize = field(cols[0], line, 1, "a splitting point index")?;
        if k != rows.len() {
            return Err(ParseError::Field {
                line,
                column: 1,
                message: format!("splitting points must count up from 0; expected {}, found {k}", rows.len()),
            });
        }
        if cols.len() != snr_db.len() + 1 {
            return Err(ParseError::Line {
                line,
                message: format!("expected {} accuracies, found {}", snr_db.len(), cols.len() - 1),
            });
        }
        let vals =
            cols[1..].iter().enumerate().map(|(i, c)| accuracy(c, line, i + 2)).collect::<Result<Vec<_>, _>>()?;
        rows.push(vals);
    }
    let (_, noiseless) = noiseless.ok_or(ParseError::Line {
        line: text.lines().count(),
        message: "missing final `noiseless,<value>` line".into(),
    })?;
    Ok(AccuracyLut::from_db(snr_db, rows, noiseless)?)
}

pub fn write_lut(lut: &AccuracyLut) -> String {
    let mut out = String::from("snr_db");
    for db in lut.snr_db() {
        let _ = write!(out, ",{db}");
    }
    out.push('\n');
    for k in 0..=lut.last_sp() {
        let _ = write!(out, "{k}");
        for x in lut.row(k) {
            let _ = write!(out, ",{x}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "noiseless,{}", lut.noiseless());
    out
}
