use std::io::{Read, Write};

use super::TraceSet;
use crate::error::SimError;

/// Rounds to 9 significant digits and prints the shortest exact form.
fn fmt9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("float repr");
    format!("{rounded}")
}

/// Header `t, v_bus_<id>.., df, p_load_<bus>.., rate_line_<id>..`, one row per step.
pub fn write_csv<W: Write>(traces: &TraceSet, sink: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(sink);
    let cols = traces.columns();
    let mut header = vec!["t".to_string()];
    header.extend(cols.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (row, &t) in traces.time.iter().enumerate() {
        let mut rec = Vec::with_capacity(cols.len() + 1);
        rec.push(fmt9(t));
        rec.extend(cols.iter().map(|(_, s)| fmt9(s[row])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parsed trace CSV: header names and the numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv<R: Read>(source: R) -> Result<CsvTable, SimError> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| SimError::Scenario(format!("bad csv number {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::fmt9;

    #[test]
    fn nine_digit_formatting() {
        assert_eq!(fmt9(0.85), "0.85");
        assert_eq!(fmt9(0.1 + 0.2), "0.3");
        assert_eq!(fmt9(1234.5678912345), "1234.56789");
        assert_eq!(fmt9(-0.0), "0");
        assert_eq!(fmt9(1e-12), "0.000000000001");
    }
}
