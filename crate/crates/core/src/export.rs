//! Fixed-format CSV output. Every value is written with 17 significant digits
//! in scientific notation and rows end with `\n`, so identical runs give
//! byte-identical files.

use std::io::{self, Write};

use crate::dynamics::SimulationResult;

/// `{:.16e}` rendering of one value.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a header and rows of numbers.
pub fn write_table<W: Write>(mut w: W, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(format_value).collect();
        w.write_all(line.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// `t`, the sorted `P_<label>` columns, `F` and `residual`.
pub fn write_trajectory<W: Write>(w: W, result: &SimulationResult) -> io::Result<()> {
    write_table(w, &result.header(), (0..result.times.len()).map(|i| result.row(i)))
}

pub fn trajectory_csv(result: &SimulationResult) -> String {
    let mut buf = Vec::new();
    write_trajectory(&mut buf, result).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
