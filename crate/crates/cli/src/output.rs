use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use quadflow::TrajectorySample;

/// Round-trip formatting: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn sample_row(s: &TrajectorySample) -> String {
    format!(
        "{},{},{},{}",
        num(s.t),
        num(s.point.x),
        num(s.point.y),
        s.regime
    )
}
