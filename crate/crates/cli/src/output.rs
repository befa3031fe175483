use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn g12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => g12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Writes `# metadata` then a header and rows.
pub fn write_csv(path: &Path, metadata: &str, header: &[&str], rows: &[Vec<Cell>]) -> anyhow::Result<PathBuf> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "# simplemenu {} {metadata}", env!("CARGO_PKG_VERSION"))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(1.0 / 19.0), "0.0526315789474");
        assert_eq!(g12(0.5), "0.5");
        assert_eq!(g12(100.0), "100");
        assert_eq!(g12(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(123456.7890123456), "123456.789012");
    }
}
