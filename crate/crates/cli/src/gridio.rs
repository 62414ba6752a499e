//! Grid files: CSV with header `k,l,re,im`, one row per cell in linear-index
//! order (`q = k + N l`).

use num_complex::Complex64;
use otfs_core::DdGrid;

use crate::CliError;

pub const HEADER: &str = "k,l,re,im";
pub const MAX_DIGITS: usize = 17;

/// Serializes with `digits` significant digits in scientific notation.
pub fn write_grid(grid: &DdGrid, digits: usize) -> String {
    let prec = digits.clamp(1, MAX_DIGITS) - 1;
    let (n, m) = grid.shape();
    let mut out = String::with_capacity(grid.len() * (16 + 2 * digits));
    out.push_str(HEADER);
    out.push('\n');
    for l in 0..m {
        for k in 0..n {
            let z = grid[(k, l)];
            out.push_str(&format!("{k},{l},{:.*e},{:.*e}\n", prec, z.re, prec, z.im));
        }
    }
    out
}

/// Parses a grid of the given shape. Rows may come in any order but every
/// cell must appear exactly once.
pub fn read_grid(text: &str, n_doppler: usize, n_delay: usize) -> Result<DdGrid, CliError> {
    let bad = |line: usize, msg: String| CliError::Input(format!("grid line {line}: {msg}"));
    let mut lines = text.lines().enumerate().filter(|(_, s)| !s.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(CliError::Input(format!("grid file must start with `{HEADER}`"))),
    }
    let mut grid = DdGrid::zeros(n_doppler, n_delay).map_err(|e| CliError::Input(e.to_string()))?;
    let mut seen = vec![false; grid.len()];
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(i + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let index = |s: &str| s.parse::<usize>().map_err(|e| bad(i + 1, format!("`{s}`: {e}")));
        let value = |s: &str| s.parse::<f64>().map_err(|e| bad(i + 1, format!("`{s}`: {e}")));
        let (k, l) = (index(fields[0])?, index(fields[1])?);
        if k >= n_doppler || l >= n_delay {
            return Err(bad(
                i + 1,
                format!("cell ({k}, {l}) outside the {n_doppler}x{n_delay} grid"),
            ));
        }
        let q = k + n_doppler * l;
        if std::mem::replace(&mut seen[q], true) {
            return Err(bad(i + 1, format!("cell ({k}, {l}) repeated")));
        }
        grid[(k, l)] = Complex64::new(value(fields[2])?, value(fields[3])?);
    }
    if let Some(q) = seen.iter().position(|s| !s) {
        return Err(CliError::Input(format!(
            "grid file has no value for cell ({}, {})",
            q % n_doppler,
            q / n_doppler
        )));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_at_full_precision() {
        let g = DdGrid::from_fn(3, 2, |k, l| Complex64::new(k as f64 / 7.0, -(l as f64) * 1e-300))
            .unwrap();
        let text = write_grid(&g, 17);
        assert!(text.starts_with("k,l,re,im\n0,0,"));
        let back = read_grid(&text, 3, 2).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rows_are_in_linear_index_order() {
        let g = DdGrid::zeros(2, 2).unwrap();
        let cells: Vec<String> = write_grid(&g, 3)
            .lines()
            .skip(1)
            .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(cells, ["0,0", "1,0", "0,1", "1,1"]);
        assert!(write_grid(&g, 3).contains("0.00e0"));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_grid("k,l,re,im\n0,0,1,0\n", 1, 2).is_err());
        assert!(read_grid("k,l,re,im\n0,0,1,0\n0,0,1,0\n", 1, 2).is_err());
        assert!(read_grid("0,0,1,0\n", 1, 1).is_err());
        assert!(read_grid("k,l,re,im\n0,0,x,0\n", 1, 1).is_err());
        assert!(read_grid("k,l,re,im\n0,3,1,0\n", 1, 1).is_err());
        assert!(read_grid("k,l,re,im\n0,0,1\n", 1, 1).is_err());
        assert!(read_grid("k,l,re,im\n0,0,1,0\n", 1, 1).is_ok());
    }
}
