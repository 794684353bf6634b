use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let wrap = |source| Error::File { path: path.to_path_buf(), source };
    {
        let mut f = fs::File::create(&tmp).map_err(wrap)?;
        f.write_all(contents).map_err(wrap)?;
        f.sync_all().map_err(wrap)?;
    }
    fs::rename(&tmp, path).map_err(wrap)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

/// Formats a value with six significant digits in plain decimal notation.
pub(crate) fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new digit (9.999996 -> 10.00000)
    let reparsed: f64 = s.parse().unwrap_or(v);
    if reparsed != 0.0 && (reparsed.abs().log10().floor() as i32) > magnitude && decimals > 0 {
        let d = decimals - 1;
        return format!("{v:.d$}");
    }
    s
}

/// Ages of an inclusive `start:end:step` grid, snapped to 1e-9 so that
/// repeated addition never leaks binary noise into output files.
pub(crate) fn grid_ages(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end < start {
        return Err(Error::invalid(format!("bad grid {start}:{end}:{step}")));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| snap(start + i as f64 * step)).collect())
}

pub(crate) fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(12.74), "12.7400");
        assert_eq!(format_sig6(176.98), "176.980");
        assert_eq!(format_sig6(0.0123456789), "0.0123457");
        assert_eq!(format_sig6(9.9999996), "10.0000");
        assert_eq!(format_sig6(-3.5), "-3.50000");
        assert_eq!(format_sig6(1234567.0), "1234567");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn grid_is_inclusive_and_clean() {
        let g = grid_ages(2.0, 20.0, 0.5).unwrap();
        assert_eq!(g.len(), 37);
        assert_eq!(g[0], 2.0);
        assert_eq!(*g.last().unwrap(), 20.0);
        let g = grid_ages(2.0, 20.0, 0.1).unwrap();
        assert_eq!(g.len(), 181);
        assert_eq!(g[3], 2.3);
        assert!(grid_ages(2.0, 1.0, 0.5).is_err());
        assert!(grid_ages(2.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
