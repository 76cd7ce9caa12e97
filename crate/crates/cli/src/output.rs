//! CSV and JSON emission with fixed float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits, lowercase exponent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One irrep's curves: `lambda, E_1..E_K, scaled_1..scaled_K`. The scaled
/// fields are empty at `λ = 0`.
pub fn curve_csv(lambdas: &[f64], energies: &[Vec<f64>], levels: usize) -> String {
    let mut s = String::from("lambda");
    for k in 1..=levels {
        let _ = write!(s, ",E_{k}");
    }
    for k in 1..=levels {
        let _ = write!(s, ",scaled_{k}");
    }
    s.push('\n');
    for (lambda, row) in lambdas.iter().zip(energies) {
        s.push_str(&fmt_float(*lambda));
        for e in &row[..levels] {
            s.push(',');
            s.push_str(&fmt_float(*e));
        }
        let root = lambda.sqrt();
        for e in &row[..levels] {
            s.push(',');
            if *lambda > 0.0 {
                s.push_str(&fmt_float(e / root));
            }
        }
        s.push('\n');
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.001), "1.0000000000000000e-3");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_float(-2.5e10), "-2.5000000000000000e10");
    }

    #[test]
    fn scaled_columns_empty_at_zero() {
        let csv = curve_csv(&[0.0, 4.0], &[vec![1.0, 2.0], vec![4.0, 6.0]], 1);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "lambda,E_1,scaled_1");
        assert_eq!(lines[1], "0.0000000000000000e0,1.0000000000000000e0,");
        assert_eq!(lines[2], "4.0000000000000000e0,4.0000000000000000e0,2.0000000000000000e0");
    }
}
