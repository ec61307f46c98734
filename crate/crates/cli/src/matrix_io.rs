//! Plain-text matrices: a header line holding `N`, then `N` rows of `N`
//! whitespace-separated entries `re+imj`.
//!
//! ```text
//! 2
//! 1+0j      0.5-0.25j
//! 0.5+0.25j -2
//! ```
//!
//! Purely real (`1.5`) or purely imaginary (`2j`, `-j`) entries are accepted.

use std::fmt::Write as _;
use std::path::Path;

use diaggate::linalg::ComplexSquareMatrix;
use num_complex::Complex64;

use crate::error::CliError;

/// Hermiticity tolerance relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse().ok(),
    }
}

/// Parses `re+imj`, `re`, or `imj`.
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix(['j', 'i']) else {
        return token.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // The imaginary part starts at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Some(Complex64::new(body[..i].parse().ok()?, parse_real(&body[i..])?)),
        None => Some(Complex64::new(0.0, parse_real(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

pub fn parse_matrix(text: &str) -> Result<ComplexSquareMatrix, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| CliError::Parse("empty matrix file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| CliError::Parse(format!("header '{header}' is not a dimension")))?;
    if n == 0 {
        return Err(CliError::Parse("matrix dimension must be positive".into()));
    }
    let mut entries = Vec::with_capacity(n * n);
    for row in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| CliError::Parse(format!("expected {n} rows, found {row}")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(CliError::Parse(format!("row {row} has {} entries, expected {n}", tokens.len())));
        }
        for (col, t) in tokens.into_iter().enumerate() {
            let z = parse_complex(t)
                .filter(|z| z.re.is_finite() && z.im.is_finite())
                .ok_or_else(|| CliError::Parse(format!("row {row}, col {col}: cannot read '{t}' as a complex number")))?;
            entries.push(z);
        }
    }
    if let Some(extra) = lines.next() {
        return Err(CliError::Parse(format!("unexpected trailing line '{extra}'")));
    }
    Ok(ComplexSquareMatrix::from_rows(n, &entries)?)
}

/// Fails with the worst offending entry if `h` is not Hermitian.
pub fn validate_hermitian(h: &ComplexSquareMatrix) -> Result<(), CliError> {
    let n = h.order();
    let scale = h.as_matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut worst = (0.0, 0, 0);
    for r in 0..n {
        for c in r..n {
            let d = (h.get(r, c) - h.get(c, r).conj()).norm();
            if d > worst.0 {
                worst = (d, r, c);
            }
        }
    }
    let (d, r, c) = worst;
    if d > HERMITIAN_TOL * scale {
        return Err(CliError::Usage(format!(
            "matrix is not Hermitian: entry ({r},{c}) = {} but conj of ({c},{r}) = {} (deviation {d:.3e})",
            format_complex(h.get(r, c)),
            format_complex(h.get(c, r).conj()),
        )));
    }
    Ok(())
}

pub fn read_hermitian(path: &Path) -> Result<ComplexSquareMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let h = parse_matrix(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    validate_hermitian(&h)?;
    Ok(h)
}

pub fn format_matrix(m: &ComplexSquareMatrix) -> String {
    let n = m.order();
    let mut out = format!("{n}\n");
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| format_complex(m.get(r, c))).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entry_forms() {
        let cases = [
            ("1+2j", (1.0, 2.0)),
            ("-1.5-0.25j", (-1.5, -0.25)),
            ("3", (3.0, 0.0)),
            ("2j", (0.0, 2.0)),
            ("-j", (0.0, -1.0)),
            ("1e-3+2E+2j", (1e-3, 200.0)),
            ("-1.0e+1-1.0e-1j", (-10.0, -0.1)),
            ("5+j", (5.0, 1.0)),
        ];
        for (s, (re, im)) in cases {
            assert_eq!(parse_complex(s), Some(Complex64::new(re, im)), "{s}");
        }
        for bad in ["", "j1", "1+2", "abc", "1+xj"] {
            assert_eq!(parse_complex(bad), None, "{bad}");
        }
    }

    #[test]
    fn formatting_round_trips_bits() {
        let z = Complex64::new(0.1 + 0.2, -1.0 / 3.0);
        let back = parse_complex(&format_complex(z)).unwrap();
        assert_eq!(back.re.to_bits(), z.re.to_bits());
        assert_eq!(back.im.to_bits(), z.im.to_bits());
    }

    #[test]
    fn matrix_round_trip() {
        let text = "2\n1+0j 0.5-0.25j\n0.5+0.25j -2\n";
        let m = parse_matrix(text).unwrap();
        validate_hermitian(&m).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn diagnostics_name_the_entry() {
        let m = parse_matrix("3\n1 0 0\n0 1 2j\n0 2j 1\n").unwrap();
        let msg = validate_hermitian(&m).unwrap_err().to_string();
        assert!(msg.contains("(1,2)"), "{msg}");

        let msg = parse_matrix("2\n1 0\n0 x\n").unwrap_err().to_string();
        assert!(msg.contains("row 1, col 1"), "{msg}");
        assert!(parse_matrix("2\n1 0\n").is_err());
        assert!(parse_matrix("2\n1 0 0\n0 1\n").is_err());
        assert!(parse_matrix("0\n").is_err());
        assert!(parse_matrix("2\n1 0\n0 1\n1 1\n").is_err());
    }
}
