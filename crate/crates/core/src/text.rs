//! Plain-text matrix exchange format.
//!
//! ```text
//! 2            <- n, or "rows cols" for a rectangular matrix
//! 3 0.1-2i     <- one line per row, whitespace-separated entries
//! 0.1+2i 1
//! ```
//!
//! An entry is `REAL` or `REAL SIGN REAL i`. Writers emit 17 significant
//! digits so that every `f64` survives a round trip bit for bit.

use num_complex::Complex64;

use crate::error::{PerturbError, Result};
use crate::matrix::{DenseMatrix, HermitianMatrix, DEFAULT_ASYMMETRY_TOL};

/// Parses exactly one matrix; trailing blank lines are allowed.
pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let lines: Vec<&str> = text.lines().collect();
    let (m, next) = parse_at(&lines, 0)?;
    if let Some(extra) = next_content_line(&lines, next) {
        return Err(parse_err(extra + 1, 1, "unexpected content after matrix"));
    }
    Ok(m)
}

/// Parses a Hermitian matrix. Asymmetry above the default tolerance,
/// including a nonreal diagonal, is a parse error.
pub fn parse_hermitian(text: &str) -> Result<HermitianMatrix> {
    let m = parse_matrix(text)?;
    HermitianMatrix::with_tolerance(m, DEFAULT_ASYMMETRY_TOL).map_err(|e| match e {
        PerturbError::NotHermitian {
            row,
            col,
            deviation,
            ..
        } => parse_err(
            row + 2,
            col + 1,
            &format!("entry ({}, {}) breaks Hermitian symmetry by {deviation:e}", row + 1, col + 1),
        ),
        other => other,
    })
}

/// Parses a stream of concatenated matrices, as emitted by the CLI.
pub fn parse_matrix_sequence(text: &str) -> Result<Vec<DenseMatrix>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(start) = next_content_line(&lines, pos) {
        let (m, next) = parse_at(&lines, start)?;
        out.push(m);
        pos = next;
    }
    Ok(out)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = if m.is_square() {
        format!("{}\n", m.rows())
    } else {
        format!("{} {}\n", m.rows(), m.cols())
    };
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format_entry(m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_entry(z: Complex64) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        format_real(z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{}{}i", format_real(z.re), sign, format_real(z.im.abs()))
    }
}

/// Parses one entry token; `None` carries a message for the caller to place.
pub fn parse_entry(token: &str) -> std::result::Result<Complex64, String> {
    let Some(body) = token.strip_suffix('i') else {
        return parse_real(token).map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).find(|&k| {
        (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
    });
    let Some(k) = split else {
        return Err(format!("malformed complex entry '{token}'"));
    };
    let re = parse_real(&body[..k])?;
    let im_abs = parse_real(&body[k + 1..])?;
    if body[k + 1..].starts_with(['+', '-']) {
        return Err(format!("malformed complex entry '{token}'"));
    }
    let im = if bytes[k] == b'-' { -im_abs } else { im_abs };
    Ok(Complex64::new(re, im))
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let looks_decimal = !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'))
        && s.bytes().any(|b| b.is_ascii_digit());
    if !looks_decimal {
        return Err(format!("malformed number '{s}'"));
    }
    let v: f64 = s.parse().map_err(|_| format!("malformed number '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value '{s}'"));
    }
    Ok(v)
}

fn parse_err(line: usize, column: usize, message: &str) -> PerturbError {
    PerturbError::Parse {
        line,
        column,
        message: message.to_string(),
    }
}

fn next_content_line(lines: &[&str], from: usize) -> Option<usize> {
    (from..lines.len()).find(|&k| !lines[k].trim().is_empty())
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..k]));
            }
        } else if start.is_none() {
            start = Some(k);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

fn parse_dim(line_no: usize, col: usize, tok: &str) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(parse_err(line_no, col, &format!("invalid dimension '{tok}'"))),
    }
}

/// Parses a matrix whose header is on `lines[start]`; returns it together
/// with the index of the first unconsumed line.
fn parse_at(lines: &[&str], start: usize) -> Result<(DenseMatrix, usize)> {
    let Some(&header) = lines.get(start) else {
        return Err(parse_err(start + 1, 1, "missing dimension header"));
    };
    let head = tokens(header);
    let line_no = start + 1;
    let (rows, cols) = match head.as_slice() {
        [(c, n)] => {
            let n = parse_dim(line_no, *c, n)?;
            (n, n)
        }
        [(c1, r), (c2, c)] => (parse_dim(line_no, *c1, r)?, parse_dim(line_no, *c2, c)?),
        _ => return Err(parse_err(line_no, 1, "header must be 'n' or 'rows cols'")),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let k = start + 1 + i;
        let Some(&line) = lines.get(k) else {
            return Err(parse_err(
                k + 1,
                1,
                &format!("expected {rows} rows, found {i}"),
            ));
        };
        let toks = tokens(line);
        if toks.len() != cols {
            return Err(parse_err(
                k + 1,
                toks.get(cols).map_or(line.chars().count() + 1, |t| t.0),
                &format!("expected {cols} entries, found {}", toks.len()),
            ));
        }
        for (col, tok) in toks {
            let z = parse_entry(tok).map_err(|msg| parse_err(k + 1, col, &msg))?;
            data.push(z);
        }
    }
    Ok((DenseMatrix::new(rows, cols, data)?, start + 1 + rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_real_hermitian() {
        let h = parse_hermitian("2\n3 0.1\n0.1 1\n").unwrap();
        assert_eq!(h, HermitianMatrix::from_real_rows(&[&[3.0, 0.1], &[0.1, 1.0]]));
    }

    #[test]
    fn rejects_nonreal_diagonal_in_hermitian_mode() {
        let err = parse_hermitian("1\n0+1i\n").unwrap_err();
        assert!(matches!(err, PerturbError::Parse { line: 2, column: 1, .. }), "{err:?}");
        // The same text is a valid general matrix.
        assert_eq!(parse_matrix("1\n0+1i\n").unwrap()[(0, 0)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn parses_conjugate_symmetric_input() {
        let h = parse_hermitian("2\n0 1-2i\n1+2i 0\n").unwrap();
        assert_eq!(h[(0, 1)], Complex64::new(1.0, -2.0));
        assert_eq!(h[(1, 0)], Complex64::new(1.0, 2.0));
    }

    #[test]
    fn entry_grammar() {
        assert_eq!(parse_entry("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_entry("1.5-0.25i").unwrap(), Complex64::new(1.5, -0.25));
        assert_eq!(parse_entry("-1e-3+2.5E+1i").unwrap(), Complex64::new(-1e-3, 25.0));
        assert!(parse_entry("1i").is_err());
        assert!(parse_entry("1+i").is_err());
        assert!(parse_entry("1+-2i").is_err());
        assert!(parse_entry("abc").is_err());
        assert!(parse_entry("inf").is_err());
        assert!(parse_entry("NaN").is_err());
    }

    #[test]
    fn errors_carry_position() {
        match parse_matrix("2\n1 2\n3 x\n") {
            Err(PerturbError::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
        match parse_matrix("2\n1 2 3\n3 4\n") {
            Err(PerturbError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_matrix("3\n1 2 3\n") {
            Err(PerturbError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_matrix("0\n"), Err(PerturbError::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("1\n1e999\n"), Err(PerturbError::Parse { .. })));
    }

    #[test]
    fn rectangular_and_sequence() {
        let text = "1 2\n1 1\n2\n1 0\n0 1\n";
        let ms = parse_matrix_sequence(text).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!((ms[0].rows(), ms[0].cols()), (1, 2));
        assert!(parse_matrix(text).is_err());
        assert_eq!(format_matrix(&ms[0]).lines().next(), Some("1 2"));
    }

    #[test]
    fn negative_zero_imaginary_survives() {
        let z = Complex64::new(1.0, -0.0);
        let back = parse_entry(&format_entry(z)).unwrap();
        assert_eq!(back.im.to_bits(), (-0.0f64).to_bits());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
        ]
    }

    proptest! {
        #[test]
        fn format_parse_is_bit_exact(
            rows in 1usize..4,
            cols in 1usize..4,
            vals in proptest::collection::vec((finite(), finite()), 16),
        ) {
            let m = DenseMatrix::from_fn(rows, cols, |i, j| {
                let (re, im) = vals[i * 4 + j];
                Complex64::new(re, im)
            });
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
