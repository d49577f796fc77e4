//! Plain-text assignment files.
//!
//! ```text
//! dim 2 vars 1
//! x
//! 0.5+0i 0+0i
//! 0+0i 1-2i
//! ```
//!
//! Entries are `a`, `bi` or `a+bi` / `a-bi` with decimal `a`, `b`.

use std::fmt::Write as _;

use crate::assignment::Assignment;
use crate::error::{ParseError, ParseErrorKind};
use crate::matcalc::Matrix;
use crate::scalar::{Complex, Real};

struct Cursor<'a> {
    src: &'a str,
    /// `(offset, token)` pairs split on whitespace, with line structure kept.
    lines: Vec<(usize, Vec<(usize, &'a str)>)>,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut off = 0;
        for raw in src.split_inclusive('\n') {
            let mut toks = Vec::new();
            let mut start = None;
            for (i, c) in raw.char_indices() {
                match (c.is_whitespace(), start) {
                    (false, None) => start = Some(i),
                    (true, Some(s)) => {
                        toks.push((off + s, &raw[s..i]));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                toks.push((off + s, &raw[s..]));
            }
            if !toks.is_empty() {
                lines.push((off, toks));
            }
            off += raw.len();
        }
        Cursor { src, lines, line: 0 }
    }

    fn err(&self, offset: usize, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.src, offset, ParseErrorKind::Syntax(msg.into()))
    }

    fn next_line(&mut self, what: &str) -> Result<&[(usize, &'a str)], ParseError> {
        let Some((_, toks)) = self.lines.get(self.line) else {
            return Err(self.err(self.src.len(), format!("unexpected end of input, expected {what}")));
        };
        self.line += 1;
        Ok(toks)
    }
}

fn parse_real<T: Real>(s: &str) -> Option<T> {
    let t: T = s.parse().ok()?;
    t.is_finite().then_some(t)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
fn parse_entry<T: Real>(s: &str) -> Option<Complex<T>> {
    let Some(body) = s.strip_suffix('i') else {
        return Some(Complex::new(parse_real(s)?, T::zero()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| {
        (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
    });
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (T::zero(), body),
    };
    let im = match im {
        "" | "+" => T::one(),
        "-" => -T::one(),
        other => parse_real(other.strip_prefix('+').unwrap_or(other))?,
    };
    Some(Complex::new(re, im))
}

/// Reads an assignment from the matrix text format.
pub fn parse_assignment<T: Real>(text: &str) -> Result<Assignment<T>, ParseError> {
    let mut cur = Cursor::new(text);
    let header = cur.next_line("header `dim D vars K`")?.to_vec();
    let (dim, count) = match header[..] {
        [(_, "dim"), (d_at, d), (_, "vars"), (k_at, k)] => {
            let dim: usize = d.parse().map_err(|_| cur.err(d_at, format!("invalid dimension `{d}`")))?;
            let count: usize = k.parse().map_err(|_| cur.err(k_at, format!("invalid variable count `{k}`")))?;
            if dim == 0 {
                return Err(cur.err(d_at, "dimension must be positive"));
            }
            (dim, count)
        }
        _ => return Err(cur.err(header[0].0, "expected header `dim D vars K`")),
    };
    let mut a = Assignment::new(dim);
    for _ in 0..count {
        let name_line = cur.next_line("a variable name")?.to_vec();
        let (name_at, name) = match name_line[..] {
            [(at, n)] if n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => (at, n),
            _ => return Err(cur.err(name_line[0].0, "expected a single variable name")),
        };
        if a.get(name).is_ok() {
            return Err(cur.err(name_at, format!("variable `{name}` assigned twice")));
        }
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            let row = cur.next_line("a matrix row")?.to_vec();
            if row.len() != dim {
                return Err(cur.err(row[0].0, format!("expected {dim} entries, found {}", row.len())));
            }
            let entries = row
                .iter()
                .map(|&(at, s)| parse_entry::<T>(s).ok_or_else(|| cur.err(at, format!("invalid entry `{s}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(entries);
        }
        let m = Matrix::from_rows(&rows).map_err(|e| cur.err(name_at, e.to_string()))?;
        a.insert(name, m).expect("dimension checked");
    }
    if let Some((off, _)) = cur.lines.get(cur.line) {
        return Err(cur.err(*off, "trailing input after the last matrix"));
    }
    Ok(a)
}

fn write_entry<T: Real>(out: &mut String, z: Complex<T>) {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    let _ = write!(out, "{}{}{}i", z.re, sign, z.im.abs());
}

/// Writes an assignment in the matrix text format, variables sorted by name.
pub fn format_assignment<T: Real>(a: &Assignment<T>) -> String {
    let mut out = format!("dim {} vars {}\n", a.dim(), a.len());
    for (name, m) in a.iter() {
        out.push_str(name);
        out.push('\n');
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                if j > 0 {
                    out.push(' ');
                }
                write_entry(&mut out, m.get(i, j));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn entries() {
        assert_eq!(parse_entry::<f64>("1"), Some(cplx(1.0, 0.0)));
        assert_eq!(parse_entry::<f64>("-0.5+2i"), Some(cplx(-0.5, 2.0)));
        assert_eq!(parse_entry::<f64>("1e-3-2.5e+2i"), Some(cplx(1e-3, -250.0)));
        assert_eq!(parse_entry::<f64>("-2i"), Some(cplx(0.0, -2.0)));
        assert_eq!(parse_entry::<f64>("i"), Some(cplx(0.0, 1.0)));
        assert_eq!(parse_entry::<f64>("-i"), Some(cplx(0.0, -1.0)));
        assert_eq!(parse_entry::<f64>("abc"), None);
        assert_eq!(parse_entry::<f64>("inf"), None);
    }

    #[test]
    fn half_file() {
        let a: Assignment<f64> = parse_assignment("dim 1 vars 1\nx\n0.5\n").unwrap();
        assert_eq!(a.get("x").unwrap().get(0, 0), cplx(0.5, 0.0));
    }

    #[test]
    fn round_trip() {
        let m = Matrix::from_rows(&[vec![cplx(1.0, -0.0), cplx(0.1, 2.5)], vec![cplx(-3.0, 1e-20), cplx(0.0, 0.0)]])
            .unwrap();
        let a = Assignment::from_pairs([("y", m.clone()), ("x", m.adjoint())]).unwrap();
        let text = format_assignment(&a);
        assert!(text.starts_with("dim 2 vars 2\nx\n"));
        let back: Assignment<f64> = parse_assignment(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(format_assignment(&back), text);
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_assignment::<f64>("dim 2 vars 1\nx\n1 2\n3\n").unwrap_err();
        assert_eq!(e.span.line, 4);
        let e = parse_assignment::<f64>("dim 1 vars 1\nx\nfoo\n").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (3, 1));
        assert!(parse_assignment::<f64>("dims 1 vars 1\n").is_err());
        assert!(parse_assignment::<f64>("dim 1 vars 2\nx\n1\n").is_err());
        assert!(parse_assignment::<f64>("dim 1 vars 1\nx\n1\nextra\n").is_err());
        assert!(parse_assignment::<f64>("dim 1 vars 2\nx\n1\nx\n2\n").is_err());
    }
}
