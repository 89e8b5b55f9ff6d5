//! Plain-text line-set files.
//!
//! ```text
//! PGLS 1
//! n 6
//! q 4
//! modulus 1 1 1
//! 1 0 0 0 0 0 0,0 1 0 0 0 0 0
//! ...
//! ```
//!
//! The `modulus` line appears only for non-prime q. Each body line holds
//! the two canonical basis rows of one line, coordinates as field codes.
//! Body lines are sorted canonically. Blank lines and `#` comments are
//! ignored on input.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::lineset::LineSet;
use crate::pg::Space;

pub const MAGIC: &str = "PGLS 1";

fn join(codes: &[u8]) -> String {
    codes.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")
}

/// Serialize in canonical form.
pub fn write_lineset(ls: &LineSet) -> String {
    let space = ls.space();
    let spec = space.field().spec();
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "n {}", space.n()).unwrap();
    writeln!(out, "q {}", space.q()).unwrap();
    if spec.e > 1 {
        writeln!(out, "modulus {}", join(&spec.modulus)).unwrap();
    }
    for l in ls.line_subspaces() {
        let rows = l.basis_codes();
        writeln!(out, "{},{}", join(&rows[0]), join(&rows[1])).unwrap();
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn keyed<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, String)> {
    let (no, text) = lines
        .next()
        .ok_or_else(|| perr(0, format!("missing `{key}` header")))?;
    match text.split_once(' ') {
        Some((k, v)) if k == key => Ok((no, v.trim().to_string())),
        _ => Err(perr(no, format!("expected `{key} ...`, found {text:?}"))),
    }
}

fn parse_codes(no: usize, text: &str) -> Result<Vec<u8>> {
    text.split_whitespace()
        .map(|t| t.parse::<u8>().map_err(|_| perr(no, format!("bad coordinate {t:?}"))))
        .collect()
}

/// Parse a line-set file. Input lines are canonicalized; a line given
/// twice is an error.
pub fn parse_lineset(text: &str) -> Result<LineSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((no, other)) => return Err(perr(no, format!("expected {MAGIC:?}, found {other:?}"))),
        None => return Err(perr(0, "empty file")),
    }
    let (no, n) = keyed(&mut lines, "n")?;
    let n: usize = n.parse().map_err(|_| perr(no, "bad n"))?;
    let (no, q) = keyed(&mut lines, "q")?;
    let q: u32 = q.parse().map_err(|_| perr(no, "bad q"))?;
    let space = Space::new(n, q).map_err(|e| perr(no, e.to_string()))?;
    let spec = FieldSpec::new(q)?;

    let mut body: Vec<(usize, &str)> = Vec::new();
    let mut first = lines.next();
    if spec.e > 1 {
        let (no, text) = first.ok_or_else(|| perr(0, "missing `modulus` header"))?;
        let rest = text
            .strip_prefix("modulus ")
            .ok_or_else(|| perr(no, "expected `modulus ...` for a non-prime field"))?;
        if parse_codes(no, rest)? != spec.modulus {
            return Err(perr(
                no,
                format!("modulus {rest:?} differs from the supported {}", join(&spec.modulus)),
            ));
        }
        first = lines.next();
    }
    body.extend(first);
    body.extend(lines);

    let mut subs = Vec::with_capacity(body.len());
    for (no, text) in body {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| perr(no, "expected two points separated by a comma"))?;
        let (a, b) = (parse_codes(no, a)?, parse_codes(no, b)?);
        if a.len() != n + 1 || b.len() != n + 1 {
            return Err(perr(no, format!("points need {} coordinates", n + 1)));
        }
        let sub = space
            .subspace(&[&a, &b])
            .map_err(|e| perr(no, e.to_string()))?;
        if sub.projdim() != 1 {
            return Err(perr(no, Error::DegenerateLine.to_string()));
        }
        subs.push((no, sub));
    }
    let mut sorted: Vec<_> = subs.iter().map(|(no, s)| (s.clone(), *no)).collect();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(perr(w[1].1, format!("duplicate of line {}", w[0].1)));
        }
    }
    LineSet::new(space, subs.into_iter().map(|(_, s)| s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hexagon::build;

    #[test]
    fn hexagon_round_trip() {
        let h = build(2).unwrap();
        let text = write_lineset(&h);
        assert!(text.starts_with("PGLS 1\nn 6\nq 2\n"));
        assert_eq!(text.lines().count(), 3 + 63);
        let back = parse_lineset(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(write_lineset(&back), text);
    }

    #[test]
    fn non_prime_field_header() {
        let s = Space::new(3, 4).unwrap();
        let l = s.subspace(&[&[1, 2, 0, 0], &[0, 0, 1, 3]]).unwrap();
        let ls = LineSet::new(s, vec![l]).unwrap();
        let text = write_lineset(&ls);
        assert_eq!(text, "PGLS 1\nn 3\nq 4\nmodulus 1 1 1\n1 2 0 0,0 0 1 3\n");
        assert_eq!(parse_lineset(&text).unwrap(), ls);
        let missing = text.replace("modulus 1 1 1\n", "");
        assert!(parse_lineset(&missing).is_err());
        let wrong = text.replace("modulus 1 1 1", "modulus 1 0 1");
        assert!(parse_lineset(&wrong).is_err());
    }

    #[test]
    fn canonicalizes_input() {
        let text = "PGLS 1\nn 3\nq 2\n# comment\n0 0 1 1,1 0 1 0\n\n1 1 0 0,0 0 1 0\n";
        let ls = parse_lineset(text).unwrap();
        assert_eq!(
            write_lineset(&ls),
            "PGLS 1\nn 3\nq 2\n1 0 0 1,0 0 1 1\n1 1 0 0,0 0 1 0\n"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let cases = [
            "",
            "PGLS 2\nn 3\nq 2\n",
            "PGLS 1\nq 2\nn 3\n",
            "PGLS 1\nn 3\nq 6\n",
            "PGLS 1\nn 3\nq 2\n1 0 0 0\n",
            "PGLS 1\nn 3\nq 2\n1 0 0 0,1 0 0 0\n",
            "PGLS 1\nn 3\nq 2\n1 0 0 0,0 2 0 0\n",
            "PGLS 1\nn 3\nq 2\n1 0 0,0 1 0\n",
            "PGLS 1\nn 3\nq 2\n1 0 0 0,0 1 0 0\n1 1 0 0,0 1 0 0\n",
        ];
        for c in cases {
            assert!(matches!(parse_lineset(c), Err(Error::Parse { .. }) | Err(Error::UnsupportedField(_))), "{c:?}");
        }
    }
}
