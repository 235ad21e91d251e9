//! Plain-text ensemble records.
//!
//! A record is a header line, a value line, then the edge grids as rows of
//! `0`/`1` characters listed from the bottom row up:
//!
//! ```text
//! A B C Psi r k
//! 1 1 1 0 1 3
//! <h rows: n_rows lines of width + 1 characters>
//! <v rows: n_rows + 1 lines of width characters>
//! <diagonal row: A + B characters, or "-" when there are none>
//! ```
//!
//! Only domain-wall data is written; the boundary is rebuilt from the header.
//! `k` is the exit column `K`, or `Phi` on an augmented domain. Defective
//! records use the header `A B C k defective` and carry two diagonal rows,
//! the lower ends then the upper ends. Blank lines are ignored.

use std::fmt::Write as _;

use threebundle_core::ensemble::DefectiveEnsemble;
use threebundle_core::geometry::Domain;
use threebundle_core::{build_augmented, build_domain, domain_wall_boundary, EnsembleError, PathEnsemble};

const PLAIN_HEADER: &str = "A B C Psi r k";
const DEFECTIVE_HEADER: &str = "A B C k defective";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of input")]
    Truncated,
    #[error("record header says {field} = {stated} but the ensemble has {actual}")]
    Mismatch { field: &'static str, stated: i64, actual: i64 },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// One record of a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Paths(PathEnsemble),
    Defective(DefectiveEnsemble),
}

fn push_rows(out: &mut String, bits: &[u8], cols: usize, rows: usize) {
    for r in 0..rows {
        for &b in &bits[r * cols..(r + 1) * cols] {
            out.push(if b == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
}

fn push_row(out: &mut String, bits: &[u8]) {
    if bits.is_empty() {
        out.push('-');
    }
    for &b in bits {
        out.push(if b == 1 { '1' } else { '0' });
    }
    out.push('\n');
}

fn push_grids(out: &mut String, d: &Domain, bits: &[u8]) {
    let (hc, hr) = d.h_grid_dims();
    let (vc, vr) = d.v_grid_dims();
    let nh = hc * hr;
    push_rows(out, &bits[..nh], hc, hr);
    push_rows(out, &bits[nh..nh + vc * vr], vc, vr);
}

/// Serialises a domain-wall ensemble.
pub fn write_ensemble(e: &PathEnsemble) -> Result<String, FormatError> {
    let d = e.domain();
    let k = e.phi()?;
    let mut out = String::new();
    writeln!(out, "{PLAIN_HEADER}").unwrap();
    writeln!(out, "{} {} {} {} {} {}", d.a(), d.b(), d.c(), d.psi(), e.restriction(), k).unwrap();
    push_grids(&mut out, d, e.bits());
    let start = d.n_h_slots() + d.n_v_slots();
    push_row(&mut out, &e.bits()[start..]);
    Ok(out)
}

pub fn write_defective(e: &DefectiveEnsemble) -> String {
    let d = e.domain();
    let mut out = String::new();
    writeln!(out, "{DEFECTIVE_HEADER}").unwrap();
    writeln!(out, "{} {} {} {}", d.a(), d.b(), d.c(), e.exit_k()).unwrap();
    push_grids(&mut out, d, e.bits());
    push_row(&mut out, e.lower_diagonal());
    push_row(&mut out, e.upper_diagonal());
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(s: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> =
            Box::new(s.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()));
        Self { inner: it.peekable() }
    }

    fn next(&mut self) -> Result<(usize, &'a str), FormatError> {
        self.inner.next().ok_or(FormatError::Truncated)
    }

    fn is_done(&mut self) -> bool {
        self.inner.peek().is_none()
    }

    fn bit_row(&mut self, len: usize) -> Result<Vec<u8>, FormatError> {
        let (line, s) = self.next()?;
        if len == 0 && s == "-" {
            return Ok(Vec::new());
        }
        if s.len() != len {
            return Err(FormatError::Parse { line, msg: format!("expected {len} bits, found {}", s.len()) });
        }
        s.bytes()
            .map(|c| match c {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(FormatError::Parse { line, msg: format!("unexpected character {:?}", c as char) }),
            })
            .collect()
    }

    fn grid(&mut self, cols: usize, rows: usize) -> Result<Vec<u8>, FormatError> {
        let mut out = Vec::with_capacity(cols * rows);
        for _ in 0..rows {
            out.extend(self.bit_row(cols)?);
        }
        Ok(out)
    }

    fn values(&mut self, n: usize) -> Result<Vec<i64>, FormatError> {
        let (line, s) = self.next()?;
        let v: Vec<i64> = s
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| FormatError::Parse { line, msg: format!("not an integer: {t:?}") }))
            .collect::<Result<_, _>>()?;
        if v.len() != n {
            return Err(FormatError::Parse { line, msg: format!("expected {n} values, found {}", v.len()) });
        }
        Ok(v)
    }
}

fn to_u32(line: usize, v: i64) -> Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Parse { line, msg: format!("{v} is not a valid size") })
}

fn check(field: &'static str, stated: i64, actual: i64) -> Result<(), FormatError> {
    if stated != actual {
        return Err(FormatError::Mismatch { field, stated, actual });
    }
    Ok(())
}

fn parse_grids(lines: &mut Lines, d: &Domain) -> Result<Vec<u8>, FormatError> {
    let (hc, hr) = d.h_grid_dims();
    let (vc, vr) = d.v_grid_dims();
    let mut bits = lines.grid(hc, hr)?;
    bits.extend(lines.grid(vc, vr)?);
    Ok(bits)
}

fn parse_record(lines: &mut Lines) -> Result<Record, FormatError> {
    let (line, header) = lines.next()?;
    match header {
        PLAIN_HEADER => {
            let v = lines.values(6)?;
            let (a, b, c, psi) = (to_u32(line, v[0])?, to_u32(line, v[1])?, to_u32(line, v[2])?, to_u32(line, v[3])?);
            let r = to_u32(line, v[4])?;
            let d = if psi == 0 { build_domain(a, b, c) } else { build_augmented(a, b, c, psi) }
                .map_err(EnsembleError::from)?;
            let mut bits = parse_grids(lines, &d)?;
            bits.extend(lines.bit_row(d.n_diagonals() as usize)?);
            let e = PathEnsemble::new(d, domain_wall_boundary(&d), bits, Some(r))?;
            check("k", v[5], e.phi()?)?;
            Ok(Record::Paths(e))
        }
        DEFECTIVE_HEADER => {
            let v = lines.values(4)?;
            let (a, b, c) = (to_u32(line, v[0])?, to_u32(line, v[1])?, to_u32(line, v[2])?);
            let d = build_domain(a, b, c).map_err(EnsembleError::from)?;
            let mut bits = parse_grids(lines, &d)?;
            bits.extend(std::iter::repeat(0).take(d.n_diagonals() as usize));
            let nd = d.n_diagonals() as usize;
            let d1 = lines.bit_row(nd)?;
            let d2 = lines.bit_row(nd)?;
            let e = DefectiveEnsemble::new(d, bits, d1, d2)?;
            check("k", v[3], e.exit_k())?;
            Ok(Record::Defective(e))
        }
        other => Err(FormatError::Parse { line, msg: format!("unknown header {other:?}") }),
    }
}

/// Parses every record of a file.
pub fn parse_records(s: &str) -> Result<Vec<Record>, FormatError> {
    let mut lines = Lines::new(s);
    let mut out = Vec::new();
    while !lines.is_done() {
        out.push(parse_record(&mut lines)?);
    }
    Ok(out)
}

/// Parses a file holding exactly one path-ensemble record.
pub fn parse_ensemble(s: &str) -> Result<PathEnsemble, FormatError> {
    let mut recs = parse_records(s)?;
    match (recs.pop(), recs.is_empty()) {
        (Some(Record::Paths(e)), true) => Ok(e),
        (None, _) => Err(FormatError::Truncated),
        _ => Err(FormatError::Parse { line: 1, msg: "expected a single path-ensemble record".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use threebundle_core::sampler::{extremal_ensemble, Side};

    fn extremes(d: &Domain, r: u32) -> Vec<PathEnsemble> {
        let bd = domain_wall_boundary(d);
        [Side::Min, Side::Max].into_iter().map(|s| extremal_ensemble(d, &bd, r, s).unwrap()).collect()
    }

    #[test]
    fn plain_records_round_trip() {
        for (a, b, c) in [(1, 1, 1), (0, 0, 3), (2, 1, 2), (1, 0, 2)] {
            let d = build_domain(a, b, c).unwrap();
            for e in extremes(&d, a) {
                let s = write_ensemble(&e).unwrap();
                assert_eq!(parse_ensemble(&s).unwrap(), e);
                assert_eq!(write_ensemble(&parse_ensemble(&s).unwrap()).unwrap(), s);
            }
        }
    }

    #[test]
    fn augmented_records_round_trip() {
        let d = build_augmented(1, 1, 1, 2).unwrap();
        for e in extremes(&d, 1) {
            let s = write_ensemble(&e).unwrap();
            assert!(s.lines().nth(1).unwrap().starts_with("1 1 1 2 1 "));
            assert_eq!(parse_ensemble(&s).unwrap(), e);
        }
    }

    #[test]
    fn defective_records_round_trip() {
        let d = build_domain(1, 2, 1).unwrap();
        let e = DefectiveEnsemble::staircase(&d).unwrap();
        let s = write_defective(&e);
        let recs = parse_records(&s).unwrap();
        assert_eq!(recs, vec![Record::Defective(e)]);
    }

    #[test]
    fn several_records_in_one_file() {
        let d = build_domain(1, 1, 1).unwrap();
        let es = extremes(&d, 1);
        let s: String = es.iter().map(|e| write_ensemble(e).unwrap() + "\n").collect();
        let recs = parse_records(&s).unwrap();
        assert_eq!(recs, es.into_iter().map(Record::Paths).collect::<Vec<_>>());
    }

    #[test]
    fn corrupted_records_are_rejected() {
        let d = build_domain(1, 1, 1).unwrap();
        let e = &extremes(&d, 1)[0];
        let s = write_ensemble(e).unwrap();
        let wrong_k = s.replacen("1 1 1 0 1 ", "1 1 1 0 1 9", 1);
        assert!(matches!(parse_ensemble(&wrong_k), Err(FormatError::Mismatch { .. }) | Err(FormatError::Parse { .. })));
        let mut lines: Vec<&str> = s.lines().collect();
        lines.pop();
        assert!(matches!(parse_ensemble(&lines.join("\n")), Err(FormatError::Truncated)));
        let flipped = s.replacen("1\n", "0\n", 1);
        assert!(parse_ensemble(&flipped).is_err());
        assert!(parse_ensemble("x y z\n").is_err());
    }

    #[test]
    fn statistics_survive_serialisation() {
        use threebundle_core::analysis::boundary_error;
        use threebundle_core::sampler::cftp_sample;

        let d = build_domain(3, 2, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        let p = threebundle_core::formulas::CurveParams::new(3.0 / 8.0, 2.0 / 8.0, 3.0 / 8.0).unwrap();
        for seed in 0..4 {
            let e = cftp_sample(&d, &bd, 3, seed).unwrap();
            let back = parse_ensemble(&write_ensemble(&e).unwrap()).unwrap();
            assert_eq!(back.exit_k().unwrap(), e.exit_k().unwrap());
            let be = |x: &PathEnsemble| boundary_error(&x.rightmost_path(), &p, 8).unwrap().hausdorff;
            assert_eq!(be(&back).to_bits(), be(&e).to_bits());
        }
    }
}
