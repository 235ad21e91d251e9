//! Partial order on paths and ensembles.
//!
//! `p <= q` when `q` lies in the closed region south-east of `p`. Comparing the
//! leftmost point and the departure point of every row is enough for up-right
//! paths once diagonal edges are split into their unit rises.

use alloc::vec::Vec;

use super::{Path, PathEnsemble};
use crate::error::EnsembleError;
use crate::geometry::LatticePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Less,
    Greater,
    Incomparable,
}

/// Per-row summary `(y, leftmost x, departure x)`; the last row has no departure.
fn rows(p: &[LatticePoint]) -> Vec<(i64, i64, Option<i64>)> {
    let mut dense: Vec<LatticePoint> = Vec::with_capacity(p.len());
    for (k, &q) in p.iter().enumerate() {
        if k > 0 {
            let prev = p[k - 1];
            let dy = q.y - prev.y;
            if dy > 0 && q.x > prev.x {
                // diagonal: one point per row
                for t in 1..dy {
                    dense.push(LatticePoint::new(prev.x + t, prev.y + t));
                }
            }
        }
        dense.push(q);
    }
    let mut out: Vec<(i64, i64, Option<i64>)> = Vec::new();
    for (k, q) in dense.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.0 == q.y => {}
            _ => out.push((q.y, q.x, None)),
        }
        if let Some(n) = dense.get(k + 1) {
            if n.y > q.y {
                out.last_mut().unwrap().2 = Some(q.x);
            }
        }
    }
    out
}

/// Whether `p <= q`, i.e. `q` lies weakly south-east of `p`.
pub fn path_le(p: &Path, q: &Path) -> bool {
    if p.is_empty() || q.is_empty() {
        return p.is_empty() && q.is_empty();
    }
    let rp = rows(p);
    let rq = rows(q);
    let (p_lo, p_hi) = (rp[0].0, rp[rp.len() - 1].0);
    let p_start_x = rp[0].1;
    if rq[rq.len() - 1].0 > p_hi {
        return false;
    }
    for &(y, minx_q, dep_q) in &rq {
        if y < p_lo {
            if minx_q < p_start_x {
                return false;
            }
            continue;
        }
        let (_, minx_p, dep_p) = rp[(y - p_lo) as usize];
        if minx_q < minx_p {
            return false;
        }
        if let (Some(dq), Some(dp)) = (dep_q, dep_p) {
            if dq < dp {
                return false;
            }
        }
    }
    true
}

/// Compares two ensembles path by path.
pub fn compare(a: &PathEnsemble, b: &PathEnsemble) -> Result<Comparison, EnsembleError> {
    compare_shifted(a, b, 0)
}

/// Compares `a` against `b` after dropping the first `shift` paths of `a`:
/// `Less` means `a.p[i + shift] <= b.p[i]` for every path of `b`.
pub fn compare_shifted(
    a: &PathEnsemble,
    b: &PathEnsemble,
    shift: usize,
) -> Result<Comparison, EnsembleError> {
    if a.n_paths() != b.n_paths() + shift {
        return Err(EnsembleError::PathCountMismatch(a.n_paths(), b.n_paths()));
    }
    let pa = a.paths();
    let pb = b.paths();
    let pa = &pa[shift..];
    if pa == &pb[..] {
        return Ok(Comparison::Equal);
    }
    let le = pa.iter().zip(&pb).all(|(x, y)| path_le(x, y));
    let ge = pa.iter().zip(&pb).all(|(x, y)| path_le(y, x));
    Ok(match (le, ge) {
        (true, true) => Comparison::Equal,
        (true, false) => Comparison::Less,
        (false, true) => Comparison::Greater,
        (false, false) => Comparison::Incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(v: &[(i64, i64)]) -> Path {
        v.iter().map(|&(x, y)| LatticePoint::new(x, y)).collect()
    }

    #[test]
    fn reflexive_on_a_staircase() {
        let p = pts(&[(0, 1), (1, 1), (2, 1), (2, 2), (3, 2), (3, 3)]);
        assert!(path_le(&p, &p));
    }

    #[test]
    fn north_west_path_is_smaller() {
        let nw = pts(&[(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (3, 3), (3, 4)]);
        let se = pts(&[(0, 1), (1, 1), (2, 1), (3, 1), (3, 2), (3, 3), (3, 4)]);
        assert!(path_le(&nw, &se));
        assert!(!path_le(&se, &nw));
    }

    #[test]
    fn crossing_paths_are_incomparable() {
        let a = pts(&[(0, 1), (1, 1), (1, 2), (2, 2), (3, 2), (3, 3)]);
        let b = pts(&[(0, 1), (1, 1), (2, 1), (2, 2), (2, 3), (3, 3)]);
        assert!(!path_le(&a, &b) || !path_le(&b, &a));
        let c = pts(&[(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (3, 3)]);
        let d = pts(&[(0, 1), (1, 1), (2, 1), (3, 1), (3, 2), (3, 3)]);
        assert!(path_le(&c, &d));
        let e = pts(&[(0, 1), (1, 1), (1, 2), (2, 2), (3, 2), (3, 3)]);
        let f = pts(&[(0, 1), (1, 1), (2, 1), (2, 2), (2, 3), (3, 3)]);
        // e goes east at row 2 where f goes north: neither is south-east of the other
        assert!(!path_le(&e, &f));
        assert!(!path_le(&f, &e));
    }

    #[test]
    fn diagonal_is_split_per_row() {
        let p = pts(&[(0, 2), (1, 2), (3, 4), (3, 5)]);
        let r = rows(&p);
        assert_eq!(r, vec![(2, 0, Some(1)), (3, 2, Some(2)), (4, 3, Some(3)), (5, 3, None)]);
    }
}
