//! Exhaustive enumeration of small ensemble families.
//!
//! Paths are built one at a time from the south-east. A new path may meet an
//! earlier one only at a vertex where the earlier path turns from south to
//! east and the new one from west to north, which is exactly how tracing
//! splits a doubly occupied vertex. Every occupancy pattern is therefore
//! produced once.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ensemble::{domain_wall_boundary, BoundaryData, ConfigView, DefectiveEnsemble, Path, PathEnsemble};
use crate::error::{EnsembleError, ExactError};
use crate::formulas::ExactDist;
use crate::geometry::{build_domain, Domain, EdgeSlot, LatticePoint};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// One enumerated ensemble, borrowed from the search state.
pub struct Visit<'a> {
    pub domain: &'a Domain,
    pub boundary: &'a BoundaryData,
    pub bits: &'a [u8],
    pub paths: &'a [Path],
}

impl Visit<'_> {
    pub fn to_ensemble(&self) -> PathEnsemble {
        PathEnsemble::from_raw(*self.domain, self.boundary.clone(), self.bits.to_vec())
    }
}

struct Search<'a, F: FnMut(&Visit)> {
    d: Domain,
    bd: &'a BoundaryData,
    r: u32,
    cap: u64,
    bits: Vec<u8>,
    // per vertex on the bounding box: 0 free, else in/out roles of its first path
    occ: Vec<u8>,
    paths: Vec<Path>,
    used_diag: u32,
    found: u64,
    visit: F,
    exit_vertex: Vec<LatticePoint>,
}

const IN_S: u8 = 1;
const IN_W: u8 = 2;
const OUT_N: u8 = 4;
const OUT_E: u8 = 8;

impl<F: FnMut(&Visit)> Search<'_, F> {
    fn vidx(&self, p: LatticePoint) -> usize {
        ((p.y - self.d.ybot()) * self.d.width() + p.x - 1) as usize
    }

    fn start_path(&mut self, i: usize) -> Result<(), ExactError> {
        if i == self.bd.len() {
            if self.used_diag == self.r {
                self.found += 1;
                if self.found > self.cap {
                    return Err(ExactError::CapExceeded { cap: self.cap, lower_bound: self.found });
                }
                (self.visit)(&Visit { domain: &self.d, boundary: self.bd, bits: &self.bits, paths: &self.paths });
            }
            return Ok(());
        }
        let remaining = (self.bd.len() - i) as u32;
        if self.used_diag + remaining < self.r {
            return Ok(());
        }
        let u = self.bd.u[i];
        let Some(s) = self.d.entrance_slot(u) else {
            return Ok(());
        };
        if self.bits[s] == 1 {
            return Ok(());
        }
        self.bits[s] = 1;
        let head = self.d.slot_head(self.d.slot_at(s));
        self.paths.push(vec![u, head]);
        let res = self.walk(i, head, u.x == 0, false);
        self.paths.pop();
        self.bits[s] = 0;
        res
    }

    fn walk(&mut self, i: usize, cur: LatticePoint, from_west: bool, diag: bool) -> Result<(), ExactError> {
        let target = self.exit_vertex[i];
        if cur.x > target.x || cur.y > target.y {
            return Ok(());
        }
        let vi = self.vidx(cur);
        let prev = self.occ[vi];
        let (vout, hout) = self.d.out_slots(cur);
        for (slot, north) in [(vout, true), (hout, false)] {
            if self.bits[slot] == 1 {
                continue;
            }
            let s = self.d.slot_at(slot);
            if !self.d.slot_exists(s) {
                continue;
            }
            if prev != 0 && !(prev == IN_S | OUT_E && from_west && north) {
                continue;
            }
            let is_diag = matches!(s, EdgeSlot::D { .. });
            if is_diag && (diag || self.used_diag >= self.r) {
                continue;
            }
            let next = self.d.slot_head(s);
            self.bits[slot] = 1;
            if prev == 0 {
                self.occ[vi] = (if from_west { IN_W } else { IN_S }) | if north { OUT_N } else { OUT_E };
            }
            if is_diag {
                self.used_diag += 1;
            }
            self.paths[i].push(next);
            let res = if self.d.contains(next) {
                self.walk(i, next, !matches!(s, EdgeSlot::V { .. }), diag || is_diag)
            } else if next == self.bd.w[i] {
                self.start_path(i + 1)
            } else {
                Ok(())
            };
            self.paths[i].pop();
            if is_diag {
                self.used_diag -= 1;
            }
            self.occ[vi] = prev;
            self.bits[slot] = 0;
            res?;
        }
        Ok(())
    }
}

/// Calls `visit` once for every `r`-restricted ensemble with the given
/// boundary data and returns their number.
pub fn enumerate_with<F: FnMut(&Visit)>(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    cap: u64,
    visit: F,
) -> Result<u64, ExactError> {
    boundary.check_admissible(domain).map_err(ExactError::Ensemble)?;
    let d = *domain;
    let exit_vertex = boundary
        .w
        .iter()
        .map(|&w| {
            if w.x == d.width() + 1 {
                LatticePoint::new(d.width(), w.y)
            } else {
                LatticePoint::new(w.x, d.ytop())
            }
        })
        .collect();
    let mut s = Search {
        d,
        bd: boundary,
        r,
        cap,
        bits: vec![0; d.n_slots()],
        occ: vec![0; (d.width() * d.n_rows()) as usize],
        paths: Vec::new(),
        used_diag: 0,
        found: 0,
        visit,
        exit_vertex,
    };
    s.start_path(0)?;
    Ok(s.found)
}

/// Summary of an enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationResult {
    pub count: BigUint,
    /// Histogram of `K` (plain domains) or `Phi` (augmented domains) under
    /// domain-wall data; empty otherwise.
    pub exit_hist: BTreeMap<i64, BigUint>,
    /// Per-vertex number of ensembles in which the vertex is frozen, when requested.
    pub frozen_counts: Option<Vec<(LatticePoint, BigUint)>>,
}

impl EnumerationResult {
    /// Exact law of the exit column.
    pub fn exit_pmf(&self) -> Option<ExactDist> {
        let lo = *self.exit_hist.keys().next()?;
        let hi = *self.exit_hist.keys().next_back()?;
        let w: Vec<BigUint> = (lo..=hi)
            .map(|k| self.exit_hist.get(&k).cloned().unwrap_or_default())
            .collect();
        ExactDist::from_weights(lo, &w)
    }

    /// Exact frozen frequency per vertex.
    pub fn frozen_frequency(&self) -> Option<Vec<(LatticePoint, BigRational)>> {
        let c = BigRational::from_integer(self.count.clone().into());
        self.frozen_counts.as_ref().map(|v| {
            v.iter()
                .map(|(p, n)| (*p, BigRational::from_integer(n.clone().into()) / c.clone()))
                .collect()
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub cap: u64,
    pub frozen: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, frozen: false }
    }
}

/// Counts the family and, for domain-wall data, the law of its exit column.
pub fn enumerate(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    opts: EnumOptions,
) -> Result<EnumerationResult, ExactError> {
    let dw = *boundary == domain_wall_boundary(domain);
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    let verts: Vec<LatticePoint> = domain.vertices().collect();
    let mut frozen = vec![0u64; verts.len()];
    let n = enumerate_with(domain, boundary, r, opts.cap, |v| {
        if dw {
            let p1 = &v.paths[0];
            let k = if domain.is_augmented() {
                p1.windows(2).find(|w| w[0].y == 0 && w[1].y == 1).map(|w| w[0].x)
            } else {
                p1.windows(2).find(|w| w[0].y == domain.ybot() && w[1].y > w[0].y).map(|w| w[0].x)
            };
            if let Some(k) = k {
                *hist.entry(k).or_default() += 1;
            }
        }
        if opts.frozen {
            let e = v.to_ensemble();
            let map = crate::ensemble::frozen_region(&ConfigView::of_ensemble(&e));
            for (j, &p) in verts.iter().enumerate() {
                if map.is_frozen(p) {
                    frozen[j] += 1;
                }
            }
        }
    })?;
    Ok(EnumerationResult {
        count: BigUint::from(n),
        exit_hist: hist.into_iter().map(|(k, c)| (k, BigUint::from(c))).collect(),
        frozen_counts: opts
            .frozen
            .then(|| verts.iter().zip(&frozen).map(|(&p, &c)| (p, BigUint::from(c))).collect()),
    })
}

/// All ensembles of a family, materialised.
pub fn collect(domain: &Domain, boundary: &BoundaryData, r: u32, cap: u64) -> Result<Vec<PathEnsemble>, ExactError> {
    let mut out = Vec::new();
    enumerate_with(domain, boundary, r, cap, |v| out.push(v.to_ensemble()))?;
    Ok(out)
}

/// Exact law of `K` on the `A`-restricted domain-wall family of `T_{A,B,C}`.
pub fn empirical_refined(a: u32, b: u32, c: u32) -> Result<ExactDist, ExactError> {
    let d = build_domain(a, b, c).map_err(|e| ExactError::Ensemble(e.into()))?;
    let res = enumerate(&d, &domain_wall_boundary(&d), a, EnumOptions::default())?;
    let lo = 1;
    let hi = d.width();
    let w: Vec<BigUint> = (lo..=hi)
        .map(|k| res.exit_hist.get(&k).cloned().unwrap_or_default())
        .collect();
    Ok(ExactDist::from_weights(lo, &w).expect("nonempty family"))
}

struct DefectSearch<'a, F: FnMut(&DefectiveEnsemble)> {
    d: Domain,
    verts: Vec<LatticePoint>,
    bits: Vec<u8>,
    d1: Vec<u8>,
    ending: u32,
    cap: u64,
    found: u64,
    visit: &'a mut F,
}

impl<F: FnMut(&DefectiveEnsemble)> DefectSearch<'_, F> {
    fn go(&mut self, i: usize) -> Result<(), ExactError> {
        let d = self.d;
        if i == self.verts.len() {
            if self.ending != d.a() {
                return Ok(());
            }
            self.found += 1;
            if self.found > self.cap {
                return Err(ExactError::CapExceeded { cap: self.cap, lower_bound: self.found });
            }
            let d2 = self.d1.iter().map(|&v| 1 - v).collect();
            let e = DefectiveEnsemble::new(d, self.bits.clone(), self.d1.clone(), d2)?;
            (self.visit)(&e);
            return Ok(());
        }
        let p = self.verts[i];
        let (vin, hin) = d.in_slots(p);
        let west = if p.x == d.xu() && p.y > d.yl() {
            1 - self.d1[(p.y - d.yl() - 1) as usize]
        } else {
            self.bits[hin]
        };
        let total = self.bits[vin] + west;
        let lower_end = p.y == d.yl() && p.x < d.xu();
        let (vout, hout) = d.out_slots(p);
        for (n, e) in [(0u8, 0u8), (1, 0), (0, 1), (1, 1)] {
            if n + e != total || (p.x == d.width() && e == 1) || (p.y == d.ytop() && n == 0) {
                continue;
            }
            if lower_end {
                if n == 1 && self.ending == d.a() {
                    continue;
                }
                self.d1[(d.xu() - p.x - 1) as usize] = n;
                self.ending += n as u32;
            } else {
                self.bits[vout] = n;
            }
            self.bits[hout] = e;
            let res = self.go(i + 1);
            if lower_end {
                self.d1[(d.xu() - p.x - 1) as usize] = 0;
                self.ending -= n as u32;
            } else {
                self.bits[vout] = 0;
            }
            self.bits[hout] = 0;
            res?;
        }
        Ok(())
    }
}

/// Visits every defective domain-wall configuration of `T_{A,B,C}`, vertex
/// by vertex from the bottom row up.
pub fn enumerate_defective_with<F: FnMut(&DefectiveEnsemble)>(
    domain: &Domain,
    cap: u64,
    mut visit: F,
) -> Result<u64, ExactError> {
    let d = *domain;
    if d.is_augmented() {
        return Err(EnsembleError::UnsupportedBoundary.into());
    }
    let mut bits = vec![0u8; d.n_slots()];
    for y in 1..=d.yl() {
        bits[d.index(EdgeSlot::H { x: 0, y })] = 1;
    }
    let mut s = DefectSearch {
        d,
        verts: d.vertices().collect(),
        bits,
        d1: vec![0; d.n_diagonals() as usize],
        ending: 0,
        cap,
        found: 0,
        visit: &mut visit,
    };
    s.go(0)?;
    Ok(s.found)
}

/// Exact law of `K` in the defective model on `T_{A,B,C}`.
pub fn defective_refined(a: u32, b: u32, c: u32) -> Result<ExactDist, ExactError> {
    let d = build_domain(a, b, c).map_err(|e| ExactError::Ensemble(e.into()))?;
    let mut hist = vec![0u64; d.width() as usize];
    enumerate_defective_with(&d, DEFAULT_CAP, |e| hist[(e.exit_k() - 1) as usize] += 1)?;
    let w: Vec<BigUint> = hist.into_iter().map(BigUint::from).collect();
    ExactDist::from_weights(1, &w).ok_or(ExactError::Ensemble(EnsembleError::Infeasible))
}

/// Number of `n x n` alternating sign matrices, `prod_{k<n} (3k+1)! / (n+k)!`.
pub fn asm_count(n: u32) -> BigUint {
    let fact = |m: u32| -> BigUint { (1..=m).fold(BigUint::one(), |acc, i| acc * BigUint::from(i)) };
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for k in 0..n {
        num *= fact(3 * k + 1);
        den *= fact(n + k);
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn square_counts_are_asm_numbers() {
        for (c, want) in [(1u32, 1u64), (2, 2), (3, 7), (4, 42)] {
            let d = build_domain(0, 0, c).unwrap();
            let n = enumerate_with(&d, &domain_wall_boundary(&d), 0, DEFAULT_CAP, |_| {}).unwrap();
            assert_eq!(n, want);
            assert_eq!(asm_count(c), BigUint::from(want));
        }
    }

    #[test]
    fn three_square_refined() {
        let p = empirical_refined(0, 0, 3).unwrap();
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(p.probs(), vec![r(2, 7), r(3, 7), r(2, 7)]);
    }

    #[test]
    fn cap_reports_lower_bound() {
        let d = build_domain(0, 0, 4).unwrap();
        let err = enumerate_with(&d, &domain_wall_boundary(&d), 0, 10, |_| {}).unwrap_err();
        assert_eq!(err, ExactError::CapExceeded { cap: 10, lower_bound: 11 });
    }

    #[test]
    fn infeasible_restriction_counts_zero() {
        let d = build_domain(0, 0, 2).unwrap();
        assert_eq!(enumerate_with(&d, &domain_wall_boundary(&d), 1, DEFAULT_CAP, |_| {}).unwrap(), 0);
    }

    #[test]
    fn defective_counts() {
        for ((a, b, c), want) in [((1, 0, 2), 7u64), ((1, 1, 1), 14), ((1, 1, 2), 126), ((1, 2, 2), 2574), ((2, 1, 2), 2574)] {
            let d = build_domain(a, b, c).unwrap();
            assert_eq!(enumerate_defective_with(&d, DEFAULT_CAP, |_| {}).unwrap(), want);
        }
    }

    #[test]
    fn defective_square_is_plain() {
        for c in 1..=4 {
            let d = build_domain(0, 0, c).unwrap();
            let n = enumerate_defective_with(&d, DEFAULT_CAP, |_| {}).unwrap();
            assert_eq!(BigUint::from(n), asm_count(c));
        }
    }

    #[test]
    fn defective_law_on_small_domain() {
        let p = defective_refined(1, 1, 2).unwrap();
        let r = |a: i64| BigRational::new(a.into(), 126.into());
        assert_eq!(p.probs(), vec![r(7), r(28), r(42), r(35), r(14)]);
    }

    #[test]
    fn visits_are_valid_and_distinct() {
        let d = build_domain(1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let all = collect(&d, &bd, 1, DEFAULT_CAP).unwrap();
        for e in &all {
            e.validate_restricted(1).unwrap();
        }
        let mut bits: Vec<_> = all.iter().map(|e| e.bits().to_vec()).collect();
        bits.sort();
        bits.dedup();
        assert_eq!(bits.len(), all.len());
    }
}
