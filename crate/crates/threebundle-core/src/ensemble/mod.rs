//! Directed path ensembles stored as edge occupancy.
//!
//! Every edge slot of the domain carries one bit. Paths are recovered by
//! tracing from the entrances; at a vertex used by two paths the one arriving
//! from the west leaves north and the one arriving from the south leaves east,
//! which keeps the traced paths non-crossing.

pub mod defect;
mod frozen;
mod order;
mod rotate;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::EnsembleError;
use crate::geometry::{Domain, EdgeSlot, LatticePoint};

pub use defect::{from_defective, to_defective, DefectiveEnsemble};
pub use frozen::{frozen_brute_force, frozen_region, ConfigView, FrozenMap, VertexClass};
pub use order::{compare, compare_shifted, path_le, Comparison};
pub use rotate::{rotate, rotate_defective};

/// A path as its vertex sequence, including the outside entrance and exit points.
pub type Path = Vec<LatticePoint>;

/// Arrow configuration `(i1, j1; i2, j2)`: vertical in, horizontal in,
/// vertical out, horizontal out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArrowConfig {
    pub i1: bool,
    pub j1: bool,
    pub i2: bool,
    pub j2: bool,
}

impl ArrowConfig {
    pub const fn new(i1: u8, j1: u8, i2: u8, j2: u8) -> Self {
        Self { i1: i1 != 0, j1: j1 != 0, i2: i2 != 0, j2: j2 != 0 }
    }

    pub const EMPTY: ArrowConfig = ArrowConfig::new(0, 0, 0, 0);
    pub const FULL: ArrowConfig = ArrowConfig::new(1, 1, 1, 1);
    pub const VERTICAL: ArrowConfig = ArrowConfig::new(1, 0, 1, 0);
    pub const HORIZONTAL: ArrowConfig = ArrowConfig::new(0, 1, 0, 1);
    pub const WEST_NORTH: ArrowConfig = ArrowConfig::new(0, 1, 1, 0);
    pub const SOUTH_EAST: ArrowConfig = ArrowConfig::new(1, 0, 0, 1);

    pub const SIX: [ArrowConfig; 6] = [
        Self::EMPTY,
        Self::FULL,
        Self::VERTICAL,
        Self::HORIZONTAL,
        Self::WEST_NORTH,
        Self::SOUTH_EAST,
    ];

    pub fn is_valid(&self) -> bool {
        self.i1 as u8 + self.j1 as u8 == self.i2 as u8 + self.j2 as u8
    }
}

/// Entrance points `u` and exit points `w`, both listed from the south-east.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryData {
    pub u: Vec<LatticePoint>,
    pub w: Vec<LatticePoint>,
}

impl BoundaryData {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Entrances on the west or south side, exits on the east or north side,
    /// each tuple strictly ordered from south-east to north-west.
    pub fn check_admissible(&self, domain: &Domain) -> Result<(), EnsembleError> {
        if self.u.len() != self.w.len() {
            return Err(EnsembleError::InadmissibleBoundary(format!(
                "{} entrances but {} exits",
                self.u.len(),
                self.w.len()
            )));
        }
        for &p in &self.u {
            if domain.entrance_slot(p).is_none() {
                return Err(EnsembleError::InadmissibleBoundary(format!(
                    "({}, {}) is not an entrance point",
                    p.x, p.y
                )));
            }
        }
        for &p in &self.w {
            if domain.exit_slot(p).is_none() {
                return Err(EnsembleError::InadmissibleBoundary(format!(
                    "({}, {}) is not an exit point",
                    p.x, p.y
                )));
            }
        }
        for pts in [&self.u, &self.w] {
            for k in 1..pts.len() {
                let (a, b) = (pts[k - 1], pts[k]);
                if !(b.x <= a.x && b.y >= a.y && a != b) {
                    return Err(EnsembleError::InadmissibleBoundary(format!(
                        "({}, {}) does not lie strictly north-west of ({}, {})",
                        b.x, b.y, a.x, a.y
                    )));
                }
            }
        }
        Ok(())
    }

    /// Bit vector with exactly the boundary slots of this data set.
    pub fn boundary_bits(&self, domain: &Domain) -> Vec<u8> {
        let mut bits = vec![0u8; domain.n_slots()];
        for &p in &self.u {
            if let Some(s) = domain.entrance_slot(p) {
                bits[s] = 1;
            }
        }
        for &p in &self.w {
            if let Some(s) = domain.exit_slot(p) {
                bits[s] = 1;
            }
        }
        bits
    }
}

/// Domain-wall boundary data: on `T_{A,B,C}` the `A + C` entrances `(0, i)`,
/// `A` exits on the east wall and `C` on the top row; on the augmented domain
/// an extra first path enters at `(0, -psi)` and one more exit is used on top.
pub fn domain_wall_boundary(domain: &Domain) -> BoundaryData {
    let (a, b, c) = (domain.a() as i64, domain.b() as i64, domain.c() as i64);
    let ytop = domain.ytop();
    let mut u = Vec::new();
    let mut w = Vec::new();
    if domain.is_augmented() {
        u.push(LatticePoint::new(0, -(domain.psi() as i64)));
        for i in 2..=a + c + 1 {
            u.push(LatticePoint::new(0, i - 1));
        }
        for i in 1..=a + c + 1 {
            if i <= a {
                w.push(LatticePoint::new(a + 2 * b + c + 2, a + b + c + i));
            } else {
                w.push(LatticePoint::new(2 * a + 2 * b + c - i + 2, ytop + 1));
            }
        }
    } else {
        for i in 1..=a + c {
            u.push(LatticePoint::new(0, i));
            if i <= a {
                w.push(LatticePoint::new(a + 2 * b + c + 1, a + b + c + i));
            } else {
                w.push(LatticePoint::new(2 * a + 2 * b + c - i + 1, ytop + 1));
            }
        }
    }
    BoundaryData { u, w }
}

/// One failed check of [`PathEnsemble::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BitLength { expected: usize, found: usize },
    NonexistentEdge { slot: EdgeSlot },
    BoundaryMismatch { slot: EdgeSlot },
    Conservation { vertex: LatticePoint },
    PathCount { expected: usize, found: usize },
    WrongExit { path: usize, expected: LatticePoint, found: LatticePoint },
    Ordering { path: usize },
    RestrictionCount { expected: u32, found: u32 },
    SharedEdge { slot: EdgeSlot },
    NotAStep { from: LatticePoint, to: LatticePoint },
    Inadmissible(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BitLength { expected, found } => {
                write!(f, "bit vector has length {found}, expected {expected}")
            }
            Violation::NonexistentEdge { slot } => write!(f, "occupied nonexistent edge {slot:?}"),
            Violation::BoundaryMismatch { slot } => {
                write!(f, "boundary edge {slot:?} disagrees with the boundary data")
            }
            Violation::Conservation { vertex } => {
                write!(f, "arrow conservation fails at ({}, {})", vertex.x, vertex.y)
            }
            Violation::PathCount { expected, found } => {
                write!(f, "path count {found} differs from {expected}")
            }
            Violation::WrongExit { path, expected, found } => write!(
                f,
                "path {} exits at ({}, {}) instead of ({}, {})",
                path + 1,
                found.x,
                found.y,
                expected.x,
                expected.y
            ),
            Violation::Ordering { path } => {
                write!(f, "path {} is not north-west of path {}", path + 2, path + 1)
            }
            Violation::RestrictionCount { expected, found } => {
                write!(f, "{found} paths use a diagonal edge, expected {expected}")
            }
            Violation::SharedEdge { slot } => write!(f, "shared edge {slot:?}"),
            Violation::NotAStep { from, to } => write!(
                f,
                "({}, {}) -> ({}, {}) is not an edge",
                from.x, from.y, to.x, to.y
            ),
            Violation::Inadmissible(s) => write!(f, "{s}"),
        }
    }
}

fn report(v: &[Violation]) -> String {
    let mut s = String::new();
    for (k, x) in v.iter().enumerate() {
        if k > 0 {
            s.push_str("; ");
        }
        s.push_str(&format!("{x}"));
    }
    s
}

/// An ordered family of edge-disjoint directed paths with given boundary data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathEnsemble {
    domain: Domain,
    boundary: BoundaryData,
    bits: Vec<u8>,
}

impl PathEnsemble {
    /// Builds and validates; `r` is checked when given.
    pub fn new(
        domain: Domain,
        boundary: BoundaryData,
        bits: Vec<u8>,
        r: Option<u32>,
    ) -> Result<Self, EnsembleError> {
        let e = Self { domain, boundary, bits };
        let v = e.violations(r);
        if v.is_empty() {
            Ok(e)
        } else {
            Err(EnsembleError::Invalid(report(&v)))
        }
    }

    /// Builds without validation. Callers must guarantee validity.
    pub fn from_raw(domain: Domain, boundary: BoundaryData, bits: Vec<u8>) -> Self {
        Self { domain, boundary, bits }
    }

    /// Builds an ensemble from explicit vertex sequences (outside endpoints included).
    pub fn from_paths(
        domain: Domain,
        boundary: BoundaryData,
        paths: &[Path],
        r: Option<u32>,
    ) -> Result<Self, Vec<Violation>> {
        let mut bits = vec![0u8; domain.n_slots()];
        let mut errs = Vec::new();
        for p in paths {
            for w in p.windows(2) {
                match step_slot(&domain, w[0], w[1]) {
                    Some(s) => {
                        let i = domain.index(s);
                        if bits[i] == 1 {
                            errs.push(Violation::SharedEdge { slot: s });
                        }
                        bits[i] = 1;
                    }
                    None => errs.push(Violation::NotAStep { from: w[0], to: w[1] }),
                }
            }
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        let e = Self { domain, boundary, bits };
        let v = e.violations(r);
        if v.is_empty() {
            Ok(e)
        } else {
            Err(v)
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
    pub(crate) fn bits_mut(&mut self) -> &mut Vec<u8> {
        &mut self.bits
    }
    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
    pub fn n_paths(&self) -> usize {
        self.boundary.len()
    }

    /// Number of paths using a diagonal edge (a path uses at most one).
    pub fn restriction(&self) -> u32 {
        let start = self.domain.n_h_slots() + self.domain.n_v_slots();
        self.bits[start..].iter().map(|&b| b as u32).sum()
    }

    pub fn bit(&self, slot: EdgeSlot) -> bool {
        self.domain.raw_index(slot).map(|i| self.bits[i] == 1).unwrap_or(false)
    }

    pub fn config_at(&self, p: LatticePoint) -> ArrowConfig {
        let (vin, hin) = self.domain.in_slots(p);
        let (vout, hout) = self.domain.out_slots(p);
        ArrowConfig::new(self.bits[vin], self.bits[hin], self.bits[vout], self.bits[hout])
    }

    /// Structured validation; an empty list means the ensemble is valid.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let v = self.violations(None);
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    /// Like [`PathEnsemble::validate`], additionally checking the restriction count.
    pub fn validate_restricted(&self, r: u32) -> Result<(), Vec<Violation>> {
        let v = self.violations(Some(r));
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    fn violations(&self, r: Option<u32>) -> Vec<Violation> {
        let d = &self.domain;
        let mut out = Vec::new();
        if self.bits.len() != d.n_slots() {
            out.push(Violation::BitLength { expected: d.n_slots(), found: self.bits.len() });
            return out;
        }
        if let Err(e) = self.boundary.check_admissible(d) {
            out.push(Violation::Inadmissible(format!("{e}")));
            return out;
        }
        let expected = self.boundary.boundary_bits(d);
        let mut entrances = 0usize;
        for i in 0..d.n_slots() {
            let s = d.slot_at(i);
            let b = self.bits[i];
            if b > 1 {
                out.push(Violation::NonexistentEdge { slot: s });
                continue;
            }
            if !d.slot_exists(s) {
                if b != 0 {
                    out.push(Violation::NonexistentEdge { slot: s });
                }
                continue;
            }
            if d.is_boundary_slot(s) {
                let entering = d.contains(d.slot_head(s));
                if entering && b == 1 {
                    entrances += 1;
                }
            }
        }
        if entrances != self.boundary.len() {
            out.push(Violation::PathCount { expected: self.boundary.len(), found: entrances });
        }
        for (i, &want) in expected.iter().enumerate() {
            let s = d.slot_at(i);
            if d.is_boundary_slot(s) && self.bits[i] != want {
                out.push(Violation::BoundaryMismatch { slot: s });
            }
        }
        if !out.is_empty() {
            return out;
        }
        for p in d.vertices() {
            if !self.config_at(p).is_valid() {
                out.push(Violation::Conservation { vertex: p });
            }
        }
        if !out.is_empty() {
            return out;
        }
        let paths = self.paths();
        for (i, p) in paths.iter().enumerate() {
            let end = *p.last().unwrap();
            if end != self.boundary.w[i] {
                out.push(Violation::WrongExit { path: i, expected: self.boundary.w[i], found: end });
            }
        }
        for i in 1..paths.len() {
            if !path_le(&paths[i], &paths[i - 1]) {
                out.push(Violation::Ordering { path: i - 1 });
            }
        }
        if let Some(r) = r {
            let found = self.restriction();
            if found != r {
                out.push(Violation::RestrictionCount { expected: r, found });
            }
        }
        out
    }

    /// All paths, `p_1` (south-east most) first.
    pub fn paths(&self) -> Vec<Path> {
        self.boundary
            .u
            .iter()
            .map(|&u| trace(&self.domain, &self.bits, u))
            .collect()
    }

    /// `p_1`, the rightmost path.
    pub fn rightmost_path(&self) -> Path {
        trace(&self.domain, &self.bits, self.boundary.u[0])
    }

    fn require_domain_wall(&self) -> Result<(), EnsembleError> {
        if self.boundary != domain_wall_boundary(&self.domain) {
            return Err(EnsembleError::UnsupportedBoundary);
        }
        Ok(())
    }

    /// Column where the rightmost path leaves the bottom row of `T_{A,B,C}`.
    pub fn exit_k(&self) -> Result<i64, EnsembleError> {
        self.require_domain_wall()?;
        if self.domain.is_augmented() {
            return Err(EnsembleError::UnsupportedBoundary);
        }
        let p = self.rightmost_path();
        let y0 = self.domain.ybot();
        p.windows(2)
            .find(|w| w[0].y == y0 && w[1].y > y0)
            .map(|w| w[0].x)
            .ok_or_else(|| EnsembleError::Invalid("rightmost path never leaves row 1".into()))
    }

    /// Column of the edge `(phi, 0) -> (phi, 1)` on the added path of an
    /// augmented ensemble; on a plain domain this is [`PathEnsemble::exit_k`].
    pub fn phi(&self) -> Result<i64, EnsembleError> {
        if !self.domain.is_augmented() {
            return self.exit_k();
        }
        self.require_domain_wall()?;
        let p = self.rightmost_path();
        p.windows(2)
            .find(|w| w[0].y == 0 && w[1].y == 1 && w[0].x == w[1].x)
            .map(|w| w[0].x)
            .ok_or_else(|| EnsembleError::Invalid("added path never crosses row 0".into()))
    }
}

/// Slot of the unit step (or diagonal) `p -> q`, if it is one.
pub fn step_slot(domain: &Domain, p: LatticePoint, q: LatticePoint) -> Option<EdgeSlot> {
    let s = if q.x == p.x + 1 && q.y == p.y {
        EdgeSlot::H { x: p.x, y: p.y }
    } else if q.x == p.x && q.y == p.y + 1 {
        EdgeSlot::V { x: p.x, y: p.y }
    } else if p.y == domain.yl() && q.x == domain.xu() && q.y - p.y == q.x - p.x && q.y > p.y {
        EdgeSlot::D { m: (q.y - p.y) as u32 }
    } else {
        return None;
    };
    domain.slot_exists(s).then_some(s)
}

/// Traces the path entering at `u`. Occupancy must satisfy conservation.
pub(crate) fn trace(domain: &Domain, bits: &[u8], u: LatticePoint) -> Path {
    let mut out = Vec::new();
    out.push(u);
    let Some(first) = domain.entrance_slot(u) else {
        return out;
    };
    let mut cur = domain.slot_head(domain.slot_at(first));
    let mut from_west = u.x == 0;
    loop {
        out.push(cur);
        if !domain.contains(cur) {
            break;
        }
        let (vout, hout) = domain.out_slots(cur);
        let (bv, bh) = (bits[vout] == 1, bits[hout] == 1);
        let next = match (bv, bh) {
            (true, true) => {
                if from_west {
                    vout
                } else {
                    hout
                }
            }
            (true, false) => vout,
            (false, true) => hout,
            (false, false) => break,
        };
        let slot = domain.slot_at(next);
        from_west = !matches!(slot, EdgeSlot::V { .. });
        cur = domain.slot_head(slot);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_augmented, build_domain};

    #[test]
    fn six_configs_are_exactly_the_valid_ones() {
        let mut n = 0;
        for m in 0..16u8 {
            let c = ArrowConfig::new(m & 1, (m >> 1) & 1, (m >> 2) & 1, (m >> 3) & 1);
            if c.is_valid() {
                n += 1;
                assert!(ArrowConfig::SIX.contains(&c));
            }
        }
        assert_eq!(n, 6);
    }

    #[test]
    fn domain_wall_of_square() {
        let d = build_domain(0, 0, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        assert_eq!(bd.u, vec![LatticePoint::new(0, 1), LatticePoint::new(0, 2), LatticePoint::new(0, 3)]);
        assert!(bd.w.iter().all(|p| p.y == 4));
        bd.check_admissible(&d).unwrap();
    }

    #[test]
    fn domain_wall_of_figure_domain() {
        let d = build_domain(2, 3, 4).unwrap();
        let bd = domain_wall_boundary(&d);
        assert_eq!(bd.len(), 6);
        assert_eq!(bd.u[5], LatticePoint::new(0, 6));
        assert_eq!(bd.w.iter().filter(|p| p.x == 13).count(), 2);
        assert_eq!(bd.w.iter().filter(|p| p.y == 12).count(), 4);
        bd.check_admissible(&d).unwrap();
    }

    #[test]
    fn augmented_first_entrance() {
        let d = build_augmented(1, 1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        assert_eq!(bd.u[0], LatticePoint::new(0, -2));
        assert_eq!(bd.len(), 3);
        bd.check_admissible(&d).unwrap();
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let d = build_domain(1, 1, 1).unwrap();
        let bd = domain_wall_boundary(&d);
        let e = PathEnsemble::from_raw(d, bd, vec![0; d.n_slots()]);
        let v = e.validate().unwrap_err();
        assert!(v.contains(&Violation::PathCount { expected: 2, found: 0 }));
    }

    #[test]
    fn single_path_square() {
        let d = build_domain(0, 0, 1).unwrap();
        let bd = domain_wall_boundary(&d);
        let p = vec![LatticePoint::new(0, 1), LatticePoint::new(1, 1), LatticePoint::new(1, 2)];
        let e = PathEnsemble::from_paths(d, bd, core::slice::from_ref(&p), Some(0)).unwrap();
        assert_eq!(e.paths(), vec![p]);
        assert_eq!(e.exit_k().unwrap(), 1);
    }

    #[test]
    fn shared_edge_is_reported() {
        let d = build_domain(0, 0, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let p1 = vec![
            LatticePoint::new(0, 1),
            LatticePoint::new(1, 1),
            LatticePoint::new(1, 2),
            LatticePoint::new(2, 2),
            LatticePoint::new(2, 3),
        ];
        let p2 = vec![
            LatticePoint::new(0, 2),
            LatticePoint::new(1, 2),
            LatticePoint::new(2, 2),
            LatticePoint::new(2, 3),
        ];
        let err = PathEnsemble::from_paths(d, bd, &[p1, p2], None).unwrap_err();
        assert!(err.iter().any(|v| matches!(v, Violation::SharedEdge { .. })));
    }
}
