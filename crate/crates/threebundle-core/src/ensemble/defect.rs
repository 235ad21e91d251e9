//! Defective ensembles and their bijection with `A`-restricted ensembles.
//!
//! In the defective model each diagonal edge carries an arrow on exactly one
//! side: at its lower end (a path of the lower rectangle stops there) or at
//! its upper end (a path of the upper tower starts there). With domain-wall
//! data `A` paths stop and `B` paths start; all `B + C` columns of the tower
//! are exits and the east wall is unused.
//!
//! [`from_defective`] keeps the lower rectangle and, in the tower, swaps the
//! `B` north-west most paths for the `A` north-west most paths of the
//! complement. This map is not injective, and for `B >= 2` it misses part of
//! the `A`-restricted family: on `T_{1,1,1}` 14 defective configurations
//! cover 12 ensembles, on `T_{1,2,2}` 2574 cover 1746 of 2121.

use alloc::vec;
use alloc::vec::Vec;

use super::{domain_wall_boundary, ArrowConfig, PathEnsemble};
use crate::error::EnsembleError;
use crate::geometry::{Domain, EdgeSlot, LatticePoint};

/// A defective domain-wall configuration on `T_{A,B,C}`.
///
/// `bits` uses the slot layout of the domain with the diagonal slots left at
/// zero; `d1[m-1]` is the arrow at the lower end of diagonal `m`, `d2[m-1]`
/// the one at its upper end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefectiveEnsemble {
    domain: Domain,
    bits: Vec<u8>,
    d1: Vec<u8>,
    d2: Vec<u8>,
}

impl DefectiveEnsemble {
    pub fn new(domain: Domain, bits: Vec<u8>, d1: Vec<u8>, d2: Vec<u8>) -> Result<Self, EnsembleError> {
        let e = Self { domain, bits, d1, d2 };
        e.check()?;
        Ok(e)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }
    pub fn lower_diagonal(&self) -> &[u8] {
        &self.d1
    }
    pub fn upper_diagonal(&self) -> &[u8] {
        &self.d2
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [u8], &mut [u8], &mut [u8]) {
        (&mut self.bits, &mut self.d1, &mut self.d2)
    }

    /// A fixed member of the family: lower paths turn north at distinct
    /// columns (the tower columns first, then the `A` lowest diagonals) and
    /// the `B` upper diagonals feed the remaining tower columns.
    pub fn staircase(domain: &Domain) -> Result<Self, EnsembleError> {
        let d = *domain;
        if d.is_augmented() {
            return Err(EnsembleError::UnsupportedBoundary);
        }
        let (a, b, c) = (d.a() as i64, d.b() as i64, d.c() as i64);
        let (w, yl, xu, ytop) = (d.width(), d.yl(), d.xu(), d.ytop());
        let nd = d.n_diagonals() as usize;
        let mut bits = vec![0u8; d.n_slots()];
        let mut d1 = vec![0u8; nd];
        let mut set = |s: EdgeSlot| bits[d.index(s)] = 1;
        for i in 1..=a + c {
            let t = if i <= c { w - i + 1 } else { xu - (i - c) };
            for x in 0..t {
                set(EdgeSlot::H { x, y: i });
            }
            let top = if t >= xu { ytop } else { yl - 1 };
            for y in i..=top {
                set(EdgeSlot::V { x: t, y });
            }
            if t < xu {
                d1[(xu - t - 1) as usize] = 1;
            }
        }
        for j in 1..=b {
            let y = yl + a + j;
            let t = xu + b - j;
            for x in xu..t {
                set(EdgeSlot::H { x, y });
            }
            for y in y..=ytop {
                set(EdgeSlot::V { x: t, y });
            }
        }
        let d2 = d1.iter().map(|&v| 1 - v).collect();
        Self::new(d, bits, d1, d2)
    }

    /// The path entering at `(0, 1)`, traced like [`PathEnsemble::paths`].
    pub fn rightmost_path(&self) -> super::Path {
        super::trace(&self.domain, &self.bits, LatticePoint::new(0, 1))
    }

    /// Column where the path entering at `(0, 1)` leaves the bottom row.
    pub fn exit_k(&self) -> i64 {
        let d = &self.domain;
        (1..=d.width())
            .find(|&x| self.bits[d.index(EdgeSlot::V { x, y: 1 })] == 1)
            .expect("bottom row path turns north")
    }

    /// Configuration at a vertex, the diagonal arrow counted on its own side.
    pub fn config_at(&self, p: LatticePoint) -> ArrowConfig {
        let d = &self.domain;
        let (vin, _) = d.in_slots(p);
        let j1 = if p.x == d.xu() && p.y > d.yl() {
            self.d2[(p.y - d.yl() - 1) as usize]
        } else {
            self.bits[d.index(EdgeSlot::H { x: p.x - 1, y: p.y })]
        };
        let i2 = if p.y == d.yl() && p.x < d.xu() {
            self.d1[(d.xu() - p.x - 1) as usize]
        } else {
            self.bits[d.index(EdgeSlot::V { x: p.x, y: p.y })]
        };
        let (_, hout) = d.out_slots(p);
        ArrowConfig::new(self.bits[vin], j1, i2, self.bits[hout])
    }

    fn check(&self) -> Result<(), EnsembleError> {
        let d = &self.domain;
        if d.is_augmented() {
            return Err(EnsembleError::UnsupportedBoundary);
        }
        let nd = d.n_diagonals() as usize;
        if self.bits.len() != d.n_slots() || self.d1.len() != nd || self.d2.len() != nd {
            return Err(EnsembleError::Invalid("wrong array lengths".into()));
        }
        for m in 0..nd {
            if self.d1[m] + self.d2[m] != 1 {
                return Err(EnsembleError::Invalid("diagonal arrow must sit on exactly one side".into()));
            }
        }
        let ending: u32 = self.d1.iter().map(|&b| b as u32).sum();
        let starting: u32 = self.d2.iter().map(|&b| b as u32).sum();
        if ending != d.a() || starting != d.b() {
            return Err(EnsembleError::DefectBalance { ending, starting });
        }
        let expected = defective_boundary_bits(d);
        for (i, (&bit, &want)) in self.bits.iter().zip(&expected).enumerate() {
            let s = d.slot_at(i);
            if matches!(s, EdgeSlot::D { .. }) {
                if bit != 0 {
                    return Err(EnsembleError::Invalid("diagonal slot must be empty".into()));
                }
                continue;
            }
            if bit > 1 || (!d.slot_exists(s) && bit != 0) {
                return Err(EnsembleError::Invalid("occupied nonexistent edge".into()));
            }
            if d.is_boundary_slot(s) && bit != want {
                return Err(EnsembleError::Invalid("boundary edge disagrees with domain-wall data".into()));
            }
        }
        for p in d.vertices() {
            if !self.config_at(p).is_valid() {
                return Err(EnsembleError::Invalid(alloc::format!(
                    "arrow conservation fails at ({}, {})",
                    p.x,
                    p.y
                )));
            }
        }
        Ok(())
    }
}

/// Boundary bits of the defective model: all west entrances, all tower
/// columns as exits.
fn defective_boundary_bits(d: &Domain) -> Vec<u8> {
    let mut bits = vec![0u8; d.n_slots()];
    for y in 1..=d.yl() {
        bits[d.index(EdgeSlot::H { x: 0, y })] = 1;
    }
    for x in d.xu()..=d.width() {
        bits[d.index(EdgeSlot::V { x, y: d.ytop() })] = 1;
    }
    bits
}

/// Slots of the tower, including its bottom interface and the diagonal slots.
pub fn tower_slots(d: &Domain) -> Vec<usize> {
    let mut out = Vec::new();
    for y in d.yl()..=d.ytop() {
        for x in d.xu()..=d.width() {
            out.push(d.index(EdgeSlot::V { x, y }));
        }
    }
    for y in d.yl() + 1..=d.ytop() {
        for x in d.xu()..=d.width() {
            out.push(d.index(EdgeSlot::H { x, y }));
        }
    }
    for m in 1..=d.n_diagonals() {
        out.push(d.index(EdgeSlot::D { m }));
    }
    out
}

/// Entrance slots of the tower from south-east to north-west.
fn tower_entrances(d: &Domain) -> Vec<usize> {
    let mut out = Vec::new();
    for x in (d.xu()..=d.width()).rev() {
        out.push(d.index(EdgeSlot::V { x, y: d.yl() }));
    }
    for m in 1..=d.n_diagonals() {
        out.push(d.index(EdgeSlot::D { m }));
    }
    out
}

/// Edge sets of the paths of a tower configuration, south-east most first.
pub fn tower_paths_rule(d: &Domain, bits: &[u8], crossing: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in tower_entrances(d) {
        if bits[s] == 0 {
            continue;
        }
        let mut edges = vec![s];
        let slot = d.slot_at(s);
        let mut from_west = !matches!(slot, EdgeSlot::V { .. });
        let mut cur = d.slot_head(slot);
        while d.contains(cur) {
            let (vout, hout) = d.out_slots(cur);
            let next = match (bits[vout] == 1, bits[hout] == 1) {
                (true, true) => {
                    if from_west != crossing {
                        vout
                    } else {
                        hout
                    }
                }
                (true, false) => vout,
                (false, true) => hout,
                (false, false) => break,
            };
            edges.push(next);
            let ns = d.slot_at(next);
            from_west = !matches!(ns, EdgeSlot::V { .. });
            cur = d.slot_head(ns);
        }
        out.push(edges);
    }
    out
}

fn tower_paths(d: &Domain, bits: &[u8]) -> Vec<Vec<usize>> {
    tower_paths_rule(d, bits, false)
}

/// `bits` on the tower with the `remove` north-west most paths of `bits`
/// deleted and the `add` north-west most paths of its complement inserted.
fn swap_tower(d: &Domain, bits: &mut [u8], remove: usize, add: usize) -> Result<(), EnsembleError> {
    let slots = tower_slots(d);
    let mut comp = vec![0u8; bits.len()];
    for &s in &slots {
        comp[s] = 1 - bits[s];
    }
    let own = tower_paths(d, bits);
    let other = tower_paths(d, &comp);
    if own.len() < remove || other.len() < add {
        return Err(EnsembleError::Invalid("tower has too few paths".into()));
    }
    for p in &own[own.len() - remove..] {
        for &s in p {
            bits[s] = 0;
        }
    }
    for p in &other[other.len() - add..] {
        for &s in p {
            if bits[s] == 1 {
                return Err(EnsembleError::Invalid("tower paths overlap".into()));
            }
            bits[s] = 1;
        }
    }
    Ok(())
}

/// The `A`-restricted domain-wall ensemble attached to a defective one.
pub fn from_defective(e: &DefectiveEnsemble) -> Result<PathEnsemble, EnsembleError> {
    let d = e.domain;
    let (a, b) = (d.a() as usize, d.b() as usize);
    let mut bits = e.bits.clone();
    let base = d.n_h_slots() + d.n_v_slots();
    // tower view: diagonal slots hold the upper-end arrows
    for (m, &v) in e.d2.iter().enumerate() {
        bits[base + m] = v;
    }
    swap_tower(&d, &mut bits, b, a)?;
    for (m, &v) in e.d1.iter().enumerate() {
        if bits[base + m] != v {
            return Err(EnsembleError::Invalid("diagonal arrows do not match after conversion".into()));
        }
    }
    PathEnsemble::new(d, domain_wall_boundary(&d), bits, Some(d.a()))
}

/// Largest number of tower configurations [`to_defective`] inspects.
pub const PREIMAGE_CAP: u64 = 1 << 22;

/// A defective ensemble mapped to `p` by [`from_defective`].
///
/// The map is neither injective nor onto, so this is one preimage, not an
/// inverse. A preimage shares the lower rectangle and the lower diagonal
/// arrows of `p`; the direct tower swap is tried first and then every tower
/// configuration, up to [`PREIMAGE_CAP`].
pub fn to_defective(p: &PathEnsemble) -> Result<DefectiveEnsemble, EnsembleError> {
    let d = *p.domain();
    if d.is_augmented() || *p.boundary() != domain_wall_boundary(&d) {
        return Err(EnsembleError::UnsupportedBoundary);
    }
    if p.restriction() != d.a() {
        return Err(EnsembleError::Invalid("ensemble is not A-restricted".into()));
    }
    let (a, b) = (d.a() as usize, d.b() as usize);
    let base = d.n_h_slots() + d.n_v_slots();
    let nd = d.n_diagonals() as usize;
    let d1: Vec<u8> = p.bits()[base..].to_vec();
    let d2: Vec<u8> = d1.iter().map(|&v| 1 - v).collect();
    let check = |bits: &[u8]| -> Option<DefectiveEnsemble> {
        let x = DefectiveEnsemble::new(d, bits.to_vec(), d1.clone(), d2.clone()).ok()?;
        (from_defective(&x).ok()? == *p).then_some(x)
    };
    let mut bits = p.bits().to_vec();
    if swap_tower(&d, &mut bits, a, b).is_ok() && bits[base..] == d2[..] {
        bits[base..].fill(0);
        if let Some(x) = check(&bits) {
            return Ok(x);
        }
    }
    let mut bits = p.bits().to_vec();
    bits[base..base + nd].fill(0);
    for y in d.yl() + 1..=d.ytop() {
        for x in d.xu()..=d.width() {
            bits[d.index(EdgeSlot::H { x, y })] = 0;
            bits[d.index(EdgeSlot::V { x, y })] = 0;
        }
    }
    let verts: Vec<LatticePoint> = d.vertices().filter(|v| v.y > d.yl()).collect();
    let mut tried = 0u64;
    let mut found = None;
    tower_search(&d, &verts, 0, &mut bits, &d2, &mut |bits| {
        tried += 1;
        found = check(bits);
        found.is_some() || tried >= PREIMAGE_CAP
    });
    found.ok_or(EnsembleError::NoPreimage)
}

/// Depth-first search over tower configurations with all tops occupied and
/// the east wall empty; stops once `visit` returns true.
fn tower_search(
    d: &Domain,
    verts: &[LatticePoint],
    i: usize,
    bits: &mut [u8],
    d2: &[u8],
    visit: &mut dyn FnMut(&[u8]) -> bool,
) -> bool {
    let Some(&p) = verts.get(i) else {
        return visit(bits);
    };
    let (vin, hin) = d.in_slots(p);
    let west = if p.x == d.xu() { d2[(p.y - d.yl() - 1) as usize] } else { bits[hin] };
    let total = bits[vin] + west;
    let (vout, hout) = d.out_slots(p);
    for (n, e) in [(1u8, 0u8), (0, 1), (0, 0), (1, 1)] {
        if n + e != total || (p.x == d.width() && e == 1) || (p.y == d.ytop() && n == 0) {
            continue;
        }
        bits[vout] = n;
        bits[hout] = e;
        let stop = tower_search(d, verts, i + 1, bits, d2, visit);
        bits[vout] = 0;
        bits[hout] = 0;
        if stop {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{collect, enumerate_defective_with, DEFAULT_CAP};
    use crate::geometry::build_domain;
    use crate::height::{extremal_ensemble, Side};
    use alloc::collections::BTreeMap;

    #[test]
    fn square_conversion_is_identity() {
        let d = build_domain(0, 0, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        let e = extremal_ensemble(&d, &bd, 0, Side::Min).unwrap();
        let x = to_defective(&e).unwrap();
        assert_eq!(x.bits(), e.bits());
        assert_eq!(from_defective(&x).unwrap(), e);
    }

    fn images(a: u32, b: u32, c: u32) -> (usize, BTreeMap<Vec<u8>, Vec<DefectiveEnsemble>>) {
        let d = build_domain(a, b, c).unwrap();
        let mut out: BTreeMap<Vec<u8>, Vec<DefectiveEnsemble>> = BTreeMap::new();
        let n = enumerate_defective_with(&d, DEFAULT_CAP, |x| {
            let p = from_defective(x).unwrap();
            p.validate_restricted(a).unwrap();
            out.entry(p.into_bits()).or_default().push(x.clone());
        })
        .unwrap();
        (n as usize, out)
    }

    #[test]
    fn image_sizes() {
        for ((a, b, c), defective, image, family) in
            [((1, 1, 1), 14, 12, 12), ((1, 1, 2), 126, 98, 98), ((1, 2, 2), 2574, 1746, 2121)]
        {
            let (n, img) = images(a, b, c);
            assert_eq!((n, img.len()), (defective, image));
            let d = build_domain(a, b, c).unwrap();
            let all = collect(&d, &domain_wall_boundary(&d), a, DEFAULT_CAP).unwrap();
            assert_eq!(all.len(), family);
        }
    }

    #[test]
    fn preimages_are_found_exactly_on_the_image() {
        for (a, b, c) in [(1, 1, 1), (1, 1, 2), (1, 2, 1), (1, 2, 2)] {
            let d = build_domain(a, b, c).unwrap();
            let (_, img) = images(a, b, c);
            for p in collect(&d, &domain_wall_boundary(&d), a, DEFAULT_CAP).unwrap() {
                match to_defective(&p) {
                    Ok(x) => {
                        assert!(img[p.bits()].contains(&x));
                        assert_eq!(from_defective(&x).unwrap(), p);
                    }
                    Err(e) => {
                        assert_eq!(e, EnsembleError::NoPreimage);
                        assert!(!img.contains_key(p.bits()));
                    }
                }
            }
        }
    }

    #[test]
    fn staircase_maps_to_a_restricted_ensemble() {
        for (a, b, c) in [(1, 1, 1), (2, 1, 2), (1, 2, 1), (2, 3, 4), (3, 0, 2)] {
            let d = build_domain(a, b, c).unwrap();
            let x = DefectiveEnsemble::staircase(&d).unwrap();
            let p = from_defective(&x).unwrap();
            assert_eq!(p.restriction(), a);
            assert_eq!(from_defective(&to_defective(&p).unwrap()).unwrap(), p);
        }
    }

    #[test]
    fn unbalanced_defect_line_is_rejected() {
        let d = build_domain(1, 1, 1).unwrap();
        let nd = d.n_diagonals() as usize;
        let err = DefectiveEnsemble::new(d, vec![0; d.n_slots()], vec![1; nd], vec![0; nd]).unwrap_err();
        assert!(matches!(err, EnsembleError::Invalid(_) | EnsembleError::DefectBalance { .. }));
        let err = DefectiveEnsemble::new(d, vec![0; d.n_slots()], vec![1, 1], vec![0, 0]).unwrap_err();
        assert_eq!(err, EnsembleError::DefectBalance { ending: 2, starting: 0 });
    }
}
