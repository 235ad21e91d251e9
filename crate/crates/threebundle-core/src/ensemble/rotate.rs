//! Rotation of defective ensembles from `T_{A,B,C}` to `T_{B,C,A}`.
//!
//! The lower rectangle becomes the tower of the new domain (turned a quarter
//! clockwise, horizontal arrows reversed) and the tower becomes the left part
//! of the new lower rectangle (turned half a turn, all arrows reversed). The
//! vertical interface under the tower turns into the new diagonals and the old
//! diagonals into horizontal edges in front of the new tower.

use alloc::vec;

use super::defect::{from_defective, to_defective, DefectiveEnsemble};
use super::PathEnsemble;
use crate::error::EnsembleError;
use crate::geometry::{build_domain, EdgeSlot};

/// Rotates a defective ensemble; needs `A >= 1`.
pub fn rotate_defective(e: &DefectiveEnsemble) -> Result<DefectiveEnsemble, EnsembleError> {
    let d = *e.domain();
    if d.a() == 0 {
        return Err(EnsembleError::RotationNeedsA);
    }
    let (a, b, c) = (d.a() as i64, d.b() as i64, d.c() as i64);
    let t = build_domain(d.b(), d.c(), d.a())?;
    let w = d.width();
    let (yl, xu, ytop) = (d.yl(), d.xu(), d.ytop());
    let x0 = a + b + 2 * c + 1;
    let bits = e.bits();
    let get = |s: EdgeSlot| bits[d.index(s)];

    let mut nb = vec![0u8; t.n_slots()];
    let mut set = |s: EdgeSlot, v: u8| {
        debug_assert!(t.slot_exists(s), "{s:?}");
        nb[t.index(s)] = v;
    };
    // lower rectangle
    for y in 1..=yl {
        for x in 0..=w {
            set(EdgeSlot::V { x: x0 - y, y: x }, 1 - get(EdgeSlot::H { x, y }));
        }
    }
    for y in 0..yl {
        for x in 1..=w {
            set(EdgeSlot::H { x: x0 - y - 1, y: x }, get(EdgeSlot::V { x, y }));
        }
    }
    // tower
    for y in yl + 1..=ytop {
        for x in xu..=w {
            set(EdgeSlot::H { x: w - x, y: ytop + 1 - y }, 1 - get(EdgeSlot::H { x, y }));
            set(EdgeSlot::V { x: w + 1 - x, y: ytop - y }, 1 - get(EdgeSlot::V { x, y }));
        }
    }
    // old diagonals
    for m in 1..=(a + b) {
        let e1 = e.lower_diagonal()[(m - 1) as usize];
        set(EdgeSlot::H { x: b + c, y: a + b - m + 1 }, e1);
    }
    // interface under the tower
    let mut d1 = vec![0u8; (b + c) as usize];
    let mut d2 = vec![0u8; (b + c) as usize];
    for x in xu..=w {
        let bit = get(EdgeSlot::V { x, y: yl });
        let m = (x - a - b) as usize;
        d1[m - 1] = 1 - bit;
        d2[m - 1] = bit;
    }
    DefectiveEnsemble::new(t, nb, d1, d2)
}

/// Rotates an `A`-restricted domain-wall ensemble on `T_{A,B,C}` to a
/// `B`-restricted one on `T_{B,C,A}` through the defective picture; fails
/// with [`EnsembleError::NoPreimage`] outside the image of [`from_defective`].
pub fn rotate(p: &PathEnsemble) -> Result<PathEnsemble, EnsembleError> {
    let x = to_defective(p)?;
    from_defective(&rotate_defective(&x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::domain_wall_boundary;
    use crate::exact::{enumerate_defective_with, DEFAULT_CAP};
    use crate::height::{extremal_ensemble, Side};
    use alloc::collections::BTreeSet;
    use alloc::vec::Vec;

    fn defective(a: u32, b: u32, c: u32) -> Vec<DefectiveEnsemble> {
        let d = build_domain(a, b, c).unwrap();
        let mut out = Vec::new();
        enumerate_defective_with(&d, DEFAULT_CAP, |x| out.push(x.clone())).unwrap();
        out
    }

    #[test]
    fn rotation_is_a_bijection_of_defective_families() {
        for (a, b, c) in [(1, 1, 1), (1, 1, 2), (2, 1, 2), (1, 0, 2)] {
            let src = defective(a, b, c);
            let key = |x: &DefectiveEnsemble| (x.bits().to_vec(), x.lower_diagonal().to_vec());
            let dst: BTreeSet<_> = defective(b, c, a).iter().map(key).collect();
            let img: BTreeSet<_> = src.iter().map(|x| key(&rotate_defective(x).unwrap())).collect();
            assert_eq!(img.len(), src.len());
            assert_eq!(img, dst);
        }
    }

    #[test]
    fn three_rotations_are_the_identity() {
        for x in defective(1, 1, 2) {
            let y = rotate_defective(&rotate_defective(&rotate_defective(&x).unwrap()).unwrap()).unwrap();
            assert_eq!(y, x);
        }
    }

    #[test]
    fn rotated_ensembles_are_restricted() {
        for (a, b, c) in [(1, 1, 1), (2, 1, 2), (2, 3, 4)] {
            let d = build_domain(a, b, c).unwrap();
            let x = DefectiveEnsemble::staircase(&d).unwrap();
            let r = rotate(&from_defective(&x).unwrap()).unwrap();
            assert_eq!(r.domain().a(), b);
            assert_eq!(r.restriction(), b);
        }
    }

    #[test]
    fn zero_a_is_refused() {
        let d = build_domain(0, 1, 1).unwrap();
        let bd = domain_wall_boundary(&d);
        let e = extremal_ensemble(&d, &bd, 0, Side::Min).unwrap();
        assert_eq!(rotate(&e).unwrap_err(), EnsembleError::RotationNeedsA);
    }
}
