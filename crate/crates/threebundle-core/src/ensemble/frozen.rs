//! Frozen and liquid vertices.

use alloc::vec;
use alloc::vec::Vec;

use super::defect::DefectiveEnsemble;
use super::{ArrowConfig, PathEnsemble};
use crate::geometry::{Domain, LatticePoint, Quadrant};

/// Arrow configurations of every vertex of a domain, on its bounding box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigView {
    domain: Domain,
    configs: Vec<Option<ArrowConfig>>,
}

impl ConfigView {
    fn build(domain: &Domain, f: impl Fn(LatticePoint) -> ArrowConfig) -> Self {
        let w = domain.width() as usize;
        let mut configs = vec![None; w * domain.n_rows() as usize];
        for p in domain.vertices() {
            configs[box_index(domain, p)] = Some(f(p));
        }
        Self { domain: *domain, configs }
    }

    pub fn of_ensemble(e: &PathEnsemble) -> Self {
        Self::build(e.domain(), |p| e.config_at(p))
    }

    pub fn of_defective(e: &DefectiveEnsemble) -> Self {
        Self::build(e.domain(), |p| e.config_at(p))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn get(&self, p: LatticePoint) -> Option<ArrowConfig> {
        if !self.domain.contains(p) {
            return None;
        }
        self.configs[box_index(&self.domain, p)]
    }
}

fn box_index(d: &Domain, p: LatticePoint) -> usize {
    ((p.y - d.ybot()) * d.width() + p.x - 1) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClass {
    /// Frozen, with the first quadrant whose condition holds.
    Frozen(Quadrant),
    Liquid,
}

/// Classification of every vertex of the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenMap {
    domain: Domain,
    classes: Vec<Option<VertexClass>>,
}

impl FrozenMap {
    pub fn get(&self, p: LatticePoint) -> Option<VertexClass> {
        if !self.domain.contains(p) {
            return None;
        }
        self.classes[box_index(&self.domain, p)]
    }

    pub fn is_frozen(&self, p: LatticePoint) -> bool {
        matches!(self.get(p), Some(VertexClass::Frozen(_)))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `(vertex, class)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, VertexClass)> + '_ {
        self.domain.vertices().map(move |p| (p, self.get(p).unwrap()))
    }
}

/// Required configuration on each quadrant.
pub(crate) const CONDITIONS: [(Quadrant, ArrowConfig); 4] = [
    (Quadrant::NE, ArrowConfig::VERTICAL),
    (Quadrant::NW, ArrowConfig::FULL),
    (Quadrant::SE, ArrowConfig::EMPTY),
    (Quadrant::SW, ArrowConfig::HORIZONTAL),
];

/// A vertex is frozen when all vertices of the domain in one of its
/// quadrants share that quadrant's configuration: vertical on `NE`, full on
/// `NW`, empty on `SE`, horizontal on `SW`.
pub fn frozen_region(view: &ConfigView) -> FrozenMap {
    let d = &view.domain;
    let w = d.width() as usize;
    let h = d.n_rows() as usize;
    // prefix[(y+1)*(w+1) + (x+1)] = bad count over [0,x]x[0,y] in box coordinates
    let prefixes: Vec<Vec<u32>> = CONDITIONS
        .iter()
        .map(|&(_, want)| {
            let mut ps = vec![0u32; (w + 1) * (h + 1)];
            for y in 0..h {
                for x in 0..w {
                    let bad = match view.configs[y * w + x] {
                        Some(c) => (c != want) as u32,
                        None => 0,
                    };
                    ps[(y + 1) * (w + 1) + x + 1] =
                        bad + ps[y * (w + 1) + x + 1] + ps[(y + 1) * (w + 1) + x] - ps[y * (w + 1) + x];
                }
            }
            ps
        })
        .collect();
    let rect = |ps: &[u32], x0: usize, x1: usize, y0: usize, y1: usize| -> u32 {
        // inclusive-exclusive [x0, x1) x [y0, y1)
        ps[y1 * (w + 1) + x1] + ps[y0 * (w + 1) + x0] - ps[y0 * (w + 1) + x1] - ps[y1 * (w + 1) + x0]
    };
    let mut classes = vec![None; w * h];
    for p in d.vertices() {
        let bx = (p.x - 1) as usize;
        let by = (p.y - d.ybot()) as usize;
        let mut class = VertexClass::Liquid;
        for (k, &(q, _)) in CONDITIONS.iter().enumerate() {
            let ps = &prefixes[k];
            let bad = match q {
                Quadrant::NE => rect(ps, bx, w, by, h),
                Quadrant::NW => rect(ps, 0, bx + 1, by, h),
                Quadrant::SE => rect(ps, bx, w, 0, by + 1),
                Quadrant::SW => rect(ps, 0, bx + 1, 0, by + 1),
            };
            if bad == 0 {
                class = VertexClass::Frozen(q);
                break;
            }
        }
        classes[by * w + bx] = Some(class);
    }
    FrozenMap { domain: *d, classes }
}

/// Direct evaluation of the definition, one vertex at a time.
pub fn frozen_brute_force(view: &ConfigView, p: LatticePoint) -> Option<Quadrant> {
    let d = &view.domain;
    CONDITIONS.iter().find_map(|&(q, want)| {
        d.vertices()
            .filter(|&v| q.contains_lattice(p, v))
            .all(|v| view.get(v) == Some(want))
            .then_some(q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::domain_wall_boundary;
    use crate::geometry::build_domain;
    use crate::height::{extremal_ensemble, Side};

    #[test]
    fn fast_matches_definition() {
        let d = build_domain(1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        for side in [Side::Min, Side::Max] {
            let e = extremal_ensemble(&d, &bd, 1, side).unwrap();
            let view = ConfigView::of_ensemble(&e);
            let map = frozen_region(&view);
            for p in d.vertices() {
                let fast = match map.get(p).unwrap() {
                    VertexClass::Frozen(q) => Some(q),
                    VertexClass::Liquid => None,
                };
                assert_eq!(fast, frozen_brute_force(&view, p));
            }
        }
    }

    #[test]
    fn south_east_corner_is_frozen() {
        let d = build_domain(2, 3, 4).unwrap();
        let bd = domain_wall_boundary(&d);
        let e = extremal_ensemble(&d, &bd, 2, Side::Min).unwrap();
        let map = frozen_region(&ConfigView::of_ensemble(&e));
        let corner = LatticePoint::new(d.width(), 1);
        assert_eq!(map.get(corner), Some(VertexClass::Frozen(Quadrant::SE)));
    }
}
