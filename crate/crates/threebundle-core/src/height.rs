//! Height functions on the faces of a domain.
//!
//! The height of a face counts the paths passing south-east of it. Across
//! every edge slot the height on the left (north or west) side minus the
//! height on the right side equals the occupancy bit. Boundary data fixes the
//! heights of all outer faces and the restriction count fixes the triangle,
//! so the family of ensembles is the set of integer solutions of a system of
//! difference constraints. Its pointwise minimum and maximum are the extremal
//! ensembles, and `P <= P'` exactly when `h_P <= h_P'` everywhere.

use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::ensemble::{BoundaryData, PathEnsemble};
use crate::error::EnsembleError;
use crate::geometry::{Domain, EdgeSlot, FaceKind};

const NONE: u32 = u32::MAX;

/// Which extremal ensemble to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// North-west most.
    Min,
    /// South-east most.
    Max,
}

/// Dual graph of a domain: bounded faces, outer cells and the region beyond
/// the longest diagonal.
#[derive(Clone, Debug)]
pub struct HeightGraph {
    domain: Domain,
    n_faces: usize,
    n_nodes: usize,
    notch: u32,
    triangle: Option<u32>,
    /// `(left, right)` node of every existing slot, `NONE` otherwise.
    sides: Vec<(u32, u32)>,
    /// Pairs of outer nodes separated by no edge.
    links: Vec<(u32, u32)>,
    outer: Vec<bool>,
    anchor: u32,
}

impl HeightGraph {
    pub fn new(domain: &Domain) -> Self {
        let d = *domain;
        let faces = d.faces();
        let n_faces = faces.len();
        let cw = (d.width() + 1) as usize;
        let ch = (d.n_rows() + 1) as usize;
        let cell0 = n_faces;
        let notch = (cell0 + cw * ch) as u32;
        let n_nodes = notch as usize + 1;
        let ab = d.n_diagonals() as i64;

        let mut square_of = vec![NONE; cw * ch];
        let mut n_sq = 0u32;
        let mut triangle = None;
        for (k, f) in faces.iter().enumerate() {
            match f.kind {
                FaceKind::Square { x, y } => {
                    square_of[cell_index(&d, x, y)] = k as u32;
                    n_sq += 1;
                }
                FaceKind::Triangle => triangle = Some(k as u32),
                FaceKind::Diagonal { .. } => {}
            }
        }
        let wedge = |m: i64| -> u32 {
            if m >= ab {
                notch
            } else if m == 0 {
                triangle.unwrap()
            } else {
                n_sq + (m - 1) as u32
            }
        };
        // node of a whole cell; NONE for cells split by a diagonal
        let cell_node = |x: i64, y: i64| -> u32 {
            if x < 0 || x > d.width() || y < d.ybot() - 1 || y > d.ytop() {
                return NONE;
            }
            let sq = square_of[cell_index(&d, x, y)];
            if sq != NONE {
                return sq;
            }
            if y >= d.yl() && x < d.xu() {
                let m = d.xu() - x + y - d.yl();
                return if m > ab { notch } else { NONE };
            }
            (cell0 + cell_index(&d, x, y)) as u32
        };

        let mut sides = vec![(NONE, NONE); d.n_slots()];
        for (i, side) in sides.iter_mut().enumerate() {
            let s = d.slot_at(i);
            if !d.slot_exists(s) {
                continue;
            }
            *side = match s {
                EdgeSlot::H { x, y } => {
                    let l = if y == d.yl() && x < d.xu() {
                        wedge(d.xu() - 1 - x)
                    } else {
                        cell_node(x, y)
                    };
                    (l, cell_node(x, y - 1))
                }
                EdgeSlot::V { x, y } => {
                    let l = if x == d.xu() && y >= d.yl() {
                        wedge(y - d.yl())
                    } else {
                        cell_node(x - 1, y)
                    };
                    (l, cell_node(x, y))
                }
                EdgeSlot::D { m } => (wedge(m as i64), wedge(m as i64 - 1)),
            };
            debug_assert!(side.0 != NONE && side.1 != NONE, "slot {s:?} has no face");
        }

        let mut outer = vec![false; n_nodes];
        outer[notch as usize] = true;
        for y in d.ybot() - 1..=d.ytop() {
            for x in 0..=d.width() {
                let n = cell_node(x, y);
                if n != NONE && n as usize >= cell0 {
                    outer[n as usize] = true;
                }
            }
        }
        let mut links = Vec::new();
        for y in d.ybot() - 1..=d.ytop() {
            for x in 0..=d.width() {
                let a = cell_node(x, y);
                if a == NONE || !outer[a as usize] {
                    continue;
                }
                for (nx, ny, slot) in [
                    (x + 1, y, EdgeSlot::V { x: x + 1, y }),
                    (x, y + 1, EdgeSlot::H { x, y: y + 1 }),
                ] {
                    let b = cell_node(nx, ny);
                    if b == NONE || !outer[b as usize] || a == b {
                        continue;
                    }
                    if !d.slot_exists(slot) {
                        links.push((a, b));
                    }
                }
            }
        }
        let anchor = cell_node(d.width(), d.ybot() - 1);
        Self { domain: d, n_faces, n_nodes, notch, triangle, sides, links, outer, anchor }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn n_faces(&self) -> usize {
        self.n_faces
    }
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }
    /// Node beyond the longest diagonal (merged with the outer face there).
    pub fn notch(&self) -> usize {
        self.notch as usize
    }
    /// Node index of the triangular face.
    pub fn triangle(&self) -> Option<usize> {
        self.triangle.map(|t| t as usize)
    }
    pub fn is_outer(&self, node: usize) -> bool {
        self.outer[node]
    }
    /// `(left, right)` nodes of an existing slot.
    pub fn sides(&self, slot: usize) -> Option<(usize, usize)> {
        let (l, r) = self.sides[slot];
        (l != NONE).then_some((l as usize, r as usize))
    }

    fn adjacency(&self) -> Vec<Vec<(u32, u32, bool)>> {
        // (neighbor, slot or NONE, self is the left side)
        let mut adj = vec![Vec::new(); self.n_nodes];
        for (i, &(l, r)) in self.sides.iter().enumerate() {
            if l == NONE {
                continue;
            }
            adj[l as usize].push((r, i as u32, true));
            adj[r as usize].push((l, i as u32, false));
        }
        for &(a, b) in &self.links {
            adj[a as usize].push((b, NONE, false));
            adj[b as usize].push((a, NONE, false));
        }
        adj
    }

    /// Heights of every reachable node for the occupancy `bits`, normalised to
    /// zero at the south-east outer corner. Unreachable nodes get `i64::MIN`.
    /// Fails if the bits are not the differences of a height function.
    pub fn heights(&self, bits: &[u8]) -> Result<Vec<i64>, EnsembleError> {
        let adj = self.adjacency();
        let mut h = vec![i64::MIN; self.n_nodes];
        let mut q = VecDeque::new();
        h[self.anchor as usize] = 0;
        q.push_back(self.anchor);
        while let Some(v) = q.pop_front() {
            for &(nb, slot, left) in &adj[v as usize] {
                let b = if slot == NONE { 0 } else { bits[slot as usize] as i64 };
                let want = if left { h[v as usize] - b } else { h[v as usize] + b };
                let cur = &mut h[nb as usize];
                if *cur == i64::MIN {
                    *cur = want;
                    q.push_back(nb);
                } else if *cur != want {
                    return Err(EnsembleError::Invalid(
                        "occupancy is not a height-function difference".into(),
                    ));
                }
            }
        }
        Ok(h)
    }

    /// Heights of the outer nodes forced by boundary data.
    pub fn outer_heights(&self, boundary: &BoundaryData) -> Result<Vec<i64>, EnsembleError> {
        let d = &self.domain;
        boundary.check_admissible(d)?;
        let bits = boundary.boundary_bits(d);
        let adj = self.adjacency();
        let mut h = vec![i64::MIN; self.n_nodes];
        let mut q = VecDeque::new();
        h[self.anchor as usize] = 0;
        q.push_back(self.anchor);
        while let Some(v) = q.pop_front() {
            for &(nb, slot, left) in &adj[v as usize] {
                if !self.outer[nb as usize] {
                    continue;
                }
                if slot != NONE && !d.is_boundary_slot(d.slot_at(slot as usize)) {
                    // an internal edge between two outer cells never occurs
                    continue;
                }
                let b = if slot == NONE { 0 } else { bits[slot as usize] as i64 };
                let want = if left { h[v as usize] - b } else { h[v as usize] + b };
                let cur = &mut h[nb as usize];
                if *cur == i64::MIN {
                    *cur = want;
                    q.push_back(nb);
                } else if *cur != want {
                    return Err(EnsembleError::InadmissibleBoundary(
                        "entrances and exits do not balance".into(),
                    ));
                }
            }
        }
        for (i, &o) in self.outer.iter().enumerate() {
            if o && h[i] == i64::MIN {
                return Err(EnsembleError::Invalid("outer face not reached".into()));
            }
        }
        Ok(h)
    }

    /// Pointwise bounds `(lower, upper)` of all height functions with the given
    /// boundary data and restriction count.
    pub fn bounds(
        &self,
        boundary: &BoundaryData,
        r: u32,
    ) -> Result<(Vec<i64>, Vec<i64>), EnsembleError> {
        let fixed = self.fixed_heights(boundary, r)?;
        let upper = self.relax(&fixed, true);
        let lower = self.relax(&fixed, false);
        for (i, f) in fixed.iter().enumerate() {
            if let Some(v) = *f {
                if upper[i] != v || lower[i] != v {
                    return Err(EnsembleError::Infeasible);
                }
            }
        }
        for i in 0..self.n_nodes {
            if upper[i] != i64::MAX && lower[i] > upper[i] {
                return Err(EnsembleError::Infeasible);
            }
        }
        Ok((lower, upper))
    }

    fn fixed_heights(&self, boundary: &BoundaryData, r: u32) -> Result<Vec<Option<i64>>, EnsembleError> {
        let outer = self.outer_heights(boundary)?;
        let mut fixed = vec![None; self.n_nodes];
        for i in 0..self.n_nodes {
            if self.outer[i] {
                fixed[i] = Some(outer[i]);
            }
        }
        match self.triangle {
            Some(t) => fixed[t as usize] = Some(outer[self.notch as usize] - r as i64),
            None if r != 0 => return Err(EnsembleError::Infeasible),
            None => {}
        }
        Ok(fixed)
    }

    /// Multi-source shortest paths. With `upper` the result is the largest
    /// solution of the constraints, otherwise the smallest.
    fn relax(&self, fixed: &[Option<i64>], upper: bool) -> Vec<i64> {
        // upper: h(L) <= h(R) + 1 and h(R) <= h(L); lower works on g = -h.
        let mut arcs: Vec<Vec<(u32, i64)>> = vec![Vec::new(); self.n_nodes];
        for &(l, r) in &self.sides {
            if l == NONE {
                continue;
            }
            if upper {
                arcs[r as usize].push((l, 1));
                arcs[l as usize].push((r, 0));
            } else {
                arcs[r as usize].push((l, 0));
                arcs[l as usize].push((r, 1));
            }
        }
        for &(a, b) in &self.links {
            arcs[a as usize].push((b, 0));
            arcs[b as usize].push((a, 0));
        }
        let sign = if upper { 1 } else { -1 };
        let mut dist = vec![i64::MAX; self.n_nodes];
        let mut heap = BinaryHeap::new();
        for (i, f) in fixed.iter().enumerate() {
            if let Some(v) = *f {
                dist[i] = sign * v;
                heap.push(Reverse((sign * v, i as u32)));
            }
        }
        while let Some(Reverse((dv, v))) = heap.pop() {
            if dv > dist[v as usize] {
                continue;
            }
            for &(nb, w) in &arcs[v as usize] {
                let nd = dv + w;
                if nd < dist[nb as usize] {
                    dist[nb as usize] = nd;
                    heap.push(Reverse((nd, nb)));
                }
            }
        }
        dist.iter().map(|&x| if x == i64::MAX { x } else { sign * x }).collect()
    }

    /// Occupancy bits of a height function.
    pub fn bits_from_heights(&self, h: &[i64]) -> Result<Vec<u8>, EnsembleError> {
        let mut bits = vec![0u8; self.domain.n_slots()];
        for (i, &(l, r)) in self.sides.iter().enumerate() {
            if l == NONE {
                continue;
            }
            let b = h[l as usize] - h[r as usize];
            if !(0..=1).contains(&b) {
                return Err(EnsembleError::Invalid("height jump outside {0, 1}".into()));
            }
            bits[i] = b as u8;
        }
        Ok(bits)
    }
}

fn cell_index(d: &Domain, x: i64, y: i64) -> usize {
    ((y - d.ybot() + 1) * (d.width() + 1) + x) as usize
}

/// The north-west most (`Min`) or south-east most (`Max`) ensemble of the
/// family with the given boundary data and restriction count.
pub fn extremal_ensemble(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    side: Side,
) -> Result<PathEnsemble, EnsembleError> {
    let g = HeightGraph::new(domain);
    let (lo, hi) = g.bounds(boundary, r)?;
    let h = match side {
        Side::Min => lo,
        Side::Max => hi,
    };
    let bits = g.bits_from_heights(&h)?;
    PathEnsemble::new(*domain, boundary.clone(), bits, Some(r))
}

/// Face heights of an ensemble, indexed like [`Domain::faces`].
pub fn face_heights(e: &PathEnsemble) -> Vec<i64> {
    let g = HeightGraph::new(e.domain());
    let mut h = g.heights(e.bits()).expect("valid ensemble");
    h.truncate(g.n_faces());
    h
}
