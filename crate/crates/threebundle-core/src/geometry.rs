//! Three-bundle domains, their augmented versions, rectangular subdomains and
//! the quadrant operators `NE`, `NW`, `SE`, `SW`.
//!
//! Coordinates are the usual lattice coordinates with `y` increasing upwards.
//! A domain is stored as a handful of integers; membership, edge slots and the
//! face list are derived from them.

use alloc::vec::Vec;

use crate::error::GeometryError;

/// A point of `Z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn as_f64(self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }
}

/// The four closed quadrants anchored at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrant {
    NE,
    NW,
    SE,
    SW,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::NE, Quadrant::NW, Quadrant::SE, Quadrant::SW];

    /// Whether `p` lies in the closed quadrant of this kind anchored at `anchor`.
    pub fn contains(self, anchor: [f64; 2], p: [f64; 2]) -> bool {
        let (dx, dy) = (p[0] - anchor[0], p[1] - anchor[1]);
        match self {
            Quadrant::NE => dx >= 0.0 && dy >= 0.0,
            Quadrant::NW => dx <= 0.0 && dy >= 0.0,
            Quadrant::SE => dx >= 0.0 && dy <= 0.0,
            Quadrant::SW => dx <= 0.0 && dy <= 0.0,
        }
    }

    /// Integer version of [`Quadrant::contains`].
    pub fn contains_lattice(self, anchor: LatticePoint, p: LatticePoint) -> bool {
        let (dx, dy) = (p.x - anchor.x, p.y - anchor.y);
        match self {
            Quadrant::NE => dx >= 0 && dy >= 0,
            Quadrant::NW => dx <= 0 && dy >= 0,
            Quadrant::SE => dx >= 0 && dy <= 0,
            Quadrant::SW => dx <= 0 && dy <= 0,
        }
    }

    /// Curves admissible as anchors: nondecreasing for `NW`/`SE`, nonincreasing for `NE`/`SW`.
    fn wants_increasing(self) -> bool {
        matches!(self, Quadrant::NW | Quadrant::SE)
    }
}

/// Region operator anchored at a polyline: the union of the quadrants anchored
/// at every point of the polyline (segments included).
#[derive(Clone, Debug)]
pub struct CurveRegion<'a> {
    points: &'a [[f64; 2]],
    quadrant: Quadrant,
}

impl<'a> CurveRegion<'a> {
    /// Fails if the polyline does not have the monotonicity the quadrant requires.
    pub fn new(points: &'a [[f64; 2]], quadrant: Quadrant) -> Result<Self, GeometryError> {
        let inc = quadrant.wants_increasing();
        let steps = points.windows(2).map(|w| (w[1][0] - w[0][0], w[1][1] - w[0][1]));
        let fwd = steps
            .clone()
            .all(|(dx, dy)| dx >= 0.0 && if inc { dy >= 0.0 } else { dy <= 0.0 });
        let bwd = steps.clone().all(|(dx, dy)| dx <= 0.0 && if inc { dy <= 0.0 } else { dy >= 0.0 });
        if !fwd && !bwd {
            return Err(GeometryError::WrongMonotonicity);
        }
        Ok(Self { points, quadrant })
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self.points.len() {
            0 => false,
            1 => self.quadrant.contains(self.points[0], p),
            _ => self
                .points
                .windows(2)
                .any(|w| segment_quadrant_hit(w[0], w[1], self.quadrant, p)),
        }
    }
}

/// Whether some point `q` of the segment `[s, t]` has `p` in its quadrant.
fn segment_quadrant_hit(s: [f64; 2], t: [f64; 2], quad: Quadrant, p: [f64; 2]) -> bool {
    // The admissible set of parameters is an interval cut out by one linear
    // constraint per coordinate; test it directly.
    let (sx, sy) = match quad {
        Quadrant::NE => (1.0, 1.0),
        Quadrant::NW => (-1.0, 1.0),
        Quadrant::SE => (1.0, -1.0),
        Quadrant::SW => (-1.0, -1.0),
    };
    // need sx*(p.x - q.x) >= 0 and sy*(p.y - q.y) >= 0 with q = s + u (t - s), u in [0,1]
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for (sgn, ps, ss, ts) in [(sx, p[0], s[0], t[0]), (sy, p[1], s[1], t[1])] {
        // sgn*(ps - ss) - u*sgn*(ts - ss) >= 0
        let c0 = sgn * (ps - ss);
        let c1 = sgn * (ts - ss);
        if c1 == 0.0 {
            if c0 < 0.0 {
                return false;
            }
        } else if c1 > 0.0 {
            hi = hi.min(c0 / c1);
        } else {
            lo = lo.max(c0 / c1);
        }
    }
    lo <= hi
}

/// One directed edge slot of a domain: a horizontal edge `(x,y)->(x+1,y)`, a
/// vertical edge `(x,y)->(x,y+1)`, or the `m`-th diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeSlot {
    H { x: i64, y: i64 },
    V { x: i64, y: i64 },
    D { m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceKind {
    /// Unit square with south-west corner `(x, y)`.
    Square { x: i64, y: i64 },
    /// Face between diagonals `m` and `m + 1`.
    Diagonal { m: u32 },
    Triangle,
}

/// A bounded face together with its edge slots.
///
/// `up_mask` has bit `k` set when `edges[k]` carries an arrow in the
/// configuration that an upwards switch removes; the switch replaces it by the
/// complementary pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub kind: FaceKind,
    /// Corners `v1..v4`, counterclockwise from the south-west one (the
    /// triangle repeats its last corner).
    pub corners: [LatticePoint; 4],
    pub edges: [usize; 4],
    pub n_edges: u8,
    pub up_mask: u8,
}

/// `T_{A,B,C}` or, when `psi > 0`, the augmented domain `X_{A,B,C;psi}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    a: u32,
    b: u32,
    c: u32,
    psi: u32,
    width: i64,
    ybot: i64,
    yl: i64,
    xu: i64,
    ytop: i64,
}

/// Alias kept for readability at call sites that only deal with `T_{A,B,C}`.
pub type ThreeBundleDomain = Domain;
/// Alias kept for readability at call sites that deal with `X_{A,B,C;psi}`.
pub type AugmentedDomain = Domain;

/// `T_{A,B,C}`.
pub fn build_domain(a: u32, b: u32, c: u32) -> Result<Domain, GeometryError> {
    Domain::three_bundle(a, b, c)
}

/// `X_{A,B,C;psi}`; `psi = 0` gives `T_{A,B,C}` itself.
pub fn build_augmented(a: u32, b: u32, c: u32, psi: u32) -> Result<Domain, GeometryError> {
    Domain::augmented(a, b, c, psi)
}

impl Domain {
    pub fn three_bundle(a: u32, b: u32, c: u32) -> Result<Self, GeometryError> {
        Self::augmented(a, b, c, 0)
    }

    pub fn augmented(a: u32, b: u32, c: u32, psi: u32) -> Result<Self, GeometryError> {
        if c == 0 {
            return Err(GeometryError::InvalidParameter("C must be positive"));
        }
        if a as u64 + b as u64 + c as u64 + psi as u64 > (1 << 20) {
            return Err(GeometryError::InvalidParameter("parameters too large"));
        }
        let (a64, b64, c64) = (a as i64, b as i64, c as i64);
        let w = a64 + 2 * b64 + c64;
        let (width, ybot) = if psi == 0 { (w, 1) } else { (w + 1, -(psi as i64)) };
        Ok(Self {
            a,
            b,
            c,
            psi,
            width,
            ybot,
            yl: a64 + c64,
            xu: a64 + b64 + 1,
            ytop: 2 * a64 + b64 + c64,
        })
    }

    pub fn a(&self) -> u32 {
        self.a
    }
    pub fn b(&self) -> u32 {
        self.b
    }
    pub fn c(&self) -> u32 {
        self.c
    }
    pub fn psi(&self) -> u32 {
        self.psi
    }
    pub fn is_augmented(&self) -> bool {
        self.psi > 0
    }
    /// Rightmost column.
    pub fn width(&self) -> i64 {
        self.width
    }
    /// Lowest row.
    pub fn ybot(&self) -> i64 {
        self.ybot
    }
    /// Top row of the lower rectangle, where the diagonals start.
    pub fn yl(&self) -> i64 {
        self.yl
    }
    /// Leftmost column of the upper tower, where the diagonals end.
    pub fn xu(&self) -> i64 {
        self.xu
    }
    /// Top row.
    pub fn ytop(&self) -> i64 {
        self.ytop
    }
    pub fn n_rows(&self) -> i64 {
        self.ytop - self.ybot + 1
    }
    pub fn n_diagonals(&self) -> u32 {
        self.a + self.b
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        if p.x < 1 || p.x > self.width || p.y < self.ybot || p.y > self.ytop {
            return false;
        }
        p.y <= self.yl || p.x >= self.xu
    }

    pub fn vertex_count(&self) -> u64 {
        let lower = self.width * (self.yl - self.ybot + 1);
        let upper = (self.width - self.xu + 1) * (self.ytop - self.yl);
        (lower + upper) as u64
    }

    /// Vertices in row-major order, bottom row first.
    pub fn vertices(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (self.ybot..=self.ytop).flat_map(move |y| {
            let x0 = if y <= self.yl { 1 } else { self.xu };
            (x0..=self.width).map(move |x| LatticePoint::new(x, y))
        })
    }

    /// Endpoints of diagonal `m` (1-based): `(xu - m, yl) -> (xu, yl + m)`.
    pub fn diagonal(&self, m: u32) -> (LatticePoint, LatticePoint) {
        let m = m as i64;
        (
            LatticePoint::new(self.xu - m, self.yl),
            LatticePoint::new(self.xu, self.yl + m),
        )
    }

    pub fn triangle(&self) -> Option<[LatticePoint; 3]> {
        (self.n_diagonals() >= 1).then(|| {
            [
                LatticePoint::new(self.xu - 1, self.yl),
                LatticePoint::new(self.xu, self.yl),
                LatticePoint::new(self.xu, self.yl + 1),
            ]
        })
    }

    // ---- edge slots ----

    fn h_stride(&self) -> i64 {
        self.width + 1
    }
    pub fn n_h_slots(&self) -> usize {
        (self.h_stride() * self.n_rows()) as usize
    }
    pub fn n_v_slots(&self) -> usize {
        (self.width * (self.n_rows() + 1)) as usize
    }
    pub fn n_slots(&self) -> usize {
        self.n_h_slots() + self.n_v_slots() + self.n_diagonals() as usize
    }

    /// Dimensions `(columns, rows)` of the horizontal-edge grid; column `x` runs over `0..=width`.
    pub fn h_grid_dims(&self) -> (usize, usize) {
        (self.h_stride() as usize, self.n_rows() as usize)
    }
    /// Dimensions `(columns, rows)` of the vertical-edge grid; row `y` runs over `ybot-1..=ytop`.
    pub fn v_grid_dims(&self) -> (usize, usize) {
        (self.width as usize, (self.n_rows() + 1) as usize)
    }

    /// Flat index of a slot, whether or not the edge exists.
    pub fn raw_index(&self, slot: EdgeSlot) -> Option<usize> {
        match slot {
            EdgeSlot::H { x, y } => {
                if x < 0 || x > self.width || y < self.ybot || y > self.ytop {
                    return None;
                }
                Some(((y - self.ybot) * self.h_stride() + x) as usize)
            }
            EdgeSlot::V { x, y } => {
                if x < 1 || x > self.width || y < self.ybot - 1 || y > self.ytop {
                    return None;
                }
                Some(self.n_h_slots() + ((y - self.ybot + 1) * self.width + x - 1) as usize)
            }
            EdgeSlot::D { m } => {
                if m == 0 || m > self.n_diagonals() {
                    return None;
                }
                Some(self.n_h_slots() + self.n_v_slots() + (m - 1) as usize)
            }
        }
    }

    /// Inverse of [`Domain::raw_index`].
    pub fn slot_at(&self, idx: usize) -> EdgeSlot {
        let nh = self.n_h_slots();
        let nv = self.n_v_slots();
        if idx < nh {
            let i = idx as i64;
            EdgeSlot::H { x: i % self.h_stride(), y: i / self.h_stride() + self.ybot }
        } else if idx < nh + nv {
            let i = (idx - nh) as i64;
            EdgeSlot::V { x: i % self.width + 1, y: i / self.width + self.ybot - 1 }
        } else {
            EdgeSlot::D { m: (idx - nh - nv) as u32 + 1 }
        }
    }

    /// Whether the slot is an edge of the domain (internal or boundary).
    pub fn slot_exists(&self, slot: EdgeSlot) -> bool {
        match slot {
            EdgeSlot::H { x, y } => {
                let l = LatticePoint::new(x, y);
                let r = LatticePoint::new(x + 1, y);
                (self.contains(l) && self.contains(r))
                    || (x == 0 && self.contains(r))
                    || (x == self.width && self.contains(l))
            }
            EdgeSlot::V { x, y } => {
                let d = LatticePoint::new(x, y);
                let u = LatticePoint::new(x, y + 1);
                (self.contains(d) && self.contains(u))
                    || (y == self.ybot - 1 && self.contains(u))
                    || (y == self.ytop && self.contains(d))
            }
            EdgeSlot::D { m } => m >= 1 && m <= self.n_diagonals(),
        }
    }

    /// Whether the slot is a boundary edge (one endpoint outside the domain).
    pub fn is_boundary_slot(&self, slot: EdgeSlot) -> bool {
        match slot {
            EdgeSlot::H { x, .. } => self.slot_exists(slot) && (x == 0 || x == self.width),
            EdgeSlot::V { y, .. } => {
                self.slot_exists(slot) && (y == self.ybot - 1 || y == self.ytop)
            }
            EdgeSlot::D { .. } => false,
        }
    }

    pub fn index(&self, slot: EdgeSlot) -> usize {
        self.raw_index(slot).expect("slot outside the bounding box")
    }

    /// Number of internal edges (both endpoints in the domain), diagonals included.
    pub fn internal_edge_count(&self) -> u64 {
        let mut n = self.n_diagonals() as u64;
        for p in self.vertices() {
            if self.contains(LatticePoint::new(p.x + 1, p.y)) {
                n += 1;
            }
            if self.contains(LatticePoint::new(p.x, p.y + 1)) {
                n += 1;
            }
        }
        n
    }

    /// Slots `(vertical_in, horizontal_in)` of a vertex. At the upper end of a
    /// diagonal the diagonal plays the horizontal role.
    pub fn in_slots(&self, p: LatticePoint) -> (usize, usize) {
        let vin = self.index(EdgeSlot::V { x: p.x, y: p.y - 1 });
        let hin = if p.x == self.xu && p.y > self.yl {
            self.index(EdgeSlot::D { m: (p.y - self.yl) as u32 })
        } else {
            self.index(EdgeSlot::H { x: p.x - 1, y: p.y })
        };
        (vin, hin)
    }

    /// Slots `(vertical_out, horizontal_out)` of a vertex. At the lower end of a
    /// diagonal the diagonal plays the vertical role.
    pub fn out_slots(&self, p: LatticePoint) -> (usize, usize) {
        let vout = if p.y == self.yl && p.x < self.xu {
            self.index(EdgeSlot::D { m: (self.xu - p.x) as u32 })
        } else {
            self.index(EdgeSlot::V { x: p.x, y: p.y })
        };
        let hout = self.index(EdgeSlot::H { x: p.x, y: p.y });
        (vout, hout)
    }

    /// Head of an edge slot (the vertex or outside point it points to).
    pub fn slot_head(&self, slot: EdgeSlot) -> LatticePoint {
        match slot {
            EdgeSlot::H { x, y } => LatticePoint::new(x + 1, y),
            EdgeSlot::V { x, y } => LatticePoint::new(x, y + 1),
            EdgeSlot::D { m } => self.diagonal(m).1,
        }
    }

    /// Tail of an edge slot.
    pub fn slot_tail(&self, slot: EdgeSlot) -> LatticePoint {
        match slot {
            EdgeSlot::H { x, y } | EdgeSlot::V { x, y } => LatticePoint::new(x, y),
            EdgeSlot::D { m } => self.diagonal(m).0,
        }
    }

    /// The boundary slot through which a path enters at the outside point `u`.
    pub fn entrance_slot(&self, u: LatticePoint) -> Option<usize> {
        let s = if u.x == 0 {
            EdgeSlot::H { x: 0, y: u.y }
        } else if u.y == self.ybot - 1 {
            EdgeSlot::V { x: u.x, y: u.y }
        } else {
            return None;
        };
        (self.slot_exists(s)).then(|| self.index(s))
    }

    /// The boundary slot through which a path leaves towards the outside point `w`.
    pub fn exit_slot(&self, w: LatticePoint) -> Option<usize> {
        let s = if w.x == self.width + 1 {
            EdgeSlot::H { x: self.width, y: w.y }
        } else if w.y == self.ytop + 1 {
            EdgeSlot::V { x: w.x, y: self.ytop }
        } else {
            return None;
        };
        (self.slot_exists(s)).then(|| self.index(s))
    }

    /// All bounded faces: unit squares (row-major), then the diagonal faces,
    /// then the triangle.
    pub fn faces(&self) -> Vec<Face> {
        let mut out = Vec::new();
        for p in self.vertices() {
            let (x, y) = (p.x, p.y);
            let corners = [
                p,
                LatticePoint::new(x + 1, y),
                LatticePoint::new(x + 1, y + 1),
                LatticePoint::new(x, y + 1),
            ];
            if corners.iter().all(|&q| self.contains(q)) {
                out.push(Face {
                    kind: FaceKind::Square { x, y },
                    corners,
                    edges: [
                        self.index(EdgeSlot::H { x, y }),
                        self.index(EdgeSlot::V { x: x + 1, y }),
                        self.index(EdgeSlot::H { x, y: y + 1 }),
                        self.index(EdgeSlot::V { x, y }),
                    ],
                    n_edges: 4,
                    up_mask: 0b0011,
                });
            }
        }
        let (xu, yl) = (self.xu, self.yl);
        for m in 1..self.n_diagonals() {
            let mi = m as i64;
            out.push(Face {
                kind: FaceKind::Diagonal { m },
                corners: [
                    LatticePoint::new(xu - mi - 1, yl),
                    LatticePoint::new(xu - mi, yl),
                    LatticePoint::new(xu, yl + mi),
                    LatticePoint::new(xu, yl + mi + 1),
                ],
                edges: [
                    self.index(EdgeSlot::H { x: xu - mi - 1, y: yl }),
                    self.index(EdgeSlot::D { m }),
                    self.index(EdgeSlot::V { x: xu, y: yl + mi }),
                    self.index(EdgeSlot::D { m: m + 1 }),
                ],
                n_edges: 4,
                up_mask: 0b0111,
            });
        }
        if let Some(t) = self.triangle() {
            out.push(Face {
                kind: FaceKind::Triangle,
                corners: [t[0], t[1], t[2], t[2]],
                edges: [
                    self.index(EdgeSlot::H { x: xu - 1, y: yl }),
                    self.index(EdgeSlot::V { x: xu, y: yl }),
                    self.index(EdgeSlot::D { m: 1 }),
                    usize::MAX,
                ],
                n_edges: 3,
                up_mask: 0b011,
            });
        }
        out
    }
}

/// `([m, n] x [s, t]) ∩ parent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RectSubdomain {
    pub parent: Domain,
    pub m: i64,
    pub n: i64,
    pub s: i64,
    pub t: i64,
}

impl RectSubdomain {
    pub fn new(parent: Domain, m: i64, n: i64, s: i64, t: i64) -> Result<Self, GeometryError> {
        if m > n || s > t {
            return Err(GeometryError::InvalidParameter("empty rectangle"));
        }
        Ok(Self { parent, m, n, s, t })
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        p.x >= self.m && p.x <= self.n && p.y >= self.s && p.y <= self.t && self.parent.contains(p)
    }

    pub fn vertices(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (self.s..=self.t)
            .flat_map(move |y| (self.m..=self.n).map(move |x| LatticePoint::new(x, y)))
            .filter(move |&p| self.parent.contains(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_domain_has_no_diagonals() {
        let d = build_domain(0, 0, 4).unwrap();
        assert_eq!(d.vertex_count(), 16);
        assert_eq!(d.n_diagonals(), 0);
        assert!(d.triangle().is_none());
        assert_eq!(d.faces().len(), 9);
    }

    #[test]
    fn figure_domain_counts() {
        let d = build_domain(2, 3, 4).unwrap();
        assert_eq!(d.n_diagonals(), 5);
        assert_eq!(d.vertex_count(), (2 + 6 + 4) * 6 + 7 * 5);
        assert_eq!(d.vertices().count() as u64, d.vertex_count());
        let tri = d.faces().iter().filter(|f| f.kind == FaceKind::Triangle).count();
        assert_eq!(tri, 1);
    }

    #[test]
    fn small_domain_vertex_count() {
        assert_eq!(build_domain(1, 1, 1).unwrap().vertex_count(), 12);
    }

    #[test]
    fn zero_c_is_rejected() {
        assert!(build_domain(1, 1, 0).is_err());
    }

    #[test]
    fn augmented_collapses_at_zero() {
        let t = build_domain(1, 1, 1).unwrap();
        let x = build_augmented(1, 1, 1, 0).unwrap();
        assert_eq!(t, x);
        let a: Vec<_> = t.vertices().collect();
        let b: Vec<_> = x.vertices().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn augmented_vertex_count() {
        let x = build_augmented(1, 1, 1, 2).unwrap();
        // T (12) + the 5 x 3 block of rows -2..0 + column 5 over rows 1..4
        assert_eq!(x.vertex_count(), 12 + 5 * 3 + 4);
        assert_eq!(x.vertices().count(), 31);
    }

    #[test]
    fn quadrant_examples() {
        let o = LatticePoint::new(0, 0);
        assert!(Quadrant::SE.contains_lattice(o, LatticePoint::new(3, -1)));
        assert!(!Quadrant::SE.contains_lattice(o, LatticePoint::new(-1, 0)));
        for q in Quadrant::ALL {
            assert!(q.contains_lattice(o, o));
        }
        let stair = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let r = CurveRegion::new(&stair, Quadrant::SE).unwrap();
        assert!(r.contains([2.0, 0.0]));
        assert!(!r.contains([0.5, 0.5]));
        assert!(CurveRegion::new(&stair, Quadrant::NE).is_err());
    }

    #[test]
    fn slot_index_roundtrip() {
        let d = build_augmented(2, 1, 2, 2).unwrap();
        for i in 0..d.n_slots() {
            assert_eq!(d.raw_index(d.slot_at(i)), Some(i));
        }
    }
}
