//! Path statistics and comparison with the limit shape.
//!
//! Distances are Euclidean. Paths are up-right lattice paths, seen as vertex
//! sequences for `Xi` and as polylines for the envelope and curve distances.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::ensemble::{FrozenMap, Path};
use crate::error::AnalysisError;
use crate::formulas::{curve_piece, curve_se, nw_piece, z_grid, CurveParams, ExactDist, Piece};
use crate::geometry::{CurveRegion, Domain, LatticePoint, Quadrant};

/// Paths with at most this many points get the brute-force `Xi`.
pub const XI_BRUTE_FORCE_CUTOFF: usize = 48;

fn check_monotone(path: &[LatticePoint]) -> Result<(), AnalysisError> {
    for w in path.windows(2) {
        let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
        if dx < 0 || dy < 0 || (dx == 0 && dy == 0) {
            return Err(AnalysisError::NonMonotone);
        }
    }
    Ok(())
}

fn cross(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Distance from `w` to the line through `u` and `v`, from the exact cross product.
fn line_dist(u: LatticePoint, v: LatticePoint, cr: i64) -> f64 {
    let (dx, dy) = ((v.x - u.x) as f64, (v.y - u.y) as f64);
    cr as f64 / libm::sqrt(dx * dx + dy * dy)
}

/// `Xi` by enumeration of all triples `(u, v, w)`: `v` north-east of `u`, `w`
/// in the rectangle they span and on or above the line `uv`.
pub fn xi_brute_force(path: &[LatticePoint]) -> Result<f64, AnalysisError> {
    check_monotone(path)?;
    let mut best = 0.0f64;
    for &u in path {
        for &v in path {
            if v == u || v.x < u.x || v.y < u.y {
                continue;
            }
            for &w in path {
                if w.x < u.x || w.x > v.x || w.y < u.y || w.y > v.y {
                    continue;
                }
                let cr = cross(u, v, w);
                if cr >= 0 {
                    best = best.max(line_dist(u, v, cr));
                }
            }
        }
    }
    Ok(best)
}

/// `Xi` with the witnesses restricted to the upper hull of the path between
/// `u` and `v`, maintained incrementally as `v` advances.
pub fn xi_pruned(path: &[LatticePoint]) -> Result<f64, AnalysisError> {
    check_monotone(path)?;
    let mut best = 0.0f64;
    let mut hull: Vec<LatticePoint> = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let u = path[i];
        hull.clear();
        hull.push(u);
        for &v in &path[i + 1..] {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], v) >= 0 {
                hull.pop();
            }
            hull.push(v);
            let cr = hull.iter().map(|&w| cross(u, v, w)).max().unwrap_or(0);
            if cr > 0 {
                best = best.max(line_dist(u, v, cr));
            }
        }
    }
    Ok(best)
}

/// `Xi`: brute force for short paths, hull pruning above the cutoff.
pub fn xi_statistic(path: &[LatticePoint]) -> Result<f64, AnalysisError> {
    if path.len() <= XI_BRUTE_FORCE_CUTOFF {
        xi_brute_force(path)
    } else {
        xi_pruned(path)
    }
}

/// Lower convex envelope: the lower hull of the path's vertices.
pub fn lower_envelope(path: &[LatticePoint]) -> Result<Vec<LatticePoint>, AnalysisError> {
    check_monotone(path)?;
    let mut hull: Vec<LatticePoint> = Vec::with_capacity(path.len());
    for &p in path {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    Ok(hull)
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    libm::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)
}

/// Distance from a point to a polyline.
pub fn polyline_dist(p: [f64; 2], line: &[[f64; 2]]) -> f64 {
    match line.len() {
        0 => f64::INFINITY,
        1 => libm::hypot(p[0] - line[0][0], p[1] - line[0][1]),
        _ => line.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min),
    }
}

/// Largest distance from a point of polyline `a` to polyline `b`.
///
/// Each segment of `a` is scanned at spacing at most `1/32` of a unit. The
/// distance is 1-Lipschitz, so only segments whose scan comes within one
/// spacing of the best value are refined, by golden-section search around
/// their best sample.
pub fn directed_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    if a.len() == 1 {
        return polyline_dist(a[0], b);
    }
    let point = |s: [f64; 2], e: [f64; 2], t: f64| [s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])];
    // (segment, samples, best sample index, best value, spacing)
    let mut scans = Vec::with_capacity(a.len() - 1);
    let mut best = 0.0f64;
    for (i, w) in a.windows(2).enumerate() {
        let len = libm::hypot(w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let n = ((len * 32.0) as usize).clamp(1, 1 << 16);
        let (mut arg, mut top) = (0usize, f64::NEG_INFINITY);
        for k in 0..=n {
            let v = polyline_dist(point(w[0], w[1], k as f64 / n as f64), b);
            if v > top {
                top = v;
                arg = k;
            }
        }
        best = best.max(top);
        scans.push((i, n, arg, top, len / n as f64));
    }
    let g = (libm::sqrt(5.0) - 1.0) / 2.0;
    for (i, n, arg, top, h) in scans {
        if top + h < best {
            continue;
        }
        let (s, e) = (a[i], a[i + 1]);
        let at = |t: f64| polyline_dist(point(s, e, t), b);
        let (mut lo, mut hi) = (arg.saturating_sub(1) as f64 / n as f64, (arg + 1).min(n) as f64 / n as f64);
        for _ in 0..60 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if at(m1) < at(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best = best.max(at((lo + hi) / 2.0));
    }
    best
}

/// Symmetric Hausdorff distance of two polylines.
pub fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn to_f64(path: &[LatticePoint]) -> Vec<[f64; 2]> {
    path.iter().map(|p| p.as_f64()).collect()
}

/// Distances between a path and its lower convex envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeGap {
    /// Largest distance from a vertex of the path to the envelope.
    pub path_to_envelope: f64,
    /// Largest distance from a point of the envelope to the path.
    pub envelope_to_path: f64,
    pub xi: f64,
}

impl EnvelopeGap {
    /// Whether the two gaps together stay within `2 Xi`, up to `1e-9`.
    pub fn holds(&self) -> bool {
        self.path_to_envelope + self.envelope_to_path <= 2.0 * self.xi + 1e-9
    }
}

pub fn envelope_gap(path: &[LatticePoint]) -> Result<EnvelopeGap, AnalysisError> {
    let env = to_f64(&lower_envelope(path)?);
    let p = to_f64(path);
    let path_to_envelope = p.iter().map(|&q| polyline_dist(q, &env)).fold(0.0, f64::max);
    let gap = EnvelopeGap { path_to_envelope, envelope_to_path: directed_hausdorff(&env, &p), xi: xi_statistic(path)? };
    debug_assert!(gap.holds(), "{gap:?}");
    Ok(gap)
}

/// Convex-path statistics together with the distances to the limit curve.
#[derive(Clone, Debug, PartialEq)]
pub struct PathStats {
    pub xi: f64,
    pub envelope: Vec<LatticePoint>,
    pub max_dist_to_curve: f64,
    pub hausdorff_to_curve: f64,
}

/// The south-east limit curve completed by its two tangent segments: along
/// the bottom from the origin, and up the east side to `(1 + b, 1 + a)`.
pub fn completed_se_curve(p: &CurveParams, n: usize) -> Result<Vec<[f64; 2]>, AnalysisError> {
    let mut out = vec![[0.0, 0.0]];
    for z in z_grid(n, 1e-6, 1e6) {
        let (x, y) = curve_se(z, p)?;
        out.push([x, y]);
    }
    out.push([1.0 + p.b, 1.0 + p.a]);
    out.dedup();
    Ok(out)
}

/// Distances between a rescaled path and the completed south-east curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryError {
    /// Largest distance from a vertex of the path to the curve.
    pub max_dist: f64,
    pub hausdorff: f64,
    /// Signed area enclosed by the path followed by the reversed curve;
    /// positive when the path runs mostly above the curve.
    pub signed_area: f64,
}

/// Compares `path / n` with the completed south-east curve of `p`.
pub fn boundary_error(path: &Path, p: &CurveParams, n: u32) -> Result<BoundaryError, AnalysisError> {
    if path.is_empty() {
        return Err(AnalysisError::Empty);
    }
    check_monotone(path)?;
    if n == 0 {
        return Err(AnalysisError::Formula(crate::error::FormulaError::Domain("N must be positive")));
    }
    let s = 1.0 / n as f64;
    let scaled: Vec<[f64; 2]> = path.iter().map(|q| [q.x as f64 * s, q.y as f64 * s]).collect();
    let curve = completed_se_curve(p, 2000)?;
    let max_dist = scaled.iter().map(|&q| polyline_dist(q, &curve)).fold(0.0, f64::max);
    let hausdorff = hausdorff(&scaled, &curve);
    let ring: Vec<[f64; 2]> = scaled.iter().chain(curve.iter().rev()).copied().collect();
    let mut twice = 0.0;
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        twice += a[0] * b[1] - b[0] * a[1];
    }
    // the ring runs along the path (north-east) and back along the curve, so
    // a path above the curve traces it clockwise
    Ok(BoundaryError { max_dist, hausdorff, signed_area: -twice / 2.0 })
}

/// [`PathStats`] of one path against the completed south-east curve.
pub fn path_stats(path: &Path, p: &CurveParams, n: u32) -> Result<PathStats, AnalysisError> {
    let be = boundary_error(path, p, n)?;
    Ok(PathStats {
        xi: xi_statistic(path)?,
        envelope: lower_envelope(path)?,
        max_dist_to_curve: be.max_dist,
        hausdorff_to_curve: be.hausdorff,
    })
}

/// The four limit-shape pieces with the quadrant each one freezes.
#[derive(Clone, Debug)]
pub struct FrozenRegions {
    pieces: Vec<(Quadrant, Vec<[f64; 2]>)>,
}

impl FrozenRegions {
    pub fn new(p: &CurveParams, n: usize) -> Result<Self, AnalysisError> {
        let grid = z_grid(n, 1e-6, 1e6);
        let mut pieces = Vec::new();
        let mut rest = vec![(Quadrant::SE, Piece::SE), (Quadrant::SW, Piece::SW), (Quadrant::NE, Piece::NE)];
        if let Some(nw) = nw_piece(p) {
            rest.push((Quadrant::NW, nw));
        }
        for (q, piece) in rest {
            let mut pts = Vec::with_capacity(grid.len());
            for &z in &grid {
                let (x, y) = curve_piece(piece, z, p)?;
                if x.is_finite() && y.is_finite() {
                    pts.push([x, y]);
                }
            }
            pts.dedup();
            pieces.push((q, pts));
        }
        Ok(Self { pieces })
    }

    /// Distance from a rescaled point to the union of the pieces.
    pub fn distance(&self, v: [f64; 2]) -> f64 {
        self.pieces.iter().map(|(_, c)| polyline_dist(v, c)).fold(f64::INFINITY, f64::min)
    }

    /// The quadrant region of the limit shape containing `v`, if any.
    pub fn region(&self, v: [f64; 2]) -> Option<Quadrant> {
        self.pieces.iter().find_map(|(q, c)| {
            let r = CurveRegion::new(c, *q).ok()?;
            r.contains(v).then_some(*q)
        })
    }

    pub fn pieces(&self) -> &[(Quadrant, Vec<[f64; 2]>)] {
        &self.pieces
    }
}

/// Per-vertex frequency of being frozen over a set of samples.
#[derive(Clone, Debug)]
pub struct FrozenFraction {
    domain: Domain,
    counts: BTreeMap<(i64, i64), u32>,
    samples: u32,
}

impl FrozenFraction {
    pub fn new(domain: &Domain) -> Self {
        Self { domain: *domain, counts: domain.vertices().map(|v| ((v.x, v.y), 0)).collect(), samples: 0 }
    }

    pub fn add(&mut self, map: &FrozenMap) {
        self.samples += 1;
        for v in self.domain.vertices() {
            if map.is_frozen(v) {
                *self.counts.get_mut(&(v.x, v.y)).unwrap() += 1;
            }
        }
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    pub fn fraction(&self, v: LatticePoint) -> Option<f64> {
        let c = *self.counts.get(&(v.x, v.y))?;
        (self.samples > 0).then(|| c as f64 / self.samples as f64)
    }

    /// `(vertex, fraction)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        let s = self.samples.max(1) as f64;
        self.domain.vertices().map(move |v| (v, self.counts[&(v.x, v.y)] as f64 / s))
    }
}

/// Vertices of the frozen quadrant regions at rescaled distance more than
/// `delta` from the limit shape, with their frozen fraction.
pub fn deep_frozen_vertices(
    frac: &FrozenFraction,
    regions: &FrozenRegions,
    n: u32,
    delta: f64,
) -> Vec<(LatticePoint, Quadrant, f64)> {
    let s = 1.0 / n as f64;
    frac.iter()
        .filter_map(|(v, f)| {
            let q = [v.x as f64 * s, v.y as f64 * s];
            if regions.distance(q) <= delta {
                return None;
            }
            regions.region(q).map(|quad| (v, quad, f))
        })
        .collect()
}

/// Statistics of one sampled ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub path: Path,
    pub k: Option<i64>,
    pub phi: Option<i64>,
}

/// Summary of a sample set.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    /// `(x, mean, q10, q90)` of the highest point the path reaches in column `x`.
    pub profile: Vec<(i64, f64, f64, f64)>,
    pub k_hist: BTreeMap<i64, u64>,
    pub phi_hist: BTreeMap<i64, u64>,
    pub xi: Vec<f64>,
}

fn column_tops(path: &Path) -> BTreeMap<i64, i64> {
    let mut out = BTreeMap::new();
    for p in path {
        let e = out.entry(p.x).or_insert(p.y);
        *e = (*e).max(p.y);
    }
    out
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = libm::round(q * (sorted.len() - 1) as f64) as usize;
    sorted[i]
}

pub fn aggregate(samples: &[PathSample]) -> Result<Summary, AnalysisError> {
    if samples.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut cols: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    let mut k_hist = BTreeMap::new();
    let mut phi_hist = BTreeMap::new();
    let mut xi = Vec::with_capacity(samples.len());
    for s in samples {
        for (x, y) in column_tops(&s.path) {
            cols.entry(x).or_default().push(y as f64);
        }
        if let Some(k) = s.k {
            *k_hist.entry(k).or_insert(0) += 1;
        }
        if let Some(f) = s.phi {
            *phi_hist.entry(f).or_insert(0) += 1;
        }
        xi.push(xi_statistic(&s.path)?);
    }
    let profile = cols
        .into_iter()
        .map(|(x, mut ys)| {
            ys.sort_by(f64::total_cmp);
            let mean = ys.iter().sum::<f64>() / ys.len() as f64;
            (x, mean, quantile(&ys, 0.1), quantile(&ys, 0.9))
        })
        .collect();
    Ok(Summary { count: samples.len(), profile, k_hist, phi_hist, xi })
}

/// Total variation distance between an empirical histogram and an exact law.
pub fn total_variation(hist: &BTreeMap<i64, u64>, exact: &ExactDist) -> f64 {
    let n: u64 = hist.values().sum();
    let p = exact.to_f64();
    let mut keys: Vec<i64> = (exact.lo()..=exact.hi()).collect();
    keys.extend(hist.keys().filter(|&&k| k < exact.lo() || k > exact.hi()));
    let tv: f64 = keys
        .iter()
        .map(|&k| {
            let e = hist.get(&k).copied().unwrap_or(0) as f64 / n.max(1) as f64;
            let q = if k >= exact.lo() && k <= exact.hi() { p[(k - exact.lo()) as usize] } else { 0.0 };
            (e - q).abs()
        })
        .sum();
    tv / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[(i64, i64)]) -> Path {
        v.iter().map(|&(x, y)| LatticePoint::new(x, y)).collect()
    }

    fn random_path(rng: &mut ChaCha8Rng, len: usize) -> Path {
        let mut p = vec![LatticePoint::new(0, 0)];
        for _ in 1..len {
            let q = *p.last().unwrap();
            p.push(if rng.gen_bool(0.5) { LatticePoint::new(q.x + 1, q.y) } else { LatticePoint::new(q.x, q.y + 1) });
        }
        p
    }

    #[test]
    fn five_point_path() {
        let p = pts(&[(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)]);
        let xi = xi_brute_force(&p).unwrap();
        // witness (0,1) above the chord from (0,0) to (2,1)
        assert!((xi - 2.0 / libm::sqrt(5.0)).abs() < 1e-15);
        assert_eq!(xi_pruned(&p).unwrap(), xi);
        assert_eq!(lower_envelope(&p).unwrap(), pts(&[(0, 0), (2, 1), (2, 2)]));
        assert!(envelope_gap(&p).unwrap().holds());
    }

    #[test]
    fn east_then_north_has_zero_xi() {
        let p = pts(&[(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3)]);
        assert_eq!(xi_brute_force(&p).unwrap(), 0.0);
        assert_eq!(xi_pruned(&p).unwrap(), 0.0);
        let straight = pts(&[(0, 0), (1, 0), (2, 0), (3, 0)]);
        assert_eq!(lower_envelope(&straight).unwrap(), pts(&[(0, 0), (3, 0)]));
        let g = envelope_gap(&straight).unwrap();
        assert_eq!((g.path_to_envelope, g.envelope_to_path), (0.0, 0.0));
    }

    #[test]
    fn non_monotone_is_rejected() {
        let p = pts(&[(0, 0), (1, 0), (0, 0)]);
        assert_eq!(xi_brute_force(&p), Err(AnalysisError::NonMonotone));
        assert_eq!(lower_envelope(&pts(&[(0, 0), (0, -1)])), Err(AnalysisError::NonMonotone));
    }

    #[test]
    fn pruned_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let len = rng.gen_range(1..=40);
            let p = random_path(&mut rng, len);
            assert_eq!(xi_pruned(&p).unwrap(), xi_brute_force(&p).unwrap());
        }
    }

    #[test]
    fn envelope_lies_below_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let p = random_path(&mut rng, 30);
            let env = lower_envelope(&p).unwrap();
            for w in env.windows(2) {
                for &q in &p {
                    if q.x >= w[0].x && q.x <= w[1].x && w[0].x < w[1].x {
                        assert!(cross(w[0], w[1], q) >= 0);
                    }
                }
            }
        }
    }

    #[test]
    fn hausdorff_of_parallel_segments() {
        let a = [[0.0, 0.0], [1.0, 0.0]];
        let b = [[0.0, 0.5], [1.0, 0.5]];
        assert!((hausdorff(&a, &b) - 0.5).abs() < 1e-12);
        let c = [[0.0, 0.0], [2.0, 0.0]];
        assert!((hausdorff(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn directed_hausdorff_finds_interior_maximum() {
        // farthest point of the segment from the two end points is its middle
        let a = [[0.0, 1.0], [2.0, 1.0]];
        let b = [[0.0, 0.0], [0.0, 1.0], [2.0, 1.0], [2.0, 0.0]];
        let far = [[-1.0, 0.0], [3.0, 0.0]];
        assert!(directed_hausdorff(&a, &b) < 1e-12);
        let d = directed_hausdorff(&[[1.0, 0.0], [1.0, 3.0]], &far);
        assert!((d - 3.0).abs() < 1e-9);
    }

    #[test]
    fn small_boundary_error_is_finite() {
        let p = CurveParams::from_counts(1, 1, 1).unwrap();
        let path = pts(&[(0, 1), (1, 1), (2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (4, 4), (4, 5)]);
        let e = boundary_error(&path, &p, 3).unwrap();
        assert!(e.max_dist.is_finite() && e.hausdorff.is_finite() && e.signed_area.is_finite());
        assert!(e.hausdorff >= e.max_dist);
    }

    #[test]
    fn completed_curve_endpoints() {
        let p = CurveParams::new(0.25, 0.5, 0.25).unwrap();
        let c = completed_se_curve(&p, 100).unwrap();
        assert_eq!(c[0], [0.0, 0.0]);
        assert_eq!(c[1], [0.5 + p.b * p.c / (p.a + p.c), 0.0]);
        assert_eq!(*c.last().unwrap(), [1.5, 1.25]);
        assert!(c.windows(2).all(|w| w[1][0] >= w[0][0] - 1e-12 && w[1][1] >= w[0][1] - 1e-12));
    }

    #[test]
    fn regions_of_the_square() {
        let p = CurveParams::new(0.0, 0.0, 1.0).unwrap();
        let r = FrozenRegions::new(&p, 400).unwrap();
        assert_eq!(r.region([0.95, 0.05]), Some(Quadrant::SE));
        assert_eq!(r.region([0.05, 0.05]), Some(Quadrant::SW));
        assert_eq!(r.region([0.95, 0.95]), Some(Quadrant::NE));
        assert_eq!(r.region([0.5, 0.5]), None);
    }

    #[test]
    fn single_sample_summary() {
        let path = pts(&[(0, 1), (1, 1), (1, 2), (2, 2)]);
        let s = aggregate(&[PathSample { path: path.clone(), k: Some(1), phi: None }]).unwrap();
        assert_eq!(s.count, 1);
        assert_eq!(s.profile, vec![(0, 1.0, 1.0, 1.0), (1, 2.0, 2.0, 2.0), (2, 2.0, 2.0, 2.0)]);
        assert_eq!(s.k_hist.get(&1), Some(&1));
        assert_eq!(s.xi, vec![xi_statistic(&path).unwrap()]);
        assert_eq!(aggregate(&[]), Err(AnalysisError::Empty));
    }
}
