//! Glauber dynamics, monotone coupled chains and coupling from the past.
//!
//! Continuous-time clocks are replaced by their jump chain: every event picks a
//! switchable face and a direction uniformly at random. A shared
//! [`ClockStream`] drives coupled chains.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::defect::DefectiveEnsemble;
use crate::ensemble::{compare_shifted, BoundaryData, Comparison, PathEnsemble};
use crate::error::SamplerError;
use crate::geometry::{Domain, EdgeSlot, Face, FaceKind};
pub use crate::height::{extremal_ensemble, Side};

/// Default event budget of [`cftp_sample`].
pub const DEFAULT_BUDGET: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Up,
    Down,
}

/// Deterministic stream of `(face, direction)` events.
#[derive(Clone, Debug)]
pub struct ClockStream {
    rng: ChaCha8Rng,
    n_faces: usize,
}

impl ClockStream {
    pub fn new(seed: u64, n_faces: usize) -> Self {
        Self::with_stream(seed, 0, n_faces)
    }

    /// Independent sub-stream `stream` of the same seed.
    pub fn with_stream(seed: u64, stream: u64, n_faces: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, n_faces }
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn next_event(&mut self) -> (usize, Direction) {
        let k = self.rng.gen_range(0..2 * self.n_faces);
        let dir = if k & 1 == 0 { Direction::Up } else { Direction::Down };
        (k >> 1, dir)
    }
}

impl Iterator for ClockStream {
    type Item = (usize, Direction);

    fn next(&mut self) -> Option<Self::Item> {
        (self.n_faces > 0).then(|| self.next_event())
    }
}

#[derive(Clone, Copy, Debug)]
struct Move {
    edges: [usize; 4],
    n: u8,
    up: u8,
    down: u8,
}

impl Move {
    fn of_face(f: &Face) -> Self {
        let full = (1u8 << f.n_edges) - 1;
        Self { edges: f.edges, n: f.n_edges, up: f.up_mask, down: full & !f.up_mask }
    }

    #[inline]
    fn apply(&self, bits: &mut [u8], dir: Direction) -> bool {
        let mut pat = 0u8;
        for k in 0..self.n as usize {
            pat |= bits[self.edges[k]] << k;
        }
        let (from, to) = match dir {
            Direction::Up => (self.up, self.down),
            Direction::Down => (self.down, self.up),
        };
        if pat != from {
            return false;
        }
        for k in 0..self.n as usize {
            bits[self.edges[k]] = (to >> k) & 1;
        }
        true
    }
}

/// Switchable faces of a domain (all bounded faces but the triangle), in the
/// order of [`Domain::faces`].
#[derive(Clone, Debug)]
pub struct Dynamics {
    domain: Domain,
    moves: Vec<Move>,
}

impl Dynamics {
    pub fn new(domain: &Domain) -> Self {
        let moves = domain
            .faces()
            .iter()
            .filter(|f| f.kind != FaceKind::Triangle)
            .map(Move::of_face)
            .collect();
        Self { domain: *domain, moves }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n_faces(&self) -> usize {
        self.moves.len()
    }

    pub fn clock(&self, seed: u64) -> ClockStream {
        ClockStream::new(seed, self.n_faces())
    }

    /// Applies one event to raw bits; returns whether anything changed.
    #[inline]
    pub fn apply(&self, bits: &mut [u8], face: usize, dir: Direction) -> bool {
        self.moves[face].apply(bits, dir)
    }
}

/// Switches `face` of `e` in place. Returns whether the pattern was present.
pub fn switch(e: &mut PathEnsemble, face: &Face, dir: Direction) -> Result<bool, SamplerError> {
    if face.kind == FaceKind::Triangle {
        return Err(SamplerError::TriangleSwitch);
    }
    Ok(Move::of_face(face).apply(e.bits_mut(), dir))
}

/// A Glauber chain: the current ensemble and the number of events applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainState {
    pub ensemble: PathEnsemble,
    pub step: u64,
}

impl ChainState {
    pub fn new(ensemble: PathEnsemble) -> Self {
        Self { ensemble, step: 0 }
    }
}

/// Applies `n_events` events of `clock`.
pub fn run(state: &mut ChainState, dynamics: &Dynamics, n_events: u64, clock: &mut ClockStream) {
    state.step += n_events;
    if dynamics.n_faces() == 0 {
        return;
    }
    let bits = state.ensemble.bits_mut();
    for _ in 0..n_events {
        let (f, dir) = clock.next_event();
        dynamics.apply(bits, f, dir);
    }
}

fn ordered(low: &PathEnsemble, high: &PathEnsemble) -> Result<bool, SamplerError> {
    let shift = low.n_paths().checked_sub(high.n_paths()).ok_or(SamplerError::Unordered)?;
    Ok(matches!(compare_shifted(low, high, shift)?, Comparison::Less | Comparison::Equal))
}

/// Runs two chains on one domain with a shared clock, checking after every
/// event that `low <= high`. When `low` has `s` more paths than `high`, the
/// order is taken after dropping the first `s` paths of `low`.
pub fn coupled_run(
    low: &mut ChainState,
    high: &mut ChainState,
    dynamics: &Dynamics,
    n_events: u64,
    clock: &mut ClockStream,
) -> Result<(), SamplerError> {
    if !ordered(&low.ensemble, &high.ensemble)? {
        return Err(SamplerError::Unordered);
    }
    if dynamics.n_faces() == 0 {
        low.step += n_events;
        high.step += n_events;
        return Ok(());
    }
    for _ in 0..n_events {
        let (f, dir) = clock.next_event();
        let a = dynamics.apply(low.ensemble.bits_mut(), f, dir);
        let b = dynamics.apply(high.ensemble.bits_mut(), f, dir);
        low.step += 1;
        high.step += 1;
        if (a || b) && !ordered(&low.ensemble, &high.ensemble)? {
            return Err(SamplerError::OrderViolated(low.step));
        }
    }
    Ok(())
}

/// An exact sample and the length of the coalescing run.
#[derive(Clone, Debug)]
pub struct CftpSample {
    pub ensemble: PathEnsemble,
    pub events: u64,
}

/// Exact uniform sample by monotone coupling from the past.
pub fn cftp_sample(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    seed: u64,
) -> Result<PathEnsemble, SamplerError> {
    cftp_sample_with(domain, boundary, r, seed, DEFAULT_BUDGET).map(|s| s.ensemble)
}

/// [`cftp_sample`] with an explicit budget on the total number of events.
///
/// Block `j` holds the events at times `[-2^j, -2^(j-1))` and is regenerated
/// from sub-stream `j` of `seed`, so every restart reuses the same suffix.
pub fn cftp_sample_with(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    seed: u64,
    budget: u64,
) -> Result<CftpSample, SamplerError> {
    let lo = extremal_ensemble(domain, boundary, r, Side::Min)?;
    let hi = extremal_ensemble(domain, boundary, r, Side::Max)?;
    if lo == hi {
        return Ok(CftpSample { ensemble: lo, events: 0 });
    }
    let dynamics = Dynamics::new(domain);
    let n = dynamics.n_faces();
    let mut spent = 0u64;
    let mut k = 0u32;
    loop {
        let horizon = 1u64 << k;
        spent = spent.saturating_add(2 * horizon);
        if spent > budget {
            return Err(SamplerError::BudgetExceeded { budget });
        }
        let mut a = lo.clone();
        let mut b = hi.clone();
        for j in (0..=k).rev() {
            let len = if j == 0 { 1 } else { 1u64 << (j - 1) };
            let mut clock = ClockStream::with_stream(seed, j as u64, n);
            let (ba, bb) = (a.bits_mut(), b.bits_mut());
            for _ in 0..len {
                let (f, dir) = clock.next_event();
                dynamics.apply(ba, f, dir);
                dynamics.apply(bb, f, dir);
            }
        }
        if a == b {
            return Ok(CftpSample { ensemble: a, events: horizon });
        }
        k += 1;
    }
}

/// Burn-in and spacing of a non-exact Glauber run, in events.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlauberSchedule {
    pub burn_in: u64,
    pub spacing: u64,
}

impl GlauberSchedule {
    /// `20 F ln F` events of burn-in and `F` between samples for `F` faces.
    pub fn for_faces(n_faces: usize) -> Self {
        let f = n_faces.max(2) as f64;
        Self { burn_in: libm::ceil(20.0 * f * libm::log(f)) as u64, spacing: n_faces.max(1) as u64 }
    }
}

/// Spaced samples of a single Glauber chain.
#[derive(Clone, Debug)]
pub struct GlauberSampler {
    state: ChainState,
    dynamics: Dynamics,
    clock: ClockStream,
    schedule: GlauberSchedule,
    burnt: bool,
}

impl GlauberSampler {
    pub fn new(initial: PathEnsemble, seed: u64, schedule: Option<GlauberSchedule>) -> Self {
        let dynamics = Dynamics::new(initial.domain());
        let clock = dynamics.clock(seed);
        let schedule = schedule.unwrap_or_else(|| GlauberSchedule::for_faces(dynamics.n_faces()));
        Self { state: ChainState::new(initial), dynamics, clock, schedule, burnt: false }
    }

    pub fn schedule(&self) -> GlauberSchedule {
        self.schedule
    }

    /// Advances to the next sample.
    pub fn next_sample(&mut self) -> &PathEnsemble {
        let n = if self.burnt { self.schedule.spacing } else { self.schedule.burn_in };
        self.burnt = true;
        run(&mut self.state, &self.dynamics, n, &mut self.clock);
        &self.state.ensemble
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }
}

/// `count` spaced samples started from the north-west most ensemble.
pub fn glauber_samples(
    domain: &Domain,
    boundary: &BoundaryData,
    r: u32,
    count: usize,
    seed: u64,
    schedule: Option<GlauberSchedule>,
) -> Result<Vec<PathEnsemble>, SamplerError> {
    let start = extremal_ensemble(domain, boundary, r, Side::Min)?;
    let mut s = GlauberSampler::new(start, seed, schedule);
    Ok((0..count).map(|_| s.next_sample().clone()).collect())
}

#[derive(Clone, Copy, Debug)]
enum DefectMove {
    Square(Move),
    /// Horizontal edge into the lower end of diagonal `m`, the two lower-end
    /// arrows `m - 1`, `m` (zero based) and the tower edge above diagonal `m`.
    Diagonal { h: usize, m: usize, v: usize },
}

/// Glauber dynamics of the defective model.
///
/// Square faces switch as usual. A face between diagonals `m` and `m + 1`
/// exchanges a lower path ending at diagonal `m` and a tower path leaving
/// the diagonal `m + 1` with the opposite pair, moving the defect by one.
#[derive(Clone, Debug)]
pub struct DefectiveDynamics {
    moves: Vec<DefectMove>,
}

impl DefectiveDynamics {
    pub fn new(domain: &Domain) -> Self {
        let (xu, yl) = (domain.xu(), domain.yl());
        let moves = domain
            .faces()
            .iter()
            .filter_map(|f| match f.kind {
                FaceKind::Square { .. } => Some(DefectMove::Square(Move::of_face(f))),
                FaceKind::Diagonal { m } => Some(DefectMove::Diagonal {
                    h: domain.index(EdgeSlot::H { x: xu - m as i64 - 1, y: yl }),
                    m: m as usize,
                    v: domain.index(EdgeSlot::V { x: xu, y: yl + m as i64 }),
                }),
                FaceKind::Triangle => None,
            })
            .collect();
        Self { moves }
    }

    pub fn n_faces(&self) -> usize {
        self.moves.len()
    }

    pub fn apply(&self, e: &mut DefectiveEnsemble, face: usize, dir: Direction) -> bool {
        let (bits, d1, d2) = e.parts_mut();
        match self.moves[face] {
            DefectMove::Square(mv) => mv.apply(bits, dir),
            DefectMove::Diagonal { h, m, v } => {
                let pat = [bits[h], d1[m - 1], d1[m], bits[v]];
                let (from, to) = match dir {
                    Direction::Up => ([1, 1, 0, 0], [0, 0, 1, 1]),
                    Direction::Down => ([0, 0, 1, 1], [1, 1, 0, 0]),
                };
                if pat != from {
                    return false;
                }
                bits[h] = to[0];
                d1[m - 1] = to[1];
                d1[m] = to[2];
                bits[v] = to[3];
                d2[m - 1] = 1 - to[1];
                d2[m] = 1 - to[2];
                true
            }
        }
    }

    pub fn run(&self, e: &mut DefectiveEnsemble, n_events: u64, clock: &mut ClockStream) {
        if clock.n_faces() == 0 {
            return;
        }
        for _ in 0..n_events {
            let (f, dir) = clock.next_event();
            self.apply(e, f, dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{compare, domain_wall_boundary};
    use crate::exact::{collect, DEFAULT_CAP};
    use crate::geometry::{build_augmented, build_domain};
    use alloc::collections::BTreeMap;
    use alloc::vec;

    #[test]
    fn up_switch_moves_the_corner_north_west() {
        let d = build_domain(0, 0, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let hi = extremal_ensemble(&d, &bd, 0, Side::Max).unwrap();
        let lo = extremal_ensemble(&d, &bd, 0, Side::Min).unwrap();
        let faces = d.faces();
        let mut e = hi.clone();
        let mut changed = 0;
        for f in &faces {
            changed += switch(&mut e, f, Direction::Up).unwrap() as u32;
        }
        assert_eq!(changed, 1);
        assert_eq!(e, lo);
        for f in &faces {
            switch(&mut e, f, Direction::Down).unwrap();
        }
        assert_eq!(e, hi);
    }

    #[test]
    fn empty_face_is_left_alone() {
        let d = build_domain(0, 0, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        let lo = extremal_ensemble(&d, &bd, 0, Side::Min).unwrap();
        let mut e = lo.clone();
        // the north-west most ensemble has no up pattern anywhere
        for f in &d.faces() {
            assert!(!switch(&mut e, f, Direction::Up).unwrap());
        }
        assert_eq!(e, lo);
    }

    #[test]
    fn triangle_is_refused() {
        let d = build_domain(1, 1, 1).unwrap();
        let bd = domain_wall_boundary(&d);
        let mut e = extremal_ensemble(&d, &bd, 1, Side::Min).unwrap();
        let t = *d.faces().last().unwrap();
        assert_eq!(switch(&mut e, &t, Direction::Up), Err(SamplerError::TriangleSwitch));
    }

    #[test]
    fn clock_is_reproducible() {
        let a: Vec<_> = ClockStream::new(7, 10).take(100).collect();
        let b: Vec<_> = ClockStream::new(7, 10).take(100).collect();
        let c: Vec<_> = ClockStream::with_stream(7, 1, 10).take(100).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&(f, _)| f < 10));
    }

    #[test]
    fn zero_events_is_identity() {
        let d = build_domain(1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let e = extremal_ensemble(&d, &bd, 1, Side::Max).unwrap();
        let dy = Dynamics::new(&d);
        let mut s = ChainState::new(e.clone());
        run(&mut s, &dy, 0, &mut dy.clock(1));
        assert_eq!(s.ensemble, e);
    }

    #[test]
    fn moves_connect_the_family() {
        for (a, b, c) in [(0, 0, 3), (1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1)] {
            let d = build_domain(a, b, c).unwrap();
            let bd = domain_wall_boundary(&d);
            let all = collect(&d, &bd, a, DEFAULT_CAP).unwrap();
            let index: BTreeMap<Vec<u8>, usize> =
                all.iter().enumerate().map(|(i, e)| (e.bits().to_vec(), i)).collect();
            let dy = Dynamics::new(&d);
            let mut seen = vec![false; all.len()];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for f in 0..dy.n_faces() {
                    for dir in [Direction::Up, Direction::Down] {
                        let mut bits = all[i].bits().to_vec();
                        if dy.apply(&mut bits, f, dir) {
                            let j = *index.get(&bits).expect("switch leaves the family");
                            if !seen[j] {
                                seen[j] = true;
                                stack.push(j);
                            }
                        }
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "T({a},{b},{c}) not connected");
        }
    }

    #[test]
    fn extremes_stay_ordered() {
        let d = build_domain(0, 0, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        let dy = Dynamics::new(&d);
        let mut lo = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Min).unwrap());
        let mut hi = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Max).unwrap());
        coupled_run(&mut lo, &mut hi, &dy, 20_000, &mut dy.clock(3)).unwrap();
        assert_ne!(compare(&lo.ensemble, &hi.ensemble).unwrap(), Comparison::Greater);
    }

    #[test]
    fn identical_states_stay_identical() {
        let d = build_domain(1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let dy = Dynamics::new(&d);
        let e = extremal_ensemble(&d, &bd, 1, Side::Min).unwrap();
        let mut a = ChainState::new(e.clone());
        let mut b = ChainState::new(e);
        coupled_run(&mut a, &mut b, &dy, 5_000, &mut dy.clock(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unordered_start_is_refused() {
        let d = build_domain(0, 0, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let dy = Dynamics::new(&d);
        let mut lo = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Min).unwrap());
        let mut hi = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Max).unwrap());
        let err = coupled_run(&mut hi, &mut lo, &dy, 1, &mut dy.clock(0)).unwrap_err();
        assert_eq!(err, SamplerError::Unordered);
    }

    #[test]
    fn cftp_is_deterministic_and_valid() {
        let d = build_domain(1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let a = cftp_sample(&d, &bd, 1, 42).unwrap();
        let b = cftp_sample(&d, &bd, 1, 42).unwrap();
        assert_eq!(a, b);
        a.validate_restricted(1).unwrap();
    }

    #[test]
    fn cftp_singleton_takes_no_events() {
        let d = build_domain(0, 0, 1).unwrap();
        let bd = domain_wall_boundary(&d);
        let s = cftp_sample_with(&d, &bd, 0, 5, 16).unwrap();
        assert_eq!(s.events, 0);
    }

    #[test]
    fn cftp_budget_is_reported() {
        let d = build_domain(1, 2, 3).unwrap();
        let bd = domain_wall_boundary(&d);
        let err = cftp_sample_with(&d, &bd, 1, 5, 4).unwrap_err();
        assert_eq!(err, SamplerError::BudgetExceeded { budget: 4 });
    }

    #[test]
    fn glauber_on_two_element_family_is_fair() {
        let d = build_domain(0, 0, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let lo = extremal_ensemble(&d, &bd, 0, Side::Min).unwrap();
        let mut s = GlauberSampler::new(lo.clone(), 11, None);
        let n = 100_000;
        let hits = (0..n).filter(|_| *s.next_sample() == lo).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "{freq}");
    }

    #[test]
    fn augmented_chain_keeps_restriction() {
        let d = build_augmented(1, 1, 1, 2).unwrap();
        let bd = domain_wall_boundary(&d);
        let samples = glauber_samples(&d, &bd, 1, 50, 3, None).unwrap();
        for e in &samples {
            e.validate_restricted(1).unwrap();
        }
    }

    #[test]
    fn defective_moves_stay_valid() {
        for (a, b, c) in [(1, 1, 1), (1, 1, 2), (2, 1, 2), (2, 3, 1)] {
            let d = build_domain(a, b, c).unwrap();
            let mut e = DefectiveEnsemble::staircase(&d).unwrap();
            let dy = DefectiveDynamics::new(&d);
            let mut clock = ClockStream::new(1, dy.n_faces());
            for _ in 0..2_000 {
                let (f, dir) = clock.next_event();
                if dy.apply(&mut e, f, dir) {
                    e = DefectiveEnsemble::new(
                        d,
                        e.bits().to_vec(),
                        e.lower_diagonal().to_vec(),
                        e.upper_diagonal().to_vec(),
                    )
                    .unwrap();
                }
            }
        }
    }
}
