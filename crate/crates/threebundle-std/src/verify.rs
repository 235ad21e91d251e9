//! The acceptance suite: exact oracles against closed forms, sampler checks,
//! curve identities and path statistics.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use threebundle_core::analysis::{
    boundary_error, deep_frozen_vertices, envelope_gap, total_variation, xi_brute_force, xi_pruned, FrozenFraction,
    FrozenRegions,
};
use threebundle_core::ensemble::{frozen_region, ConfigView, DefectiveEnsemble};
use threebundle_core::exact::{asm_count, collect, defective_refined, empirical_refined, enumerate_with, DEFAULT_CAP};
use threebundle_core::formulas::{
    curve_se, nu, phi_pmf, phi_pmf_log, refined_h, sigma, solve_z_psi, variational, z_grid, zeta, CurveParams,
    ExactDist,
};
use threebundle_core::geometry::Quadrant;
use threebundle_core::sampler::{
    cftp_sample, coupled_run, extremal_ensemble, ChainState, ClockStream, DefectiveDynamics, Dynamics,
    GlauberSampler, Side,
};
use threebundle_core::{build_augmented, build_domain, domain_wall_boundary, BoundaryData, LatticePoint};

/// Outcome of one criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub details: Vec<String>,
}

impl CriterionReport {
    /// `PASS criterion 3 (normalization) ...` on one line.
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}) in {:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

#[derive(Default)]
struct Log {
    ok: bool,
    details: Vec<String>,
}

impl Log {
    fn note(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    fn require(&mut self, cond: bool, s: impl Into<String>) {
        let s = s.into();
        self.details.push(if cond { s } else { format!("violated: {s}") });
        self.ok &= cond;
    }
}

type Body = fn(&mut Log, u64) -> Result<(), String>;

/// `(id, name, body)` for every criterion.
const CRITERIA: [(u32, &str, Body); 10] = [
    (1, "enumeration baseline", enumeration_baseline),
    (2, "closed form equals enumeration", formula_equals_enumeration),
    (3, "normalization", normalization),
    (4, "sampler correctness", sampler_correctness),
    (5, "monotone coupling", monotonicity),
    (6, "curve identities", curve_identities),
    (7, "variational checks", variational_checks),
    (8, "exit column concentration", phi_concentration),
    (9, "arctic boundary trend", arctic_trend),
    (10, "statistic oracles", statistic_oracles),
];

pub const ALL: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn criterion_name(id: u32) -> Option<&'static str> {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1)
}

/// Runs one criterion.
pub fn run_criterion(id: u32, seed: u64) -> Option<CriterionReport> {
    let &(id, name, body) = CRITERIA.iter().find(|c| c.0 == id)?;
    let t = Instant::now();
    let mut log = Log { ok: true, details: Vec::new() };
    if let Err(e) = body(&mut log, seed) {
        log.ok = false;
        log.details.push(format!("error: {e}"));
    }
    Some(CriterionReport { id, name, passed: log.ok, seconds: t.elapsed().as_secs_f64(), details: log.details })
}

/// Runs the given criteria in order; unknown ids are skipped.
pub fn run(ids: &[u32], seed: u64) -> VerifyReport {
    let criteria: Vec<CriterionReport> = ids.iter().filter_map(|&i| run_criterion(i, seed)).collect();
    VerifyReport { passed: criteria.iter().all(|c| c.passed), seed, criteria }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rational_str(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn law_str(probs: &[BigRational]) -> String {
    let v: Vec<String> = probs.iter().map(rational_str).collect();
    format!("[{}]", v.join(", "))
}

/// `P[K = k]` for `k` in `1..=top`, zero outside the support.
fn on_range(d: &ExactDist, top: i64) -> Vec<BigRational> {
    (1..=top).map(|k| d.prob(k)).collect()
}

fn enumeration_baseline(log: &mut Log, _seed: u64) -> Result<(), String> {
    let t = Instant::now();
    for (c, expected) in (1..=5u32).zip([1u64, 2, 7, 42, 429]) {
        let d = build_domain(0, 0, c).map_err(err)?;
        let n = enumerate_with(&d, &domain_wall_boundary(&d), 0, DEFAULT_CAP, |_| {}).map_err(err)?;
        let asm = asm_count(c);
        log.require(
            n == expected && asm == expected.into(),
            format!("C = {c}: enumeration {n}, product formula {asm}, expected {expected}"),
        );
    }
    let secs = t.elapsed().as_secs_f64();
    log.require(secs < 60.0, format!("runtime {secs:.2}s (limit 60s)"));
    Ok(())
}

fn formula_equals_enumeration(log: &mut Log, _seed: u64) -> Result<(), String> {
    let t = Instant::now();
    for (a, b, c) in [(1u32, 1u32, 1u32), (1, 2, 1), (2, 1, 1), (1, 1, 2)] {
        let top = (a + 2 * b + c + 1) as i64;
        let closed: Vec<BigRational> = (1..=top).map(|k| refined_h(a, b, c + 1, k)).collect::<Result<_, _>>().map_err(err)?;
        let enumerated = on_range(&empirical_refined(a, b, c + 1).map_err(err)?, top);
        let defective = on_range(&defective_refined(a, b, c + 1).map_err(err)?, top);
        let c1 = c + 1;
        if closed == enumerated {
            log.require(true, format!("T({a},{b},{c1}): K law equals the closed form {}", law_str(&closed)));
        } else {
            log.require(
                false,
                format!(
                    "T({a},{b},{c1}): K law of the restricted family {} differs from the closed form {}",
                    law_str(&enumerated),
                    law_str(&closed)
                ),
            );
            log.note(format!(
                "T({a},{b},{c1}): the defective model's K law {} the closed form",
                if defective == closed { "equals" } else { "also differs from" }
            ));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    log.require(secs < 300.0, format!("runtime {secs:.2}s (limit 300s)"));
    Ok(())
}

fn normalization(log: &mut Log, _seed: u64) -> Result<(), String> {
    let one = BigRational::one();
    let mut checked = 0;
    for a in 1..=3u32 {
        for b in 0..=3u32 {
            for c in 1..=3u32 {
                let top = (a + 2 * b + c + 1) as i64;
                let mut s = BigRational::zero();
                for k in 1..=top {
                    s += refined_h(a, b, c + 1, k).map_err(err)?;
                }
                log.ok &= s == one;
                if s != one {
                    log.note(format!("violated: sum of H({a},{b},{})(k) is {}", c + 1, rational_str(&s)));
                }
                for psi in [0u32, 1, 5] {
                    let t = phi_pmf(a, b, c, psi).map_err(err)?.total();
                    log.ok &= t == one;
                    if t != one {
                        log.note(format!("violated: Phi law of ({a},{b},{c}), Psi = {psi} sums to {}", rational_str(&t)));
                    }
                    checked += 1;
                }
            }
        }
    }
    log.note(format!("{checked} Phi laws and {} H laws sum to 1 exactly", checked / 3));
    Ok(())
}

fn sampler_correctness(log: &mut Log, seed: u64) -> Result<(), String> {
    let d = build_domain(1, 1, 2).map_err(err)?;
    let bd = domain_wall_boundary(&d);
    let start = extremal_ensemble(&d, &bd, 1, Side::Min).map_err(err)?;
    let mut g = GlauberSampler::new(start, seed, None);
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    for _ in 0..100_000 {
        *hist.entry(g.next_sample().exit_k().map_err(err)?).or_default() += 1;
    }
    let tv = total_variation(&hist, &empirical_refined(1, 1, 2).map_err(err)?);
    let s = g.schedule();
    log.require(
        tv < 0.02,
        format!(
            "Glauber on T(1,1,2): TV {tv:.4} over 100000 samples (burn-in {}, spacing {} events)",
            s.burn_in, s.spacing
        ),
    );

    let d = build_domain(0, 0, 3).map_err(err)?;
    let bd = domain_wall_boundary(&d);
    let family = collect(&d, &bd, 0, DEFAULT_CAP).map_err(err)?;
    let index: HashMap<Vec<u8>, usize> = family.iter().enumerate().map(|(i, e)| (e.bits().to_vec(), i)).collect();
    let mut counts = vec![0u64; family.len()];
    let runs = 10_000u64;
    for i in 0..runs {
        let e = cftp_sample(&d, &bd, 0, seed.wrapping_add(i)).map_err(err)?;
        match index.get(e.bits()) {
            Some(&j) => counts[j] += 1,
            None => {
                log.require(false, "CFTP returned an ensemble outside the family");
                return Ok(());
            }
        }
    }
    let expect = runs as f64 / family.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let df = (family.len() - 1) as f64;
    let p = ChiSquared::new(df).map_err(err)?.sf(chi2);
    log.require(family.len() == 7, format!("T(0,0,3) has {} ensembles", family.len()));
    log.require(p > 0.001, format!("CFTP over {runs} seeds: counts {counts:?}, chi2 {chi2:.2}, p = {p:.4}"));
    Ok(())
}

/// `u` without its first entrance and `w` without the exit of index `A`.
fn without_added_path(bd: &BoundaryData, a: usize) -> BoundaryData {
    let mut out = bd.clone();
    out.u.remove(0);
    out.w.remove(a);
    out
}

fn monotonicity(log: &mut Log, seed: u64) -> Result<(), String> {
    let events = 100_000u64;
    let d = build_domain(0, 0, 4).map_err(err)?;
    let bd = domain_wall_boundary(&d);
    let dy = Dynamics::new(&d);
    let mut lo = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Min).map_err(err)?);
    let mut hi = ChainState::new(extremal_ensemble(&d, &bd, 0, Side::Max).map_err(err)?);
    let res = coupled_run(&mut lo, &mut hi, &dy, events, &mut dy.clock(seed));
    log.require(res.is_ok(), format!("T(0,0,4) extremes over {events} shared events: {res:?}"));

    let (a, psi) = (1u32, 2u32);
    let x = build_augmented(a, 1, 2, psi).map_err(err)?;
    let g_bd = domain_wall_boundary(&x);
    let d_bd = without_added_path(&g_bd, a as usize);
    let dy = Dynamics::new(&x);
    let mut g = ChainState::new(extremal_ensemble(&x, &g_bd, a, Side::Min).map_err(err)?);
    let mut h = ChainState::new(extremal_ensemble(&x, &d_bd, a, Side::Max).map_err(err)?);
    let res = coupled_run(&mut g, &mut h, &dy, events, &mut dy.clock(seed ^ 0x5eed));
    log.require(
        res.is_ok(),
        format!("augmented T(1,1,2), Psi = {psi}: second path of the augmented chain against the first path of the plain one over {events} events: {res:?}"),
    );
    Ok(())
}

fn curve_identities(log: &mut Log, _seed: u64) -> Result<(), String> {
    let params = [(0.25, 0.5, 0.25), (0.5, 0.25, 0.25), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), (0.1, 0.2, 0.7), (0.0, 0.0, 1.0)];
    let grid: Vec<f64> = z_grid(1000, 1e-2, 1e2)[1..=1000].to_vec();
    for (a, b, c) in params {
        let p = CurveParams::new(a, b, c).map_err(err)?;
        let mut worst = 0.0f64;
        for &z in &grid {
            let (x, y) = curve_se(z, &p).map_err(err)?;
            worst = worst.max((y - z * x + zeta(z, &p).map_err(err)?).abs());
        }
        log.require(worst < 1e-12, format!("({a:.3},{b:.3},{c:.3}): Legendre residual {worst:.2e} on 1000 slopes"));
        let (x0, y0) = curve_se(0.0, &p).map_err(err)?;
        let e0 = (x0 - (0.5 + b * c / (a + c))).abs().max(y0.abs());
        let (x1, y1) = curve_se(f64::INFINITY, &p).map_err(err)?;
        let y_inf = if b + c > 0.0 { 0.5 + a * b / (b + c) } else { 0.5 };
        let e1 = (x1 - (1.0 + b)).abs().max((y1 - y_inf).abs());
        let (x6, y6) = curve_se(1e6, &p).map_err(err)?;
        let e6 = (x6 - (1.0 + b)).abs().max((y6 - y_inf).abs());
        log.require(
            e0 < 1e-10 && e1 < 1e-10 && e6 < 1e-5,
            format!("({a:.3},{b:.3},{c:.3}): endpoint errors {e0:.1e} at z = 0, {e1:.1e} at z = inf, {e6:.1e} at z = 1e6"),
        );
    }
    let p = CurveParams::new(0.0, 0.0, 1.0).map_err(err)?;
    let mut worst = 0.0f64;
    for z in z_grid(1000, 1e-4, 1e4) {
        let (x, y) = curve_se(z, &p).map_err(err)?;
        worst = worst.max(((2.0 * x - 1.0).powi(2) + (2.0 * y - 1.0).powi(2) - 4.0 * (1.0 - x) * y - 1.0).abs());
    }
    log.require(worst < 1e-10, format!("(0,0,1): ellipse residual {worst:.2e}"));
    Ok(())
}

fn value(x: f64, y: f64, psi: f64, p: &CurveParams) -> Result<f64, String> {
    variational(x, y, psi, p).map(|v| v.value()).map_err(err)
}

/// Largest eigenvalue of the central-difference Hessian with step `h`.
fn numeric_lambda_max(x: f64, y: f64, h: f64, psi: f64, p: &CurveParams) -> Result<f64, String> {
    let f = |dx: f64, dy: f64| value(x + dx, y + dy, psi, p);
    let f0 = f(0.0, 0.0)?;
    let hxx = (f(h, 0.0)? - 2.0 * f0 + f(-h, 0.0)?) / (h * h);
    let hyy = (f(0.0, h)? - 2.0 * f0 + f(0.0, -h)?) / (h * h);
    let hxy = (f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h);
    let mid = 0.5 * (hxx + hyy);
    Ok(mid + (0.25 * (hxx - hyy).powi(2) + hxy * hxy).sqrt())
}

fn variational_checks(log: &mut Log, _seed: u64) -> Result<(), String> {
    let params = [(0.25, 0.5, 0.25), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), (0.5, 0.25, 0.25)];
    for (a, b, c) in params {
        let p = CurveParams::new(a, b, c).map_err(err)?;
        for psi in [0.25, 1.0, 4.0] {
            let z = solve_z_psi(psi, &p).map_err(err)?;
            let (x, y) = (nu(z, &p).map_err(err)?, sigma(z).map_err(err)?);
            let h = 1e-5;
            let gx = (value(x + h, y, psi, &p)? - value(x - h, y, psi, &p)?) / (2.0 * h);
            let gy = (value(x, y + h, psi, &p)? - value(x, y - h, psi, &p)?) / (2.0 * h);
            let g = gx.hypot(gy);
            log.require(g < 1e-4, format!("({a:.3},{b:.3},{c:.3}), psi = {psi}: gradient {g:.1e} at ({x:.5}, {y:.5})"));

            let bound = -psi / (2.0 * (psi + 2.0)) + 1e-3;
            let mut worst = f64::NEG_INFINITY;
            for i in 0..20 {
                let x = (i as f64 + 0.5) / 20.0 * (1.0 + b);
                let (lo, hi) = ((x - b).max(0.0), x.min(1.0));
                for j in 0..20 {
                    let y = lo + (j as f64 + 0.5) / 20.0 * (hi - lo);
                    let gap = [x, 1.0 + b - x, y, 1.0 - y, x - y, b + y - x].into_iter().fold(f64::INFINITY, f64::min);
                    let l = numeric_lambda_max(x, y, (1e-2 * gap).min(1e-4), psi, &p)?;
                    worst = worst.max(l);
                }
            }
            log.require(
                worst <= bound,
                format!("({a:.3},{b:.3},{c:.3}), psi = {psi}: largest Hessian eigenvalue {worst:.4} (bound {bound:.4})"),
            );
        }
    }
    Ok(())
}

fn phi_concentration(log: &mut Log, _seed: u64) -> Result<(), String> {
    let n = 120u32;
    let p = CurveParams::new(0.25, 0.5, 0.25).map_err(err)?;
    let (a, b, c) = (n / 4, n / 2, n / 4);
    for psi in [0.25, 0.5, 1.0, 2.0] {
        let big_psi = (psi * n as f64).floor() as u32;
        let arg = phi_pmf_log(a, b, c, big_psi).map_err(err)?.argmax();
        let predicted = nu(solve_z_psi(psi, &p).map_err(err)?, &p).map_err(err)? * n as f64;
        log.require(
            (arg as f64 - predicted).abs() <= 2.0,
            format!("psi = {psi}: argmax {arg}, predicted {predicted:.2}"),
        );
    }
    Ok(())
}

struct TrendRun {
    n: u32,
    mean_hausdorff: f64,
    deep: Vec<(LatticePoint, Quadrant, f64)>,
}

/// Defective Glauber samples of `T(N/4, N/2, N/4)`: burn-in `4 F N^2`
/// events, then `samples` samples spaced `F N^2` apart.
fn trend_run(n: u32, samples: usize, seed: u64, regions: &FrozenRegions) -> Result<TrendRun, String> {
    let p = CurveParams::new(0.25, 0.5, 0.25).map_err(err)?;
    let d = build_domain(n / 4, n / 2, n / 4).map_err(err)?;
    let dy = DefectiveDynamics::new(&d);
    let unit = dy.n_faces() as u64 * (n as u64).pow(2);
    let mut e = DefectiveEnsemble::staircase(&d).map_err(err)?;
    let mut clock = ClockStream::new(seed, dy.n_faces());
    dy.run(&mut e, 4 * unit, &mut clock);
    let mut frac = FrozenFraction::new(&d);
    let mut total = 0.0;
    for _ in 0..samples {
        dy.run(&mut e, unit, &mut clock);
        total += boundary_error(&e.rightmost_path(), &p, n).map_err(err)?.hausdorff;
        frac.add(&frozen_region(&ConfigView::of_defective(&e)));
    }
    let deep = deep_frozen_vertices(&frac, regions, n, 0.15);
    Ok(TrendRun { n, mean_hausdorff: total / samples as f64, deep })
}

fn arctic_trend(log: &mut Log, seed: u64) -> Result<(), String> {
    let t = Instant::now();
    let p = CurveParams::new(0.25, 0.5, 0.25).map_err(err)?;
    let regions = FrozenRegions::new(&p, 2000).map_err(err)?;
    let sizes = [24u32, 48, 96];
    let runs: Vec<Result<TrendRun, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| {
                let regions = &regions;
                s.spawn(move || trend_run(n, 16, seed.wrapping_add(n as u64), regions))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("worker panicked".into()))).collect()
    });
    let runs: Vec<TrendRun> = runs.into_iter().collect::<Result<_, _>>()?;
    for r in &runs {
        log.note(format!("N = {}: mean Hausdorff distance {:.4} over 16 samples", r.n, r.mean_hausdorff));
    }
    let decreasing = runs.windows(2).all(|w| w[1].mean_hausdorff < w[0].mean_hausdorff);
    log.require(decreasing, "mean Hausdorff distance decreases with N");
    let last = runs.last().expect("three sizes");
    let mut per_quadrant: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (_, q, f) in &last.deep {
        let e = per_quadrant.entry(format!("{q:?}")).or_default();
        e.0 += 1;
        if *f <= 0.9 {
            e.1 += 1;
        }
    }
    let bad: usize = per_quadrant.values().map(|v| v.1).sum();
    log.require(
        bad == 0 && !last.deep.is_empty(),
        format!(
            "N = 96: {} vertices at distance > 0.15 inside frozen regions (per region, total and at most 0.9 frozen: {per_quadrant:?})",
            last.deep.len()
        ),
    );
    let secs = t.elapsed().as_secs_f64();
    log.require(secs < 1800.0, format!("runtime {secs:.1}s (limit 1800s)"));
    Ok(())
}

/// Up-right path with `steps` unit steps, each east with probability `east`.
pub fn random_path<R: Rng>(rng: &mut R, steps: usize, east: f64) -> Vec<LatticePoint> {
    let mut p = LatticePoint::new(0, 0);
    let mut out = vec![p];
    for _ in 0..steps {
        if rng.gen_bool(east) {
            p.x += 1;
        } else {
            p.y += 1;
        }
        out.push(p);
    }
    out
}

fn statistic_oracles(log: &mut Log, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let steps = rng.gen_range(1..40);
        let east = rng.gen_range(0.05..0.95);
        let path = random_path(&mut rng, steps, east);
        let (bf, pr) = (xi_brute_force(&path).map_err(err)?, xi_pruned(&path).map_err(err)?);
        worst = worst.max((bf - pr).abs());
        if (bf - pr).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    log.require(mismatches == 0, format!("Xi pruned against brute force on 500 paths: {mismatches} mismatches, largest gap {worst:.1e}"));
    let mut violations = 0;
    for _ in 0..10_000 {
        let steps = rng.gen_range(1..80);
        let east = rng.gen_range(0.05..0.95);
        let path = random_path(&mut rng, steps, east);
        if !envelope_gap(&path).map_err(err)?.holds() {
            violations += 1;
        }
    }
    log.require(violations == 0, format!("envelope inequality on 10000 paths: {violations} violations"));
    Ok(())
}
