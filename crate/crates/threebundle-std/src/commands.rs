//! The `curve`, `sample`, `enumerate`, `phi`, `verify` and `stats` commands.
//!
//! Each command writes its files into the output directory, always including
//! `manifest.json` with the resolved configuration, and returns a JSON
//! summary. Outputs depend only on the configuration and seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use threebundle_core::analysis::{aggregate, boundary_error, xi_statistic, FrozenFraction, PathSample};
use threebundle_core::ensemble::{frozen_region, ConfigView, DefectiveEnsemble};
use threebundle_core::exact::{enumerate, enumerate_defective_with, EnumOptions, DEFAULT_CAP};
use threebundle_core::formulas::{
    arctic_boundary, nu, nw_piece, phi_pmf, phi_pmf_log, refined_h_dist, solve_z_psi, CurveParams, ExactDist,
};
use threebundle_core::geometry::Domain;
use threebundle_core::sampler::{
    cftp_sample_with, extremal_ensemble, ClockStream, DefectiveDynamics, GlauberSampler, GlauberSchedule, Side,
    DEFAULT_BUDGET,
};
use threebundle_core::{build_augmented, build_domain, domain_wall_boundary, PathEnsemble};

use crate::config::{Mode, RunConfig, Sizes};
use crate::error::CliError;
use crate::output::{curves_svg, frozen_svg, OutputDir};
use crate::textfmt::{parse_records, write_defective, write_ensemble, Record};
use crate::verify;

/// Number of curve points per piece.
const CURVE_POINTS: usize = 1000;
/// Largest `A + B + C` for which the `Phi` law is computed exactly.
const EXACT_PHI_LIMIT: u32 = 200;

/// Summary of a finished command.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

fn out_dir(cfg: &RunConfig) -> Result<OutputDir, CliError> {
    Ok(OutputDir::new(cfg.out_dir(), cfg.force())?)
}

fn manifest(command: &str, cfg: &RunConfig, resolved: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "resolved": resolved,
    })
}

fn params_json(p: &CurveParams) -> Value {
    json!({ "a": p.a, "b": p.b, "c": p.c })
}

fn sizes_json(s: &Sizes, psi: Option<u32>) -> Value {
    json!({ "A": s.a, "B": s.b, "C": s.c, "N": s.n, "Psi": psi, "params": params_json(&s.params) })
}

fn domain_for(s: &Sizes, psi: Option<u32>) -> Result<Domain, CliError> {
    Ok(match psi {
        Some(p) => build_augmented(s.a, s.b, s.c, p)?,
        None => build_domain(s.a, s.b, s.c)?,
    })
}

#[derive(Serialize)]
struct CurveRow {
    piece: &'static str,
    z: f64,
    x: f64,
    y: f64,
}

/// Samples every arctic piece present for the parameters.
pub fn curve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let out = out_dir(cfg)?;
    out.claim(&["curves.csv", "curves.svg", "summary.json", "manifest.json"])?;
    let curves = arctic_boundary(&p, CURVE_POINTS)?;
    let rows = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |&(z, x, y)| CurveRow { piece: c.piece.name(), z, x, y }));
    let mut files = vec![out.write_csv("curves.csv", rows)?];
    files.push(out.write_text("curves.svg", &curves_svg(&p, &curves))?);
    let summary = json!({
        "params": params_json(&p),
        "nw_piece": nw_piece(&p).map(|q| q.name()),
        "pieces": curves.iter().map(|c| json!({
            "piece": c.piece.name(),
            "points": c.points.len(),
            "start": c.points.first().map(|&(_, x, y)| [x, y]),
            "end": c.points.last().map(|&(_, x, y)| [x, y]),
        })).collect::<Vec<_>>(),
    });
    files.push(out.write_json("summary.json", &summary)?);
    files.push(out.write_json("manifest.json", &manifest("curve", cfg, json!({ "params": params_json(&p), "points": CURVE_POINTS })))?);
    Ok(Outcome { summary, files })
}

#[derive(Serialize)]
struct PmfRow {
    k: i64,
    count: String,
    prob_num: String,
    prob_den: String,
}

fn pmf_rows(hist: &BTreeMap<i64, BigUint>) -> (Vec<PmfRow>, BigUint) {
    let total: BigUint = hist.values().sum();
    let rows = hist
        .iter()
        .map(|(&k, c)| {
            let q = num_rational::BigRational::new(c.clone().into(), total.clone().into());
            PmfRow { k, count: c.to_string(), prob_num: q.numer().to_string(), prob_den: q.denom().to_string() }
        })
        .collect();
    (rows, total)
}

fn same_law(hist: &BTreeMap<i64, BigUint>, d: &ExactDist) -> bool {
    let total: BigUint = hist.values().sum();
    let lo = d.lo().min(hist.keys().next().copied().unwrap_or(d.lo()));
    let hi = d.hi().max(hist.keys().next_back().copied().unwrap_or(d.hi()));
    (lo..=hi).all(|k| {
        let c = hist.get(&k).cloned().unwrap_or_default();
        num_rational::BigRational::new(c.into(), total.clone().into()) == d.prob(k)
    })
}

/// Exhaustive count and exact exit-column law of a small family.
pub fn enumerate_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.sizes()?;
    let psi = cfg.psi_count(s.n)?;
    let defective = cfg.defective.unwrap_or(false);
    if defective && psi.is_some() {
        return Err(CliError::Config("the defective model lives on the plain domain; drop --psi/--Psi".into()));
    }
    let out = out_dir(cfg)?;
    out.claim(&["pmf.csv", "summary.json", "manifest.json"])?;
    let d = domain_for(&s, psi)?;
    let hist: BTreeMap<i64, BigUint> = if defective {
        let mut h: BTreeMap<i64, u64> = BTreeMap::new();
        enumerate_defective_with(&d, DEFAULT_CAP, |e: &DefectiveEnsemble| *h.entry(e.exit_k()).or_default() += 1)?;
        h.into_iter().map(|(k, c)| (k, c.into())).collect()
    } else {
        enumerate(&d, &domain_wall_boundary(&d), s.a, EnumOptions::default())?.exit_hist
    };
    let (rows, count) = pmf_rows(&hist);
    // the closed form for T(A, B, C) is stated with C = (C - 1) + 1
    let closed = match psi {
        _ if s.a == 0 => None,
        Some(p) => Some(phi_pmf(s.a, s.b, s.c, p)?),
        None if s.c >= 2 => Some(refined_h_dist(s.a, s.b, s.c)?),
        None => None,
    };
    let mut files = vec![out.write_csv("pmf.csv", rows)?];
    let summary = json!({
        "A": s.a, "B": s.b, "C": s.c, "Psi": psi, "r": s.a,
        "model": if defective { "defective" } else { "restricted" },
        "exit_variable": if psi.is_some() { "Phi" } else { "K" },
        "count": count.to_string().parse::<u64>().ok(),
        "closed_form_equal": closed.map(|c| same_law(&hist, &c)),
    });
    files.push(out.write_json("summary.json", &summary)?);
    files.push(out.write_json("manifest.json", &manifest("enumerate", cfg, sizes_json(&s, psi)))?);
    Ok(Outcome { summary, files })
}

#[derive(Serialize)]
struct PhiExactRow {
    #[serde(rename = "X")]
    x: i64,
    prob_num: String,
    prob_den: String,
    prob: f64,
}

#[derive(Serialize)]
struct PhiLogRow {
    #[serde(rename = "X")]
    x: i64,
    log_prob: f64,
    prob: f64,
}

/// Law of the column where the added path enters the upper part.
pub fn phi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.sizes()?;
    let psi = cfg.psi_count(s.n)?.unwrap_or(0);
    let out = out_dir(cfg)?;
    out.claim(&["phi.csv", "summary.json", "manifest.json"])?;
    let exact = s.a + s.b + s.c <= EXACT_PHI_LIMIT;
    let (file, argmax, mean) = if exact {
        let d = phi_pmf(s.a, s.b, s.c, psi)?;
        let f = d.to_f64();
        let rows = d.probs().into_iter().zip(&f).enumerate().map(|(i, (q, &p))| PhiExactRow {
            x: d.lo() + i as i64,
            prob_num: q.numer().to_string(),
            prob_den: q.denom().to_string(),
            prob: p,
        });
        let mean: f64 = f.iter().enumerate().map(|(i, p)| (d.lo() + i as i64) as f64 * p).sum();
        (out.write_csv("phi.csv", rows)?, d.argmax(), mean)
    } else {
        let d = phi_pmf_log(s.a, s.b, s.c, psi)?;
        let z = d.log_normalizer();
        let probs = d.probs();
        let rows = d.log_weights.iter().zip(&probs).enumerate().map(|(i, (&w, &p))| PhiLogRow {
            x: d.lo + i as i64,
            log_prob: w - z,
            prob: p,
        });
        let mean: f64 = probs.iter().enumerate().map(|(i, p)| (d.lo + i as i64) as f64 * p).sum();
        (out.write_csv("phi.csv", rows)?, d.argmax(), mean)
    };
    let n = s.n as f64;
    let predicted = if s.params.a > 0.0 {
        let z = solve_z_psi(psi as f64 / n, &s.params)?;
        Some(nu(z, &s.params)? * n)
    } else {
        None
    };
    let summary = json!({
        "A": s.a, "B": s.b, "C": s.c, "Psi": psi,
        "form": if exact { "exact" } else { "log" },
        "argmax": argmax,
        "mean": mean,
        "predicted_argmax": predicted,
    });
    let files = vec![
        file,
        out.write_json("summary.json", &summary)?,
        out.write_json("manifest.json", &manifest("phi", cfg, sizes_json(&s, Some(psi))))?,
    ];
    Ok(Outcome { summary, files })
}

/// One sampled configuration of either model.
enum Sampled {
    Paths(PathEnsemble),
    Defective(DefectiveEnsemble),
}

impl Sampled {
    fn record(&self) -> Result<String, CliError> {
        Ok(match self {
            Sampled::Paths(e) => write_ensemble(e)?,
            Sampled::Defective(e) => write_defective(e),
        })
    }

    fn domain(&self) -> &Domain {
        match self {
            Sampled::Paths(e) => e.domain(),
            Sampled::Defective(e) => e.domain(),
        }
    }

    fn path_sample(&self) -> Result<PathSample, CliError> {
        Ok(match self {
            Sampled::Paths(e) if e.domain().is_augmented() => {
                PathSample { path: e.rightmost_path(), k: None, phi: Some(e.phi()?) }
            }
            Sampled::Paths(e) => PathSample { path: e.rightmost_path(), k: Some(e.exit_k()?), phi: None },
            Sampled::Defective(e) => PathSample { path: e.rightmost_path(), k: Some(e.exit_k()), phi: None },
        })
    }

    fn view(&self) -> ConfigView {
        match self {
            Sampled::Paths(e) => ConfigView::of_ensemble(e),
            Sampled::Defective(e) => ConfigView::of_defective(e),
        }
    }
}

#[derive(Serialize)]
struct StatsRow {
    sample_id: usize,
    #[serde(rename = "K")]
    k: Option<i64>,
    #[serde(rename = "Phi")]
    phi: Option<i64>,
    #[serde(rename = "Xi")]
    xi: f64,
    max_dist: Option<f64>,
    hausdorff: Option<f64>,
}

#[derive(Serialize)]
struct FrozenRow {
    x: i64,
    y: i64,
    fraction: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    x: i64,
    mean: f64,
    q10: f64,
    q90: f64,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Writes `stats.csv`, `profile.csv`, `frozen.csv` and `frozen.svg`; returns
/// the summary.
fn analyse(samples: &[Sampled], p: &CurveParams, n: u32, out: &OutputDir, files: &mut Vec<PathBuf>) -> Result<Value, CliError> {
    let first = samples.first().ok_or_else(|| CliError::Config("no samples".into()))?;
    let domain = *first.domain();
    let mut rows = Vec::with_capacity(samples.len());
    let mut path_samples = Vec::with_capacity(samples.len());
    let mut hausdorff = Vec::new();
    let mut frac = FrozenFraction::new(&domain);
    for (i, s) in samples.iter().enumerate() {
        if *s.domain() != domain {
            return Err(CliError::Config("samples come from different domains".into()));
        }
        let ps = s.path_sample()?;
        let be = if domain.is_augmented() { None } else { Some(boundary_error(&ps.path, p, n)?) };
        if let Some(b) = be {
            hausdorff.push(b.hausdorff);
        }
        rows.push(StatsRow {
            sample_id: i,
            k: ps.k,
            phi: ps.phi,
            xi: xi_statistic(&ps.path)?,
            max_dist: be.map(|b| b.max_dist),
            hausdorff: be.map(|b| b.hausdorff),
        });
        frac.add(&frozen_region(&s.view()));
        path_samples.push(ps);
    }
    let summary = aggregate(&path_samples)?;
    files.push(out.write_csv("stats.csv", rows)?);
    files.push(out.write_csv(
        "profile.csv",
        summary.profile.iter().map(|&(x, mean, q10, q90)| ProfileRow { x, mean, q10, q90 }),
    )?);
    files.push(out.write_csv(
        "frozen.csv",
        frac.iter().map(|(v, f)| FrozenRow { x: v.x, y: v.y, fraction: f }),
    )?);
    let s = 1.0 / n as f64;
    let dots: Vec<([f64; 2], f64)> = frac.iter().map(|(v, f)| ([v.x as f64 * s, v.y as f64 * s], f)).collect();
    files.push(out.write_text("frozen.svg", &frozen_svg(p, &arctic_boundary(p, CURVE_POINTS)?, &dots))?);
    Ok(json!({
        "count": summary.count,
        "k_hist": summary.k_hist,
        "phi_hist": summary.phi_hist,
        "xi_mean": mean(&summary.xi),
        "xi_max": summary.xi.iter().copied().fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x)))),
        "hausdorff_mean": mean(&hausdorff),
    }))
}

const ANALYSIS_FILES: [&str; 5] = ["stats.csv", "profile.csv", "frozen.csv", "frozen.svg", "summary.json"];

fn threads(cfg: &RunConfig) -> usize {
    cfg.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
}

/// Independent CFTP samples; sample `i` uses seed `seed + i`, so the result
/// does not depend on the number of worker threads.
fn cftp_batch(d: &Domain, r: u32, count: usize, seed: u64, budget: u64, workers: usize) -> Result<Vec<PathEnsemble>, CliError> {
    let bd = domain_wall_boundary(d);
    let chunk = count.div_ceil(workers).max(1);
    let ids: Vec<usize> = (0..count).collect();
    let parts: Vec<Result<Vec<PathEnsemble>, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = ids
            .chunks(chunk)
            .map(|part| {
                let bd = &bd;
                s.spawn(move || {
                    part.iter()
                        .map(|&i| {
                            cftp_sample_with(d, bd, r, seed.wrapping_add(i as u64), budget)
                                .map(|x| x.ensemble)
                                .map_err(CliError::from)
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Failed("worker panicked".into())))).collect()
    });
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Samples by Glauber dynamics or CFTP and writes the records and statistics.
pub fn sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.sizes()?;
    let psi = cfg.psi_count(s.n)?;
    let mode = cfg.mode.unwrap_or_default();
    let defective = cfg.defective.unwrap_or(false);
    let count = cfg.samples.unwrap_or(100) as usize;
    if count == 0 {
        return Err(CliError::Config("--samples must be positive".into()));
    }
    if defective && (psi.is_some() || mode == Mode::Cftp) {
        return Err(CliError::Config("the defective model is sampled by Glauber dynamics on the plain domain".into()));
    }
    let out = out_dir(cfg)?;
    let mut names = vec!["samples.txt", "manifest.json"];
    names.extend(ANALYSIS_FILES);
    out.claim(&names)?;
    let d = domain_for(&s, psi)?;
    let seed = cfg.seed();
    let mut resolved = sizes_json(&s, psi);
    resolved["seed"] = json!(seed);
    resolved["mode"] = json!(mode);
    resolved["model"] = json!(if defective { "defective" } else { "restricted" });
    resolved["samples"] = json!(count);
    let samples: Vec<Sampled> = if defective {
        let dy = DefectiveDynamics::new(&d);
        let unit = dy.n_faces() as u64 * (s.n as u64).pow(2);
        let (burn_in, spacing) = (cfg.burn_in.unwrap_or(4 * unit), cfg.events.unwrap_or(unit));
        resolved["burn_in"] = json!(burn_in);
        resolved["spacing"] = json!(spacing);
        let mut e = DefectiveEnsemble::staircase(&d)?;
        let mut clock = ClockStream::new(seed, dy.n_faces());
        dy.run(&mut e, burn_in, &mut clock);
        (0..count)
            .map(|i| {
                if i > 0 {
                    dy.run(&mut e, spacing, &mut clock);
                }
                Sampled::Defective(e.clone())
            })
            .collect()
    } else {
        match mode {
            Mode::Glauber => {
                let bd = domain_wall_boundary(&d);
                let start = extremal_ensemble(&d, &bd, s.a, Side::Min)?;
                let base = GlauberSchedule::for_faces(threebundle_core::sampler::Dynamics::new(&d).n_faces());
                let sched = GlauberSchedule {
                    burn_in: cfg.burn_in.unwrap_or(base.burn_in),
                    spacing: cfg.events.unwrap_or(base.spacing),
                };
                resolved["burn_in"] = json!(sched.burn_in);
                resolved["spacing"] = json!(sched.spacing);
                let mut g = GlauberSampler::new(start, seed, Some(sched));
                (0..count).map(|_| Sampled::Paths(g.next_sample().clone())).collect()
            }
            Mode::Cftp => {
                let budget = cfg.events.unwrap_or(DEFAULT_BUDGET);
                resolved["budget"] = json!(budget);
                cftp_batch(&d, s.a, count, seed, budget, threads(cfg))?.into_iter().map(Sampled::Paths).collect()
            }
        }
    };
    let mut text = String::new();
    for x in &samples {
        text.push_str(&x.record()?);
        text.push('\n');
    }
    let mut files = vec![out.write_text("samples.txt", &text)?];
    let summary = analyse(&samples, &s.params, s.n, &out, &mut files)?;
    files.push(out.write_json("summary.json", &summary)?);
    files.push(out.write_json("manifest.json", &manifest("sample", cfg, resolved))?);
    Ok(Outcome { summary, files })
}

/// Statistics of the records in `--input`.
pub fn stats(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let input = cfg.input.as_ref().ok_or_else(|| CliError::Config("--input is required".into()))?;
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let samples: Vec<Sampled> = parse_records(&text)?
        .into_iter()
        .map(|r| match r {
            Record::Paths(e) => Sampled::Paths(e),
            Record::Defective(e) => Sampled::Defective(e),
        })
        .collect();
    let d = *samples.first().ok_or_else(|| CliError::Config("input holds no records".into()))?.domain();
    let n = d.a() + d.b() + d.c();
    let p = CurveParams::from_counts(d.a(), d.b(), d.c())?;
    let out = out_dir(cfg)?;
    let mut names = vec!["manifest.json"];
    names.extend(ANALYSIS_FILES);
    out.claim(&names)?;
    let mut files = Vec::new();
    let summary = analyse(&samples, &p, n, &out, &mut files)?;
    files.push(out.write_json("summary.json", &summary)?);
    let resolved = json!({ "A": d.a(), "B": d.b(), "C": d.c(), "Psi": d.is_augmented().then(|| d.psi()), "records": samples.len() });
    files.push(out.write_json("manifest.json", &manifest("stats", cfg, resolved))?);
    Ok(Outcome { summary, files })
}

/// Runs the acceptance suite; fails with exit code 3 when a criterion fails.
pub fn verify_cmd(cfg: &RunConfig, ids: &[u32], mut on_line: impl FnMut(&str)) -> Result<Outcome, CliError> {
    for &i in ids {
        if verify::criterion_name(i).is_none() {
            return Err(CliError::Config(format!("unknown criterion {i}")));
        }
    }
    let out = out_dir(cfg)?;
    out.claim(&["report.json", "manifest.json"])?;
    let seed = cfg.seed();
    let mut criteria = Vec::new();
    for &i in ids {
        let r = verify::run_criterion(i, seed).expect("checked above");
        on_line(&r.line());
        for d in &r.details {
            on_line(&format!("    {d}"));
        }
        criteria.push(r);
    }
    let report = verify::VerifyReport { passed: criteria.iter().all(|c| c.passed), seed, criteria };
    let files = vec![
        out.write_json("report.json", &report)?,
        out.write_json("manifest.json", &manifest("verify", cfg, json!({ "seed": seed, "criteria": ids })))?,
    ];
    if !report.passed {
        let failed: Vec<String> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
        return Err(CliError::Verification(format!("criteria {} failed", failed.join(", "))));
    }
    Ok(Outcome { summary: serde_json::to_value(&report).expect("serialisable"), files })
}
