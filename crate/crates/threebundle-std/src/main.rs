use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use threebundle::commands;
use threebundle::config::{Mode, RunConfig};
use threebundle::error::CliError;
use threebundle::verify;

/// Ice-point six-vertex ensembles on three-bundle domains.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the arctic curves and draw them over the limit domain.
    Curve(Flags),
    /// Sample ensembles by Glauber dynamics or coupling from the past.
    Sample(Flags),
    /// Count a small family exhaustively and tabulate its exit column.
    Enumerate(Flags),
    /// Exact law of the added path's entry column on the augmented domain.
    Phi(Flags),
    /// Run the acceptance suite.
    Verify {
        #[command(flatten)]
        flags: Flags,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u32>,
    },
    /// Recompute statistics from a file of sampled records.
    Stats(Flags),
}

#[derive(Args, Clone, Debug, Default)]
struct Flags {
    /// JSON configuration file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long = "A")]
    big_a: Option<u32>,
    #[arg(long = "B")]
    big_b: Option<u32>,
    #[arg(long = "C")]
    big_c: Option<u32>,
    /// Rescaled offset of the added entrance; `Psi = floor(psi N)`.
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long = "Psi")]
    big_psi: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    samples: Option<u64>,
    /// Events between Glauber samples, or the CFTP event budget.
    #[arg(long)]
    events: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    /// Use the defective model instead of the restricted one.
    #[arg(long)]
    defective: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Records to analyse (`stats`).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(RunConfig {
            a: self.a,
            b: self.b,
            c: self.c,
            n: self.n,
            big_a: self.big_a,
            big_b: self.big_b,
            big_c: self.big_c,
            psi: self.psi,
            big_psi: self.big_psi,
            seed: self.seed,
            mode: self.mode,
            samples: self.samples,
            events: self.events,
            burn_in: self.burn_in,
            defective: self.defective.then_some(true),
            threads: self.threads,
            input: self.input.clone(),
            out: self.out.clone(),
            force: self.force.then_some(true),
        }))
    }
}

fn run(cli: Cli) -> Result<Option<serde_json::Value>, CliError> {
    let outcome = match cli.command {
        Command::Curve(f) => commands::curve(&f.resolve()?)?,
        Command::Sample(f) => commands::sample(&f.resolve()?)?,
        Command::Enumerate(f) => commands::enumerate_cmd(&f.resolve()?)?,
        Command::Phi(f) => commands::phi(&f.resolve()?)?,
        Command::Stats(f) => commands::stats(&f.resolve()?)?,
        Command::Verify { flags, criteria } => {
            let ids = if criteria.is_empty() { verify::ALL.to_vec() } else { criteria };
            commands::verify_cmd(&flags.resolve()?, &ids, |l| println!("{l}"))?;
            return Ok(None);
        }
    };
    Ok(Some(outcome.summary))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""));
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(Some(summary)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use std::fs;
    use std::path::Path;

    use super::*;
    use threebundle_core::formulas::refined_h_dist;

    fn exec(dir: &Path, args: &[&str]) -> Result<Option<serde_json::Value>, CliError> {
        let out = dir.to_str().unwrap();
        let mut argv = vec!["threebundle"];
        argv.extend_from_slice(args);
        argv.extend(["--out", out]);
        run(Cli::try_parse_from(argv).map_err(|e| CliError::Config(e.to_string()))?)
    }

    fn summary(dir: &Path, args: &[&str]) -> serde_json::Value {
        exec(dir, args).unwrap().unwrap()
    }

    #[test]
    fn enumerate_counts_the_square_family() {
        let t = tempfile::tempdir().unwrap();
        let s = summary(t.path(), &["enumerate", "--A", "0", "--B", "0", "--C", "4"]);
        assert_eq!(s["count"], 42);
        assert!(t.path().join("pmf.csv").exists());
        assert!(t.path().join("manifest.json").exists());
    }

    #[test]
    fn phi_at_zero_offset_matches_the_refined_law() {
        let t = tempfile::tempdir().unwrap();
        summary(t.path(), &["phi", "--A", "1", "--B", "1", "--C", "1", "--Psi", "0"]);
        let expected = refined_h_dist(1, 1, 2).unwrap();
        let mut rows = csv::Reader::from_path(t.path().join("phi.csv")).unwrap();
        let got: Vec<(i64, String)> = rows
            .records()
            .map(|r| {
                let r = r.unwrap();
                (r[0].parse().unwrap(), format!("{}/{}", &r[1], &r[2]))
            })
            .collect();
        let want: Vec<(i64, String)> =
            expected.probs().iter().enumerate().map(|(i, q)| (expected.lo() + i as i64, q.to_string())).collect();
        let norm = |v: Vec<(i64, String)>| -> Vec<(i64, String)> {
            v.into_iter().map(|(k, q)| (k, if q.contains('/') { q } else { format!("{q}/1") })).collect()
        };
        assert_eq!(norm(got), norm(want));
    }

    #[test]
    fn curve_picks_the_northwest_piece() {
        let t = tempfile::tempdir().unwrap();
        let s = summary(t.path(), &["curve", "--a", "0.5", "--b", "0.25", "--c", "0.25"]);
        assert_eq!(s["nw_piece"], "NW_W");
        let s = summary(t.path(), &["curve", "--a", "0.25", "--b", "0.5", "--c", "0.25", "--force"]);
        assert_eq!(s["nw_piece"], "NW_N");
    }

    #[test]
    fn existing_outputs_need_force() {
        let t = tempfile::tempdir().unwrap();
        let args = ["enumerate", "--A", "1", "--B", "1", "--C", "1"];
        summary(t.path(), &args);
        let err = exec(t.path(), &args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let mut forced = args.to_vec();
        forced.push("--force");
        summary(t.path(), &forced);
    }

    #[test]
    fn conflicting_sizes_are_config_errors() {
        let t = tempfile::tempdir().unwrap();
        let err = exec(t.path(), &["enumerate", "--A", "1", "--B", "1", "--C", "1", "--a", "0.3"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = exec(t.path(), &["enumerate", "--A", "1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let cfg = t.path().join("bad.json");
        fs::write(&cfg, r#"{"A": 1, "B": 1, "C": 1, "bogus": 3}"#).unwrap();
        let err = exec(t.path(), &["enumerate", "--config", cfg.to_str().unwrap()]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.to_json()["error"]["exit_code"], 2);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let t = tempfile::tempdir().unwrap();
        let cfg = t.path().join("run.json");
        fs::write(&cfg, r#"{"A": 1, "B": 1, "C": 1}"#).unwrap();
        let s = summary(t.path(), &["enumerate", "--config", cfg.to_str().unwrap(), "--C", "2"]);
        assert_eq!(s["C"], 2);
    }

    #[test]
    fn cftp_budget_is_reported() {
        let t = tempfile::tempdir().unwrap();
        let args = ["sample", "--A", "2", "--B", "2", "--C", "2", "--mode", "cftp", "--samples", "1", "--events", "1"];
        let err = exec(t.path(), &args).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sampling_is_reproducible() {
        let (t1, t2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for mode in ["glauber", "cftp"] {
            let args = ["sample", "--A", "2", "--B", "1", "--C", "2", "--mode", mode, "--samples", "3", "--seed", "5", "--force"];
            summary(t1.path(), &args);
            summary(t2.path(), &args);
            for f in ["samples.txt", "stats.csv", "profile.csv", "frozen.csv", "frozen.svg", "summary.json"] {
                assert_eq!(fs::read(t1.path().join(f)).unwrap(), fs::read(t2.path().join(f)).unwrap(), "{mode} {f}");
            }
            let manifest = |dir: &Path| {
                let mut m: serde_json::Value =
                    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
                m["config"].as_object_mut().unwrap().remove("out");
                m
            };
            assert_eq!(manifest(t1.path()), manifest(t2.path()));
        }
    }

    #[test]
    fn stats_reproduces_the_sample_summary() {
        let t = tempfile::tempdir().unwrap();
        let s = summary(t.path(), &["sample", "--A", "1", "--B", "1", "--C", "2", "--samples", "4", "--seed", "3"]);
        let input = t.path().join("samples.txt");
        let again = tempfile::tempdir().unwrap();
        let r = summary(again.path(), &["stats", "--input", input.to_str().unwrap()]);
        assert_eq!(s["count"], r["count"]);
        assert_eq!(s["k_hist"], r["k_hist"]);
    }
}
