//! Run configuration: a JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use threebundle_core::formulas::CurveParams;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Glauber,
    Cftp,
}

/// Every setting of a run. Unset fields take command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub big_a: Option<u32>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub big_b: Option<u32>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub big_c: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(rename = "Psi", skip_serializing_if = "Option::is_none")]
    pub big_psi: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force: Option<bool>,
}

/// Lattice sizes together with the limit parameters they approximate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sizes {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub n: u32,
    pub params: CurveParams,
}

fn floor_count(x: f64, n: u32) -> u32 {
    // absorbs the rounding in products such as 0.29 * 100
    (x * n as f64 + 1e-9).floor() as u32
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overlay(self, flags: RunConfig) -> Self {
        Self {
            a: flags.a.or(self.a),
            b: flags.b.or(self.b),
            c: flags.c.or(self.c),
            n: flags.n.or(self.n),
            big_a: flags.big_a.or(self.big_a),
            big_b: flags.big_b.or(self.big_b),
            big_c: flags.big_c.or(self.big_c),
            psi: flags.psi.or(self.psi),
            big_psi: flags.big_psi.or(self.big_psi),
            seed: flags.seed.or(self.seed),
            mode: flags.mode.or(self.mode),
            samples: flags.samples.or(self.samples),
            events: flags.events.or(self.events),
            burn_in: flags.burn_in.or(self.burn_in),
            defective: flags.defective.or(self.defective),
            threads: flags.threads.or(self.threads),
            input: flags.input.or(self.input),
            out: flags.out.or(self.out),
            force: flags.force.or(self.force),
        }
    }

    fn has_real(&self) -> bool {
        self.a.is_some() || self.b.is_some() || self.c.is_some()
    }

    fn has_counts(&self) -> bool {
        self.big_a.is_some() || self.big_b.is_some() || self.big_c.is_some()
    }

    fn real_params(&self) -> Result<CurveParams, ConfigError> {
        match (self.a, self.b, self.c) {
            (Some(a), Some(b), Some(c)) => CurveParams::new(a, b, c).map_err(|e| bad(e.to_string())),
            _ => Err(bad("--a, --b and --c must be given together")),
        }
    }

    /// `(A, B, C)` and `N`, from exactly one of `(a, b, c) + N` or `(A, B, C)`;
    /// `A = floor(a N)` and likewise for `B` and `C`.
    pub fn sizes(&self) -> Result<Sizes, ConfigError> {
        match (self.has_real(), self.has_counts()) {
            (true, true) => Err(bad("give either (a, b, c) with N or (A, B, C), not both")),
            (false, false) => Err(bad("missing parameters: give (a, b, c) with N, or (A, B, C)")),
            (true, false) => {
                let params = self.real_params()?;
                let n = self.n.ok_or_else(|| bad("--N is required with (a, b, c)"))?;
                if n == 0 {
                    return Err(bad("N must be positive"));
                }
                let (a, b, c) = (floor_count(params.a, n), floor_count(params.b, n), floor_count(params.c, n));
                Ok(Sizes { a, b, c, n, params })
            }
            (false, true) => {
                if self.n.is_some() {
                    return Err(bad("--N is only used with (a, b, c)"));
                }
                let (a, b, c) = match (self.big_a, self.big_b, self.big_c) {
                    (Some(a), Some(b), Some(c)) => (a, b, c),
                    _ => return Err(bad("--A, --B and --C must be given together")),
                };
                let params = CurveParams::from_counts(a, b, c).map_err(|e| bad(e.to_string()))?;
                Ok(Sizes { a, b, c, n: a + b + c, params })
            }
        }
    }

    /// Limit parameters, from `(a, b, c)` or from `(A, B, C) / N`.
    pub fn params(&self) -> Result<CurveParams, ConfigError> {
        if self.has_real() && !self.has_counts() {
            return self.real_params();
        }
        Ok(self.sizes()?.params)
    }

    /// `Psi` when the run is on an augmented domain; `Psi = floor(psi N)`.
    pub fn psi_count(&self, n: u32) -> Result<Option<u32>, ConfigError> {
        match (self.big_psi, self.psi) {
            (Some(_), Some(_)) => Err(bad("give either --psi or --Psi, not both")),
            (Some(p), None) => Ok(Some(p)),
            (None, Some(p)) if p >= 0.0 && p.is_finite() => Ok(Some(floor_count(p, n))),
            (None, Some(_)) => Err(bad("psi must be a nonnegative number")),
            (None, None) => Ok(None),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn force(&self) -> bool {
        self.force.unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(a: u32, b: u32, c: u32) -> RunConfig {
        RunConfig { big_a: Some(a), big_b: Some(b), big_c: Some(c), ..Default::default() }
    }

    #[test]
    fn counts_give_their_own_n() {
        let s = counts(1, 2, 1).sizes().unwrap();
        assert_eq!((s.a, s.b, s.c, s.n), (1, 2, 1, 4));
        assert_eq!(s.params.b, 0.5);
    }

    #[test]
    fn real_parameters_are_floored() {
        let cfg = RunConfig { a: Some(0.3), b: Some(0.3), c: Some(0.4), n: Some(11), ..Default::default() };
        let s = cfg.sizes().unwrap();
        assert_eq!((s.a, s.b, s.c, s.n), (3, 3, 4, 11));
        let cfg = RunConfig { a: Some(0.29), b: Some(0.31), c: Some(0.4), n: Some(100), ..Default::default() };
        assert_eq!(cfg.sizes().unwrap().a, 29);
    }

    #[test]
    fn exactly_one_parameter_form() {
        let mut both = counts(1, 1, 1);
        both.a = Some(0.5);
        assert!(both.sizes().is_err());
        assert!(RunConfig::default().sizes().is_err());
        let partial = RunConfig { big_a: Some(1), ..Default::default() };
        assert!(partial.sizes().is_err());
        let no_n = RunConfig { a: Some(0.5), b: Some(0.25), c: Some(0.25), ..Default::default() };
        assert!(no_n.sizes().is_err());
        assert!(no_n.params().is_ok());
        let off_simplex = RunConfig { a: Some(0.5), b: Some(0.5), c: Some(0.5), n: Some(4), ..Default::default() };
        assert!(off_simplex.sizes().is_err());
    }

    #[test]
    fn flags_override_the_file() {
        let file: RunConfig = serde_json::from_str(r#"{"A": 1, "B": 1, "C": 1, "seed": 5, "mode": "cftp"}"#).unwrap();
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let cfg = file.overlay(flags);
        assert_eq!(cfg.seed(), 9);
        assert_eq!(cfg.mode, Some(Mode::Cftp));
        assert_eq!(cfg.big_a, Some(1));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"A": 1, "bogus": 2}"#).is_err());
    }

    #[test]
    fn psi_forms() {
        let mut cfg = counts(1, 1, 1);
        assert_eq!(cfg.psi_count(3).unwrap(), None);
        cfg.psi = Some(0.5);
        assert_eq!(cfg.psi_count(8).unwrap(), Some(4));
        cfg.big_psi = Some(2);
        assert!(cfg.psi_count(8).is_err());
    }
}
