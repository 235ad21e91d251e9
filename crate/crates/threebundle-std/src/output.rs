//! Output directory handling and CSV, JSON and SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use threebundle_core::formulas::{ArcticCurve, CurveParams};
use threebundle_core::Path as LatticePath;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{0} exists; pass --force to overwrite")]
    Exists(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// A directory that refuses to overwrite files unless forced.
#[derive(Clone, Debug)]
pub struct OutputDir {
    root: PathBuf,
    force: bool,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>, force: bool) -> Result<Self, OutputError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|source| OutputError::Io { path: root.clone(), source })?;
        Ok(Self { root, force })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Fails early when any of `names` would be overwritten.
    pub fn claim(&self, names: &[&str]) -> Result<(), OutputError> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.root.join(n);
            if p.exists() {
                return Err(OutputError::Exists(p));
            }
        }
        Ok(())
    }

    fn target(&self, name: &str) -> Result<PathBuf, OutputError> {
        self.claim(&[name])?;
        Ok(self.root.join(name))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, OutputError> {
        let path = self.target(name)?;
        fs::write(&path, text).map_err(|source| OutputError::Io { path: path.clone(), source })?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, OutputError> {
        let mut s = serde_json::to_string_pretty(value)
            .map_err(|source| OutputError::Json { path: self.root.join(name), source })?;
        s.push('\n');
        self.write_text(name, &s)
    }

    pub fn write_csv<T: Serialize>(
        &self,
        name: &str,
        rows: impl IntoIterator<Item = T>,
    ) -> Result<PathBuf, OutputError> {
        let path = self.target(name)?;
        let err = |source| OutputError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        for r in rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|source| OutputError::Io { path: path.clone(), source })?;
        Ok(path)
    }
}

/// Outline of the limit domain, counter-clockwise from the origin.
pub fn domain_outline(p: &CurveParams) -> Vec<[f64; 2]> {
    let (a, b, c) = (p.a, p.b, p.c);
    vec![[0.0, 0.0], [1.0 + b, 0.0], [1.0 + b, 1.0 + a], [a + b, 1.0 + a], [0.0, a + c]]
}

const PIECE_COLOURS: [&str; 5] = ["#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e"];

/// Static SVG figure in limit-shape coordinates with `y` pointing up.
pub struct Figure {
    width: f64,
    height: f64,
    scale: f64,
    body: String,
}

impl Figure {
    /// A canvas covering `[0, w] x [0, h]` at `px` pixels per unit.
    pub fn new(w: f64, h: f64, px: f64) -> Self {
        let margin = 10.0;
        Self { width: w * px + 2.0 * margin, height: h * px + 2.0 * margin, scale: px, body: String::new() }
    }

    fn xy(&self, p: [f64; 2]) -> (f64, f64) {
        (10.0 + p[0] * self.scale, self.height - 10.0 - p[1] * self.scale)
    }

    fn points(&self, pts: &[[f64; 2]]) -> String {
        let mut s = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.xy(p);
            if i > 0 {
                s.push(' ');
            }
            write!(s, "{x:.3},{y:.3}").unwrap();
        }
        s
    }

    pub fn polygon(&mut self, pts: &[[f64; 2]], fill: &str, stroke: &str) {
        let s = self.points(pts);
        writeln!(self.body, r#"<polygon points="{s}" fill="{fill}" stroke="{stroke}" stroke-width="1"/>"#).unwrap();
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], stroke: &str, width: f64, label: Option<&str>) {
        if pts.is_empty() {
            return;
        }
        let s = self.points(pts);
        let id = label.map(|l| format!(r#" id="{l}""#)).unwrap_or_default();
        writeln!(
            self.body,
            r#"<polyline{id} points="{s}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        )
        .unwrap();
    }

    pub fn dot(&mut self, p: [f64; 2], r: f64, fill: &str, opacity: f64) {
        let (x, y) = self.xy(p);
        writeln!(self.body, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}" fill-opacity="{opacity:.3}"/>"#)
            .unwrap();
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// The limit domain with every arctic piece drawn over it.
pub fn curves_svg(p: &CurveParams, curves: &[ArcticCurve]) -> String {
    let mut fig = Figure::new(1.0 + p.b, 1.0 + p.a, 400.0);
    fig.polygon(&domain_outline(p), "#f4f4f4", "black");
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<[f64; 2]> = c.points.iter().map(|&(_, x, y)| [x, y]).collect();
        fig.polyline(&pts, PIECE_COLOURS[i % PIECE_COLOURS.len()], 2.0, Some(c.piece.name()));
    }
    fig.finish()
}

/// Rescaled paths of one ensemble over the limit domain and its curves.
pub fn ensemble_svg(p: &CurveParams, curves: &[ArcticCurve], paths: &[LatticePath], n: u32) -> String {
    let mut fig = Figure::new(1.0 + p.b, 1.0 + p.a, 400.0);
    fig.polygon(&domain_outline(p), "#f4f4f4", "black");
    let s = 1.0 / n as f64;
    for path in paths {
        let pts: Vec<[f64; 2]> = path.iter().map(|q| [q.x as f64 * s, q.y as f64 * s]).collect();
        fig.polyline(&pts, "#555555", 0.6, None);
    }
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<[f64; 2]> = c.points.iter().map(|&(_, x, y)| [x, y]).collect();
        fig.polyline(&pts, PIECE_COLOURS[i % PIECE_COLOURS.len()], 2.0, Some(c.piece.name()));
    }
    fig.finish()
}

/// Frozen fraction per vertex as grey dots, with the arctic curves.
pub fn frozen_svg(p: &CurveParams, curves: &[ArcticCurve], frac: &[([f64; 2], f64)]) -> String {
    let mut fig = Figure::new(1.0 + p.b, 1.0 + p.a, 400.0);
    fig.polygon(&domain_outline(p), "white", "black");
    for &(q, f) in frac {
        fig.dot(q, 1.5, "black", f);
    }
    for (i, c) in curves.iter().enumerate() {
        let pts: Vec<[f64; 2]> = c.points.iter().map(|&(_, x, y)| [x, y]).collect();
        fig.polyline(&pts, PIECE_COLOURS[i % PIECE_COLOURS.len()], 2.0, Some(c.piece.name()));
    }
    fig.finish()
}
