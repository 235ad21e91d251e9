//! Closed-form limit-shape quantities.
//!
//! Curves are parameterised by the slope `z` of their tangent line. The
//! south-east piece is the Legendre transform of `zeta`; the other pieces are
//! images of it under the symmetries of the domain with cyclically shifted
//! parameters.

mod refined;
mod variational;

pub use refined::{
    binomial, log_binomial, log_r_xy, phi_pmf, phi_pmf_log, r_xy, refined_h, refined_h_dist, ExactDist,
    LogDist,
};
pub use variational::{stationarity_residuals, variational, VariationalPoint};

use alloc::vec::Vec;
use core::fmt;

use libm::{fma, sqrt};

use crate::error::FormulaError;

const SIMPLEX_TOL: f64 = 1e-12;

/// Normalised side lengths `a + b + c = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CurveParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, FormulaError> {
        let s = a + b + c;
        if !(a >= 0.0 && b >= 0.0 && c >= 0.0) || (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(FormulaError::Simplex(s));
        }
        if a + c <= 0.0 {
            return Err(FormulaError::Domain("a + c must be positive"));
        }
        Ok(Self { a, b, c })
    }

    /// `(A, B, C) / N`.
    pub fn from_counts(a: u32, b: u32, c: u32) -> Result<Self, FormulaError> {
        let n = (a + b + c) as f64;
        if n == 0.0 {
            return Err(FormulaError::Simplex(0.0));
        }
        Self::new(a as f64 / n, b as f64 / n, c as f64 / n)
    }

    /// `(b, c, a)`.
    pub fn shifted(&self) -> Self {
        Self { a: self.b, b: self.c, c: self.a }
    }

    /// Whether `(x, y)` lies in the limit domain, up to `tol`.
    pub fn in_domain(&self, x: f64, y: f64, tol: f64) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        let lower = x >= -tol && x <= 1.0 + b + tol && y >= -tol && y <= a + c + tol;
        let tower = x >= a + b - tol && x <= 1.0 + b + tol && y >= a + c - tol && y <= 1.0 + a + tol;
        lower || tower
    }
}

fn check_z(z: f64) -> Result<(), FormulaError> {
    if z.is_nan() || z < 0.0 {
        return Err(FormulaError::Domain("z must be nonnegative"));
    }
    Ok(())
}

fn q_root(z: f64, p: &CurveParams) -> f64 {
    let (a, b, c) = (p.a, p.b, p.c);
    let s = z * (b + c) + a + c;
    sqrt(s * s - 4.0 * a * b * z)
}

/// `(sqrt(z^2 + z + 1) - 1) / z`, extended by `1/2` at zero.
pub fn sigma(z: f64) -> Result<f64, FormulaError> {
    check_z(z)?;
    if z.is_infinite() {
        return Ok(1.0);
    }
    Ok((z + 1.0) / (sqrt(z * z + z + 1.0) + 1.0))
}

/// `zeta(z) / z`, extended by continuity at zero.
pub fn nu(z: f64, p: &CurveParams) -> Result<f64, FormulaError> {
    check_z(z)?;
    let (a, b, c) = (p.a, p.b, p.c);
    if z.is_infinite() {
        return Ok(1.0 + b);
    }
    let num = z * (b + c) * (b + c) + 2.0 * (b + c) * (a + c) - 4.0 * a * b;
    let first = (num / (q_root(z, p) + a + c) + b - c) / 2.0;
    Ok(first + sigma(z)?)
}

/// `sqrt(z^2+z+1) + sqrt((zb+zc+a+c)^2 - 4abz)/2 + ((b-c)z - a - c)/2 - 1`.
pub fn zeta(z: f64, p: &CurveParams) -> Result<f64, FormulaError> {
    check_z(z)?;
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(z * nu(z, p)?)
}

pub fn zeta_prime(z: f64, p: &CurveParams) -> Result<f64, FormulaError> {
    check_z(z)?;
    let (a, b, c) = (p.a, p.b, p.c);
    if z.is_infinite() {
        return Ok(1.0 + b);
    }
    let r = sqrt(z * z + z + 1.0);
    let lin = (b + c) * (b + c) * z - a * b + a * c + b * c + c * c;
    Ok((2.0 * z + 1.0) / (2.0 * r) + lin / (2.0 * q_root(z, p)) + (b - c) / 2.0)
}

/// Point of the south-east curve with tangent slope `z`; `z = inf` gives the
/// limit point on the line `x = 1 + b`.
pub fn curve_se(z: f64, p: &CurveParams) -> Result<(f64, f64), FormulaError> {
    check_z(z)?;
    if z.is_infinite() {
        let (a, b, c) = (p.a, p.b, p.c);
        let y = if b + c > 0.0 { 0.5 + a * b / (b + c) } else { 0.5 };
        return Ok((1.0 + b, y));
    }
    let x = zeta_prime(z, p)?;
    Ok((x, fma(z, x, -zeta(z, p)?)))
}

/// Tangent line `y = z x - zeta(z)` as `(slope, intercept)`.
pub fn tangent_line(z: f64, p: &CurveParams) -> Result<(f64, f64), FormulaError> {
    Ok((z, -zeta(z, p)?))
}

/// Smallest `z >= 0` with `zeta(z) = psi`, by bisection.
pub fn solve_z_psi(psi: f64, p: &CurveParams) -> Result<f64, FormulaError> {
    if psi.is_nan() || psi < 0.0 {
        return Err(FormulaError::Domain("psi must be nonnegative"));
    }
    if psi == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while zeta(hi, p)? < psi {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = zeta(mid, p)?;
        if (v - psi).abs() < 1e-10 {
            return Ok(mid);
        }
        if v < psi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The pieces of the arctic boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Piece {
    SE,
    SW,
    NE,
    NwW,
    NwN,
}

impl Piece {
    pub const ALL: [Piece; 5] = [Piece::SE, Piece::SW, Piece::NE, Piece::NwW, Piece::NwN];

    pub fn name(self) -> &'static str {
        match self {
            Piece::SE => "SE",
            Piece::SW => "SW",
            Piece::NE => "NE",
            Piece::NwW => "NW_W",
            Piece::NwN => "NW_N",
        }
    }

    pub fn parse(s: &str) -> Result<Self, FormulaError> {
        Piece::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(FormulaError::Domain("unknown curve piece"))
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The north-west piece that is present: `NW_W` when `a > b`, `NW_N` when
/// `a < b`, none when they are equal.
pub fn nw_piece(p: &CurveParams) -> Option<Piece> {
    if p.a > p.b {
        Some(Piece::NwW)
    } else if p.a < p.b {
        Some(Piece::NwN)
    } else {
        None
    }
}

/// Point of a piece at parameter `z`, before clipping to the domain.
pub fn curve_piece(piece: Piece, z: f64, p: &CurveParams) -> Result<(f64, f64), FormulaError> {
    let (a, b, c) = (p.a, p.b, p.c);
    let bca = p.shifted();
    let cab = bca.shifted();
    Ok(match piece {
        Piece::SE => curve_se(z, p)?,
        Piece::SW => {
            let (x, y) = curve_se(z, &bca)?;
            (y, 1.0 + c - x)
        }
        Piece::NwW => {
            let (x, y) = curve_se(z, &cab)?;
            (1.0 + a - x, 1.0 + c - y)
        }
        Piece::NwN => {
            let (x, y) = curve_se(z, &bca)?;
            (1.0 + b - x, 1.0 + a - y)
        }
        Piece::NE => {
            let (x, y) = curve_se(z, &cab)?;
            (1.0 + b - y, x)
        }
    })
}

/// Geometric grid of `n` points on `[lo, hi]`, preceded by `0` and followed
/// by `inf`.
pub fn z_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 2);
    out.push(0.0);
    let (l0, l1) = (libm::log(lo), libm::log(hi));
    for i in 0..n {
        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        out.push(libm::exp(l0 + t * (l1 - l0)));
    }
    out.push(f64::INFINITY);
    out
}

/// A sampled piece, clipped to the limit domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcticCurve {
    pub piece: Piece,
    /// `(z, x, y)`.
    pub points: Vec<(f64, f64, f64)>,
}

pub fn sample_piece(piece: Piece, p: &CurveParams, grid: &[f64]) -> Result<ArcticCurve, FormulaError> {
    let mut points = Vec::new();
    for &z in grid {
        let (x, y) = curve_piece(piece, z, p)?;
        if x.is_finite() && y.is_finite() && p.in_domain(x, y, 1e-12) {
            points.push((z, x, y));
        }
    }
    Ok(ArcticCurve { piece, points })
}

/// All pieces of the arctic boundary on the standard grid.
pub fn arctic_boundary(p: &CurveParams, n: usize) -> Result<Vec<ArcticCurve>, FormulaError> {
    let grid = z_grid(n, 1e-4, 1e4);
    let mut out = Vec::new();
    for piece in [Piece::SE, Piece::SW, Piece::NE] {
        out.push(sample_piece(piece, p, &grid)?);
    }
    if let Some(nw) = nw_piece(p) {
        out.push(sample_piece(nw, p, &grid)?);
    }
    Ok(out)
}
