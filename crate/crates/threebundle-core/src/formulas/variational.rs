//! The concave functional whose maximiser locates the most likely exit column.

use libm::{log, sqrt};

use super::CurveParams;
use crate::error::FormulaError;

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * log(t)
    }
}

/// `f + h` with its first and second derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalPoint {
    pub x: f64,
    pub y: f64,
    pub f: f64,
    pub h: f64,
    pub grad: [f64; 2],
    pub hessian: [[f64; 2]; 2],
    /// Larger eigenvalue of the Hessian.
    pub lambda_max: f64,
}

impl VariationalPoint {
    pub fn value(&self) -> f64 {
        self.f + self.h
    }
}

/// Evaluates `f(x) + h(x, y)` on `{x < 1 + b, x - b < y < min(x, 1)}`.
pub fn variational(x: f64, y: f64, psi: f64, p: &CurveParams) -> Result<VariationalPoint, FormulaError> {
    let (a, b, c) = (p.a, p.b, p.c);
    if psi.is_nan() || psi <= 0.0 {
        return Err(FormulaError::Domain("psi must be positive"));
    }
    if !(x > 0.0 && y > 0.0 && x < 1.0 + b && y > x - b && y < x && y < 1.0) {
        return Err(FormulaError::Domain("point outside the variational domain"));
    }
    let (u, v) = (x - y, b + y - x);
    let h = xlogx(2.0 - y) - xlogx(1.0 - y) + xlogx(1.0 + y) - xlogx(y) + xlogx(c + u) - xlogx(c) - xlogx(u)
        + xlogx(a + v)
        - xlogx(a)
        - xlogx(v);
    let f = xlogx(psi + x) - xlogx(psi) - xlogx(x);
    let dhx = log(c + u) - log(u) - log(a + v) + log(v);
    let dhy = -log(2.0 - y) + log(1.0 - y) + log(1.0 + y) - log(y) - dhx;
    let dfx = log(psi + x) - log(x);
    let s = 1.0 / ((2.0 - y) * (1.0 - y)) + 1.0 / (y * (1.0 + y));
    let t = a / ((a + v) * v) + c / ((c + u) * u);
    let hxx = -t - psi / (x * (psi + x));
    let hyy = -s - t;
    let hxy = t;
    let mid = 0.5 * (hxx + hyy);
    let disc = sqrt(0.25 * (hxx - hyy) * (hxx - hyy) + hxy * hxy);
    Ok(VariationalPoint {
        x,
        y,
        f,
        h,
        grad: [dfx + dhx, dhy],
        hessian: [[hxx, hxy], [hxy, hyy]],
        lambda_max: mid + disc,
    })
}

/// Residuals of the two first-order conditions at `(phi, rho)`.
pub fn stationarity_residuals(phi: f64, rho: f64, psi: f64, p: &CurveParams) -> (f64, f64) {
    let (a, b, c) = (p.a, p.b, p.c);
    let mu = phi - rho;
    let lhs = mu * (a + b - mu) / ((c + mu) * (b - mu));
    let first = lhs - (2.0 * rho - rho * rho) / (1.0 - rho * rho);
    let second = 1.0 + psi / phi - lhs;
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{nu, sigma, solve_z_psi};

    #[test]
    fn analytic_gradient_matches_differences() {
        let p = CurveParams::new(0.25, 0.5, 0.25).unwrap();
        let (x, y, psi, e) = (0.9, 0.6, 0.7, 1e-6);
        let g = variational(x, y, psi, &p).unwrap();
        let val = |x, y| variational(x, y, psi, &p).unwrap().value();
        let gx = (val(x + e, y) - val(x - e, y)) / (2.0 * e);
        let gy = (val(x, y + e) - val(x, y - e)) / (2.0 * e);
        assert!((g.grad[0] - gx).abs() < 1e-7 && (g.grad[1] - gy).abs() < 1e-7);
        let hxy = (variational(x, y + e, psi, &p).unwrap().grad[0] - variational(x, y - e, psi, &p).unwrap().grad[0])
            / (2.0 * e);
        assert!((g.hessian[0][1] - hxy).abs() < 1e-5);
    }

    #[test]
    fn maximiser_is_nu_sigma() {
        let p = CurveParams::new(0.25, 0.5, 0.25).unwrap();
        for psi in [0.25, 0.5, 1.0, 2.0] {
            let z = solve_z_psi(psi, &p).unwrap();
            let (phi, rho) = (nu(z, &p).unwrap(), sigma(z).unwrap());
            let g = variational(phi, rho, psi, &p).unwrap();
            assert!(g.grad[0].abs() < 1e-8 && g.grad[1].abs() < 1e-8, "{:?}", g.grad);
            let (r1, r2) = stationarity_residuals(phi, rho, psi, &p);
            assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
        }
    }

    #[test]
    fn outside_domain_is_an_error() {
        let p = CurveParams::new(0.25, 0.5, 0.25).unwrap();
        assert!(variational(0.5, 0.6, 1.0, &p).is_err());
        assert!(variational(0.5, 0.2, 0.0, &p).is_err());
    }
}
