//! Refined correlation functions and the law of the augmented exit column.

use alloc::vec::Vec;

use libm::{exp, lgamma, log};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::FormulaError;

/// `n choose k`, zero unless `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= BigUint::from((n - k + i) as u64);
        acc /= BigUint::from(i as u64);
    }
    acc
}

/// `log(n choose k)` through log-gamma; `-inf` outside the support.
pub fn log_binomial(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    lgamma(n as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
}

fn check_r(x: i64, y: i64, a: u32, b: u32, c: u32) -> Result<(), FormulaError> {
    if a == 0 {
        return Err(FormulaError::UnsupportedA);
    }
    let top = (a + 2 * b + c + 1) as i64;
    if !(1 <= x && x <= top) {
        return Err(FormulaError::OutOfRange("X must lie in [1, A + 2B + C + 1]"));
    }
    if !(1 <= y && y <= x) {
        return Err(FormulaError::OutOfRange("Y must lie in [1, X]"));
    }
    Ok(())
}

fn r_args(x: i64, y: i64, a: u32, b: u32, c: u32) -> [(i64, i64); 4] {
    let (a, b, c) = (a as i64, b as i64, c as i64);
    let n = a + b + c;
    [
        (2 * n - y + 1, n),
        (n + y - 1, n),
        (c + x - y, c),
        (a + b - x + y - 1, a - 1),
    ]
}

/// `C(2N-Y+1, N) C(N+Y-1, N) C(C+X-Y, C) C(A+B-X+Y-1, A-1)` with `N = A+B+C`.
pub fn r_xy(x: i64, y: i64, a: u32, b: u32, c: u32) -> Result<BigUint, FormulaError> {
    check_r(x, y, a, b, c)?;
    Ok(r_args(x, y, a, b, c).iter().map(|&(n, k)| binomial(n, k)).product())
}

/// `log R(X, Y)`.
pub fn log_r_xy(x: i64, y: i64, a: u32, b: u32, c: u32) -> Result<f64, FormulaError> {
    check_r(x, y, a, b, c)?;
    Ok(r_args(x, y, a, b, c).iter().map(|&(n, k)| log_binomial(n, k)).sum())
}

/// Exact probability law on `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDist {
    lo: i64,
    probs: Vec<BigRational>,
    normalizer: BigUint,
}

impl ExactDist {
    /// Normalises nonnegative integer weights; `None` when they are all zero.
    pub fn from_weights(lo: i64, weights: &[BigUint]) -> Option<Self> {
        let z: BigUint = weights.iter().sum();
        if z.is_zero() {
            return None;
        }
        let zi = BigInt::from(z.clone());
        let probs = weights
            .iter()
            .map(|w| BigRational::new(BigInt::from(w.clone()), zi.clone()))
            .collect();
        Some(Self { lo, probs, normalizer: z })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.probs.len() as i64 - 1
    }
    pub fn normalizer(&self) -> &BigUint {
        &self.normalizer
    }
    pub fn probs(&self) -> Vec<BigRational> {
        self.probs.clone()
    }

    pub fn prob(&self, k: i64) -> BigRational {
        if k < self.lo || k > self.hi() {
            return BigRational::zero();
        }
        self.probs[(k - self.lo) as usize].clone()
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Smallest most likely value.
    pub fn argmax(&self) -> i64 {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        self.lo + best as i64
    }

    pub fn mean(&self) -> BigRational {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| p * BigRational::from_integer(BigInt::from(self.lo + i as i64)))
            .sum()
    }
}

/// Unnormalised law in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct LogDist {
    pub lo: i64,
    pub log_weights: Vec<f64>,
}

impl LogDist {
    pub fn log_normalizer(&self) -> f64 {
        log_sum_exp(&self.log_weights)
    }

    pub fn probs(&self) -> Vec<f64> {
        let z = self.log_normalizer();
        self.log_weights.iter().map(|&w| exp(w - z)).collect()
    }

    pub fn argmax(&self) -> i64 {
        let mut best = 0;
        for (i, &w) in self.log_weights.iter().enumerate() {
            if w > self.log_weights[best] {
                best = i;
            }
        }
        self.lo + best as i64
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + log(v.iter().map(|&x| exp(x - m)).sum::<f64>())
}

fn check_refined(a: u32, c_plus_1: u32) -> Result<(), FormulaError> {
    if a == 0 {
        return Err(FormulaError::UnsupportedA);
    }
    if c_plus_1 < 2 {
        return Err(FormulaError::OutOfRange("C + 1 must be at least 2"));
    }
    Ok(())
}

/// Probability that the first path of a uniform `A`-restricted domain-wall
/// ensemble on `T_{A,B,C+1}` leaves the bottom row at column `k`.
pub fn refined_h(a: u32, b: u32, c_plus_1: u32, k: i64) -> Result<BigRational, FormulaError> {
    check_refined(a, c_plus_1)?;
    let c = c_plus_1 - 1;
    let n = (a + b + c) as i64;
    let top = (a + 2 * b + c + 1) as i64;
    if !(1 <= k && k <= top) {
        return Err(FormulaError::OutOfRange("k must lie in [1, A + 2B + C + 1]"));
    }
    let mut s = BigUint::zero();
    for y in 1..=k {
        s += r_xy(k, y, a, b, c)?;
    }
    let den = binomial(3 * n + 1, n) * binomial(n, b as i64);
    Ok(BigRational::new(BigInt::from(s), BigInt::from(den)))
}

/// [`refined_h`] over its whole support.
pub fn refined_h_dist(a: u32, b: u32, c_plus_1: u32) -> Result<ExactDist, FormulaError> {
    check_refined(a, c_plus_1)?;
    let c = c_plus_1 - 1;
    let top = (a + 2 * b + c + 1) as i64;
    let mut weights = Vec::new();
    for k in 1..=top {
        let mut s = BigUint::zero();
        for y in 1..=k {
            s += r_xy(k, y, a, b, c)?;
        }
        weights.push(s);
    }
    Ok(ExactDist::from_weights(1, &weights).expect("R is positive somewhere"))
}

fn phi_weight(a: u32, b: u32, c: u32, psi: u32, x: i64) -> Result<BigUint, FormulaError> {
    let mut s = BigUint::zero();
    for y in 1..=x {
        s += r_xy(x, y, a, b, c)?;
    }
    Ok(binomial(psi as i64 + x - 1, psi as i64) * s)
}

/// Exact law of the column where the first path enters the upper part of
/// the augmented domain `X_Psi` over `T_{A,B,C+1}`.
pub fn phi_pmf(a: u32, b: u32, c: u32, psi: u32) -> Result<ExactDist, FormulaError> {
    if a == 0 {
        return Err(FormulaError::UnsupportedA);
    }
    let top = (a + 2 * b + c + 1) as i64;
    let w = (1..=top).map(|x| phi_weight(a, b, c, psi, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(ExactDist::from_weights(1, &w).expect("R is positive somewhere"))
}

/// [`phi_pmf`] in floating point through log-gamma, for large sizes.
pub fn phi_pmf_log(a: u32, b: u32, c: u32, psi: u32) -> Result<LogDist, FormulaError> {
    if a == 0 {
        return Err(FormulaError::UnsupportedA);
    }
    let top = (a + 2 * b + c + 1) as i64;
    let mut log_weights = Vec::with_capacity(top as usize);
    let mut terms = Vec::new();
    for x in 1..=top {
        terms.clear();
        for y in 1..=x {
            terms.push(log_r_xy(x, y, a, b, c)?);
        }
        log_weights.push(log_binomial(psi as i64 + x - 1, psi as i64) + log_sum_exp(&terms));
    }
    Ok(LogDist { lo: 1, log_weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn r_values_for_unit_sides() {
        assert_eq!(r_xy(1, 1, 1, 1, 1).unwrap(), BigUint::from(20u32));
        assert_eq!(r_xy(2, 1, 1, 1, 1).unwrap(), BigUint::from(40u32));
        assert_eq!(r_xy(2, 2, 1, 1, 1).unwrap(), BigUint::from(40u32));
        assert!(r_xy(6, 1, 1, 1, 1).is_err());
        assert!(r_xy(2, 3, 1, 1, 1).is_err());
        assert_eq!(r_xy(1, 1, 0, 1, 1).unwrap_err(), FormulaError::UnsupportedA);
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(0, 0), BigUint::one());
        assert!(binomial(-1, 0).is_zero());
        assert!(binomial(3, 4).is_zero());
        assert!(binomial(3, -1).is_zero());
    }

    #[test]
    fn refined_h_sums_to_one() {
        for (a, b, c1) in [(1, 1, 2), (2, 1, 2), (1, 2, 3), (3, 2, 2)] {
            let d = refined_h_dist(a, b, c1).unwrap();
            assert_eq!(d.total(), BigRational::one());
            assert_eq!(d.prob(2), refined_h(a, b, c1, 2).unwrap());
        }
    }

    #[test]
    fn phi_at_zero_psi_is_refined_h() {
        for (a, b, c) in [(1, 1, 1), (2, 1, 3), (1, 3, 2)] {
            assert_eq!(phi_pmf(a, b, c, 0).unwrap(), refined_h_dist(a, b, c + 1).unwrap());
        }
        assert_eq!(phi_pmf(1, 1, 1, 3).unwrap().total(), BigRational::one());
    }

    #[test]
    fn exact_dist_basics() {
        let d = ExactDist::from_weights(3, &[1u32, 2, 1].map(BigUint::from)).unwrap();
        assert_eq!(d.probs(), vec![rat(1, 4), rat(1, 2), rat(1, 4)]);
        assert_eq!((d.lo(), d.hi(), d.argmax()), (3, 5, 4));
        assert_eq!(d.mean(), rat(4, 1));
        assert_eq!(d.prob(9), rat(0, 1));
        assert!(ExactDist::from_weights(0, &[BigUint::zero()]).is_none());
    }

    #[test]
    fn log_space_matches_exact_at_64() {
        let (a, b, c, psi) = (16, 32, 16, 16);
        let exact = phi_pmf(a, b, c, psi).unwrap();
        let approx = phi_pmf_log(a, b, c, psi).unwrap();
        for x in 1..=(a + 2 * b + c + 1) as i64 {
            let w = phi_weight(a, b, c, psi, x).unwrap();
            let lw = approx.log_weights[(x - 1) as usize];
            let ratio = exp(lw - log_big(&w));
            assert!((ratio - 1.0).abs() < 1e-9, "x={x}: {ratio}");
        }
        assert_eq!(exact.argmax(), approx.argmax());
    }

    fn log_big(v: &BigUint) -> f64 {
        let bits = v.bits();
        let shift = bits.saturating_sub(60);
        let top = (v >> shift).to_f64().unwrap();
        log(top) + shift as f64 * core::f64::consts::LN_2
    }
}
