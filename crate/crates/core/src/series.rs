//! Formal power series in the deformation parameter, truncated at a fixed
//! order `N`: `f = f_0 + f_1*h + ... + f_N*h^N` with polynomial coefficients.
//!
//! The truncation order is part of the value; mixing orders (or universes)
//! is an error. `h` denotes the formal parameter in comments; it is not a
//! polynomial variable, so coefficient extraction is exact by construction.

use crate::poly::{MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::vars::VarUniverse;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("series is not divisible by h^{0}: order-{1} coefficient is nonzero")]
    NotDivisible(usize, usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A truncated series: `coeffs[k]` is the coefficient of `h^k`, `0 <= k <= N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HbarSeries {
    universe: VarUniverse,
    coeffs: Vec<MultiPoly>,
}

impl HbarSeries {
    pub fn zero(universe: VarUniverse, order: usize) -> Self {
        HbarSeries { universe, coeffs: vec![MultiPoly::zero(universe); order + 1] }
    }

    pub fn one(universe: VarUniverse, order: usize) -> Self {
        Self::from_poly(MultiPoly::one(universe), order)
    }

    /// Embeds a polynomial as the order-zero coefficient.
    pub fn from_poly(p: MultiPoly, order: usize) -> Self {
        let universe = *p.universe();
        let mut s = Self::zero(universe, order);
        s.coeffs[0] = p;
        s
    }

    /// Builds from explicit coefficients (length fixes the order).
    pub fn from_coeffs(coeffs: Vec<MultiPoly>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the order-0 coefficient");
        let universe = *coeffs[0].universe();
        for c in &coeffs {
            assert_eq!(c.universe(), &universe, "series coefficients in one universe");
        }
        HbarSeries { universe, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    pub fn coeff(&self, k: usize) -> &MultiPoly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(MultiPoly::is_zero)
    }

    fn check_compatible(&self, other: &HbarSeries) -> Result<(), SeriesError> {
        if self.order() != other.order() {
            return Err(SeriesError::OrderMismatch(self.order(), other.order()));
        }
        if self.universe != other.universe {
            return Err(PolyError::UniverseMismatch(self.universe, other.universe).into());
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &HbarSeries) -> Result<HbarSeries, SeriesError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(HbarSeries { universe: self.universe, coeffs })
    }

    pub fn checked_mul(&self, other: &HbarSeries) -> Result<HbarSeries, SeriesError> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.universe, self.order());
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > self.order() {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&a.mul(b));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &HbarSeries) -> HbarSeries {
        self.checked_add(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, other: &HbarSeries) -> HbarSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HbarSeries) -> HbarSeries {
        self.checked_mul(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn neg(&self) -> HbarSeries {
        let coeffs = self.coeffs.iter().map(MultiPoly::neg).collect();
        HbarSeries { universe: self.universe, coeffs }
    }

    pub fn scale(&self, c: &GaussianRational) -> HbarSeries {
        let coeffs = self.coeffs.iter().map(|p| p.scale(c)).collect();
        HbarSeries { universe: self.universe, coeffs }
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> HbarSeries {
        let coeffs = self.coeffs.iter().map(|c| c.mul(p)).collect();
        HbarSeries { universe: self.universe, coeffs }
    }

    /// Multiplies by `h^k` (shifting up, dropping overflow past `N`).
    pub fn shift_up(&self, k: usize) -> HbarSeries {
        let mut out = Self::zero(self.universe, self.order());
        for (i, c) in self.coeffs.iter().enumerate() {
            if i + k <= self.order() {
                out.coeffs[i + k] = c.clone();
            }
        }
        out
    }

    /// Divides by `h^k`; errors if any coefficient below `h^k` is nonzero.
    /// The quotient keeps the same truncation order, with its top `k`
    /// coefficients implicitly unknown and set to zero — callers that need
    /// exact top orders should work at an order raised by `k` beforehand.
    pub fn shift_down(&self, k: usize) -> Result<HbarSeries, SeriesError> {
        for j in 0..k.min(self.coeffs.len()) {
            if !self.coeffs[j].is_zero() {
                return Err(SeriesError::NotDivisible(k, j));
            }
        }
        let mut out = Self::zero(self.universe, self.order());
        for i in k..self.coeffs.len() {
            out.coeffs[i - k] = self.coeffs[i].clone();
        }
        Ok(out)
    }

    /// Lowers the truncation order (no-op if already at or below).
    pub fn truncated(&self, order: usize) -> HbarSeries {
        let top = order.min(self.order());
        HbarSeries { universe: self.universe, coeffs: self.coeffs[..=top].to_vec() }
    }

    /// Raises the truncation order, padding with zeros. The padded
    /// coefficients are only trustworthy when the series is known to be
    /// polynomial (exactly representable) at this point.
    pub fn padded(&self, order: usize) -> HbarSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, MultiPoly::zero(self.universe));
        HbarSeries { universe: self.universe, coeffs }
    }

    pub fn map<F: Fn(&MultiPoly) -> MultiPoly>(&self, f: F) -> HbarSeries {
        let coeffs: Vec<MultiPoly> = self.coeffs.iter().map(f).collect();
        HbarSeries::from_coeffs(coeffs)
    }

    pub fn try_map<F>(&self, f: F) -> Result<HbarSeries, SeriesError>
    where
        F: Fn(&MultiPoly) -> Result<MultiPoly, PolyError>,
    {
        let coeffs: Result<Vec<MultiPoly>, PolyError> = self.coeffs.iter().map(f).collect();
        Ok(HbarSeries::from_coeffs(coeffs?))
    }

    pub fn truncate_group_degree(&self, m: u32) -> HbarSeries {
        self.map(|p| p.truncate_group_degree(m))
    }

    /// Nonzero coefficients as order -> rendered polynomial, the canonical
    /// report form.
    pub fn rendered(&self) -> BTreeMap<usize, String> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(k, p)| (k, p.to_string()))
            .collect()
    }
}

impl fmt::Display for HbarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(k, p)| {
                if k == 0 {
                    format!("{p}")
                } else if k == 1 {
                    format!("({p})*h")
                } else {
                    format!("({p})*h^{k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::Var;

    fn u() -> VarUniverse {
        VarUniverse::new(1, 0)
    }

    fn x() -> MultiPoly {
        MultiPoly::var(u(), Var::x(1)).unwrap()
    }

    #[test]
    fn truncated_product() {
        // (1 + h x)(1 - h x) = 1 - h^2 x^2; at N=1 the h^2 term is cut.
        let a = HbarSeries::from_coeffs(vec![MultiPoly::one(u()), x()]);
        let b = HbarSeries::from_coeffs(vec![MultiPoly::one(u()), x().neg()]);
        let prod = a.mul(&b);
        assert_eq!(prod, HbarSeries::one(u(), 1));

        let a2 = a.padded(2);
        let b2 = b.padded(2);
        let prod2 = a2.mul(&b2);
        assert_eq!(prod2.coeff(2), &x().pow(2).neg());
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = HbarSeries::one(u(), 1);
        let b = HbarSeries::one(u(), 2);
        assert!(matches!(a.checked_add(&b), Err(SeriesError::OrderMismatch(1, 2))));
    }

    #[test]
    fn shifts() {
        let s = HbarSeries::from_poly(x(), 2).shift_up(1);
        assert!(s.coeff(0).is_zero());
        assert_eq!(s.coeff(1), &x());
        let back = s.shift_down(1).unwrap();
        assert_eq!(back.coeff(0), &x());
        assert!(back.shift_down(1).is_err());
    }

    #[test]
    fn scalar_multiplication() {
        let s = HbarSeries::one(u(), 1).scale(&GaussianRational::i());
        assert_eq!(s.coeff(0), &MultiPoly::constant(u(), GaussianRational::i()));
    }

    #[test]
    fn rendering_skips_zero_orders() {
        let mut coeffs = vec![MultiPoly::zero(u()); 3];
        coeffs[1] = x();
        let s = HbarSeries::from_coeffs(coeffs);
        let r = s.rendered();
        assert_eq!(r.len(), 1);
        assert_eq!(r.get(&1).unwrap(), "x1");
    }
}
