//! Sparse multivariate polynomials over the Gaussian rationals.
//!
//! Representation invariants:
//! - monomials are sorted variable lists with strictly positive exponents;
//! - the term map never stores a zero coefficient;
//! - both operands of any arithmetic operation share one [`VarUniverse`].
//!
//! Terms are ordered by graded lexicographic order over the fixed family
//! order `x < xi < th < v < t`, which makes iteration (and hence rendering)
//! canonical and byte-stable.

use crate::scalar::GaussianRational;
use crate::vars::{Family, Var, VarUniverse};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands live in different variable universes: {0} vs {1}")]
    UniverseMismatch(VarUniverse, VarUniverse),
    #[error("variable {0} is not part of universe {1}")]
    UnknownVariable(Var, VarUniverse),
    #[error("substitution does not bind {0}, which occurs in the polynomial")]
    UnboundVariable(Var),
}

/// A monomial: variables with positive exponents, sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds from possibly unsorted, possibly repeated factors.
    pub fn from_factors(factors: &[(Var, u32)]) -> Self {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for &(v, e) in factors {
            if e > 0 {
                *map.entry(v).or_insert(0) += e;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_of(&self, var: Var) -> u32 {
        self.0.iter().find(|&&(v, _)| v == var).map_or(0, |&(_, e)| e)
    }

    pub fn degree_in_family(&self, family: Family) -> u32 {
        self.0.iter().filter(|&&(v, _)| v.family == family).map(|&(_, e)| e).sum()
    }

    /// Total degree in group coordinates (all `v` blocks plus `t`).
    pub fn group_degree(&self) -> u32 {
        self.0.iter().filter(|&&(v, _)| v.is_group_coordinate()).map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ea)), Some(&&(vb, eb))) => {
                    if va < vb {
                        out.push((va, ea));
                        a.next();
                    } else if vb < va {
                        out.push((vb, eb));
                        b.next();
                    } else {
                        out.push((va, ea + eb));
                        a.next();
                        b.next();
                    }
                }
                (Some(&&t), None) => {
                    out.push(t);
                    a.next();
                }
                (None, Some(&&t)) => {
                    out.push(t);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    /// Removes `var` entirely, returning its exponent.
    fn split_off_var(&self, var: Var) -> (u32, Monomial) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut exp = 0;
        for &(v, e) in &self.0 {
            if v == var {
                exp = e;
            } else {
                rest.push((v, e));
            }
        }
        (exp, Monomial(rest))
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: compare total degree, then exponent vectors
    /// read in the fixed variable order (an earlier variable with a higher
    /// exponent wins).
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut a, mut b) = (self.0.iter(), other.0.iter());
        loop {
            match (a.next(), b.next()) {
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va < vb {
                        return Ordering::Greater;
                    }
                    if vb < va {
                        return Ordering::Less;
                    }
                    match ea.cmp(&eb) {
                        Ordering::Equal => {}
                        ord => return ord,
                    }
                }
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(v, e)| if e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// A polynomial: canonicalized term map over a fixed universe.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    universe: VarUniverse,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(universe: VarUniverse) -> Self {
        MultiPoly { universe, terms: BTreeMap::new() }
    }

    pub fn one(universe: VarUniverse) -> Self {
        Self::constant(universe, GaussianRational::one())
    }

    pub fn constant(universe: VarUniverse, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::unit(), c);
        }
        MultiPoly { universe, terms }
    }

    pub fn var(universe: VarUniverse, v: Var) -> Result<Self, PolyError> {
        if !universe.contains(v) {
            return Err(PolyError::UnknownVariable(v, universe));
        }
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), GaussianRational::one());
        Ok(MultiPoly { universe, terms })
    }

    pub fn from_terms<I>(universe: VarUniverse, iter: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, GaussianRational)>,
    {
        let mut out = Self::zero(universe);
        for (m, c) in iter {
            out.add_term(m, c);
        }
        out
    }

    pub fn universe(&self) -> &VarUniverse {
        &self.universe
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.get(&Monomial::unit()).map_or(false, GaussianRational::is_one)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Monomial::unit()))
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> GaussianRational {
        self.terms.get(&Monomial::unit()).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn degree_in_family(&self, family: Family) -> u32 {
        self.terms.keys().map(|m| m.degree_in_family(family)).max().unwrap_or(0)
    }

    pub fn degree_of(&self, var: Var) -> u32 {
        self.terms.keys().map(|m| m.degree_of(var)).max().unwrap_or(0)
    }

    /// True if every monomial draws only from `families`.
    pub fn uses_only(&self, families: &[Family]) -> bool {
        self.terms
            .keys()
            .all(|m| m.factors().iter().all(|&(v, _)| families.contains(&v.family)))
    }

    fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn check_universe(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.universe == other.universe {
            Ok(())
        } else {
            Err(PolyError::UniverseMismatch(self.universe, other.universe))
        }
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.check_universe(other)?;
        let mut out = Self::zero(self.universe);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.checked_add(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.checked_sub(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.checked_mul(other).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn neg(&self) -> MultiPoly {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect();
        MultiPoly { universe: self.universe, terms }
    }

    pub fn scale(&self, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.universe);
        }
        let terms = self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect();
        MultiPoly { universe: self.universe, terms }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = Self::one(self.universe);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative of the given order.
    pub fn diff(&self, var: Var, order: u32) -> MultiPoly {
        let mut cur = self.clone();
        for _ in 0..order {
            let mut next = Self::zero(self.universe);
            for (m, c) in &cur.terms {
                let (e, rest) = m.split_off_var(var);
                if e == 0 {
                    continue;
                }
                let factor = GaussianRational::from_int(e as i64);
                let mono = if e == 1 { rest } else { rest.mul(&Monomial::from_factors(&[(var, e - 1)])) };
                next.add_term(mono, c * &factor);
            }
            cur = next;
        }
        cur
    }

    /// Substitutes the bound variables; unbound variables pass through.
    /// All bindings must share the target universe, which becomes the
    /// universe of the result.
    pub fn substitute(&self, bindings: &BTreeMap<Var, MultiPoly>) -> Result<MultiPoly, PolyError> {
        let target = match bindings.values().next() {
            Some(p) => {
                for q in bindings.values() {
                    p.check_universe(q)?;
                }
                *p.universe()
            }
            None => self.universe,
        };
        if bindings.is_empty() && !self.universe.is_sub_universe(&target) {
            return Err(PolyError::UniverseMismatch(self.universe, target));
        }
        let mut out = Self::zero(target);
        // Power cache keyed by (var, exponent).
        let mut powers: BTreeMap<(Var, u32), MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for &(v, e) in m.factors() {
                if let Some(binding) = bindings.get(&v) {
                    let p = powers
                        .entry((v, e))
                        .or_insert_with(|| binding.pow(e))
                        .clone();
                    term = term.mul(&p);
                } else {
                    if !target.contains(v) {
                        return Err(PolyError::UnknownVariable(v, target));
                    }
                    term = term.mul(&MultiPoly::var(target, v)?.pow(e));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Substitution that must bind every occurring variable of `family`.
    pub fn substitute_family(
        &self,
        family: Family,
        bindings: &BTreeMap<Var, MultiPoly>,
    ) -> Result<MultiPoly, PolyError> {
        for m in self.terms.keys() {
            for &(v, _) in m.factors() {
                if v.family == family && !bindings.contains_key(&v) {
                    return Err(PolyError::UnboundVariable(v));
                }
            }
        }
        self.substitute(bindings)
    }

    /// Re-embeds into a universe containing this one (same variables).
    pub fn into_universe(&self, target: VarUniverse) -> Result<MultiPoly, PolyError> {
        if !self.universe.is_sub_universe(&target) {
            return Err(PolyError::UniverseMismatch(self.universe, target));
        }
        Ok(MultiPoly { universe: target, terms: self.terms.clone() })
    }

    /// Renames `v_i -> v_{i + offset}` (used to move group coordinates into
    /// a later block of a widened universe). Requires the targets to exist.
    pub fn shift_v(&self, offset: u32, target: VarUniverse) -> Result<MultiPoly, PolyError> {
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let factors: Vec<(Var, u32)> = m
                .factors()
                .iter()
                .map(|&(v, e)| {
                    if v.family == Family::V {
                        (Var::v(v.index + offset), e)
                    } else {
                        (v, e)
                    }
                })
                .collect();
            for &(v, _) in &factors {
                if !target.contains(v) {
                    return Err(PolyError::UnknownVariable(v, target));
                }
            }
            out.add_term(Monomial::from_factors(&factors), c.clone());
        }
        Ok(out)
    }

    /// Discards terms whose monomial fails the predicate.
    pub fn retain_monomials<F: Fn(&Monomial) -> bool>(&self, keep: F) -> MultiPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        MultiPoly { universe: self.universe, terms }
    }

    /// Drops all terms of group-coordinate degree above `m`.
    pub fn truncate_group_degree(&self, m: u32) -> MultiPoly {
        self.retain_monomials(|mono| mono.group_degree() <= m)
    }

    /// Splits by the exponent pattern of one family: returns
    /// `family-monomial -> cofactor polynomial` (cofactor has the family
    /// variables removed).
    pub fn split_by_family(&self, family: Family) -> BTreeMap<Monomial, MultiPoly> {
        let mut out: BTreeMap<Monomial, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (fam_part, rest): (Vec<_>, Vec<_>) =
                m.factors().iter().partition(|&&(v, _)| v.family == family);
            let key = Monomial(fam_part.into_iter().copied().collect());
            let rest_mono = Monomial(rest.into_iter().copied().collect());
            out.entry(key)
                .or_insert_with(|| Self::zero(self.universe))
                .add_term(rest_mono, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// The coefficient polynomial of `var^k` (with `var` removed).
    pub fn coeff_of_power(&self, var: Var, k: u32) -> MultiPoly {
        let mut out = Self::zero(self.universe);
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off_var(var);
            if e == k {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Substitute zero for every variable of the family.
    pub fn at_family_zero(&self, family: Family) -> MultiPoly {
        self.retain_monomials(|m| m.degree_in_family(family) == 0)
    }
}

impl fmt::Display for MultiPoly {
    /// Leading (largest) term first; coefficients folded per the grammar so
    /// that the output re-parses to the same polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let c_str = c.to_string();
            let mixed = !c.re().is_zero() && !c.im().is_zero();
            let body = if m.factors().is_empty() {
                if mixed && idx > 0 {
                    // `a+b*i` needs wrapping only when glued after `+`.
                    c_str.clone()
                } else {
                    c_str.clone()
                }
            } else if c.is_one() {
                m.to_string()
            } else if (-c).is_one() {
                format!("-{m}")
            } else if mixed {
                format!("({c_str})*{m}")
            } else {
                format!("{c_str}*{m}")
            };
            if idx == 0 {
                out.push_str(&body);
            } else if let Some(stripped) = body.strip_prefix('-') {
                out.push('-');
                out.push_str(stripped);
            } else {
                out.push('+');
                out.push_str(&body);
            }
        }
        write!(f, "{out}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> VarUniverse {
        VarUniverse::new(2, 2)
    }

    fn var(v: Var) -> MultiPoly {
        MultiPoly::var(u(), v).unwrap()
    }

    #[test]
    fn graded_lex_order() {
        let x1 = Monomial::var(Var::x(1));
        let x2 = Monomial::var(Var::x(2));
        let xi1 = Monomial::var(Var::xi(1));
        let x1x2 = x1.mul(&x2);
        let x1sq = x1.mul(&x1);
        // Degree dominates; then earlier variables with higher exponents win.
        assert!(x1sq > x1x2);
        assert!(x1x2 > x1);
        assert!(x1 > x2);
        assert!(x2 > xi1);
        assert!(xi1 > Monomial::unit());
    }

    #[test]
    fn arithmetic_and_display() {
        let p = var(Var::x(1)).add(&var(Var::xi(1)));
        let q = var(Var::x(1)).sub(&var(Var::xi(1)));
        let prod = p.mul(&q);
        assert_eq!(prod.to_string(), "x1^2-xi1^2");
        assert!(p.sub(&p).is_zero());
        let scaled = p.scale(&GaussianRational::from_ratio(-1, 2));
        assert_eq!(scaled.to_string(), "-1/2*x1-1/2*xi1");
        let with_i = var(Var::x(1)).scale(&GaussianRational::i());
        assert_eq!(with_i.to_string(), "i*x1");
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = MultiPoly::var(VarUniverse::new(1, 0), Var::x(1)).unwrap();
        let b = MultiPoly::var(VarUniverse::new(2, 0), Var::x(1)).unwrap();
        assert!(matches!(a.checked_add(&b), Err(PolyError::UniverseMismatch(_, _))));
        assert!(MultiPoly::var(VarUniverse::new(1, 0), Var::x(2)).is_err());
    }

    #[test]
    fn derivatives() {
        // d^2/dx1^2 (x1^3 xi2) = 6 x1 xi2
        let p = var(Var::x(1)).pow(3).mul(&var(Var::xi(2)));
        let d2 = p.diff(Var::x(1), 2);
        assert_eq!(d2.to_string(), "6*x1*xi2");
        // Mixed partials commute.
        let q = var(Var::x(1)).pow(2).mul(&var(Var::x(2))).add(&var(Var::x(2)).pow(3));
        assert_eq!(q.diff(Var::x(1), 1).diff(Var::x(2), 1), q.diff(Var::x(2), 1).diff(Var::x(1), 1));
    }

    #[test]
    fn substitution() {
        // x1 -> x1 + x2 in x1^2: (x1+x2)^2
        let p = var(Var::x(1)).pow(2);
        let mut b = BTreeMap::new();
        b.insert(Var::x(1), var(Var::x(1)).add(&var(Var::x(2))));
        let s = p.substitute(&b).unwrap();
        assert_eq!(s.to_string(), "x1^2+2*x1*x2+x2^2");
        // Family-strict substitution reports unbound variables.
        let q = var(Var::th(1)).mul(&var(Var::th(2)));
        let mut partial = BTreeMap::new();
        partial.insert(Var::th(1), MultiPoly::one(u()));
        assert!(matches!(
            q.substitute_family(Family::Th, &partial),
            Err(PolyError::UnboundVariable(_))
        ));
    }

    #[test]
    fn splitting_and_truncation() {
        let p = var(Var::xi(1))
            .mul(&var(Var::x(1)))
            .add(&var(Var::xi(1)).pow(2))
            .add(&var(Var::x(2)));
        let by_xi = p.split_by_family(Family::Xi);
        assert_eq!(by_xi.len(), 3);
        let v2 = var(Var::v(2)).pow(3).add(&var(Var::v(1)));
        assert_eq!(v2.truncate_group_degree(2).to_string(), "v1");
        assert_eq!(v2.coeff_of_power(Var::v(2), 3).to_string(), "1");
    }

    #[test]
    fn display_round_trip_shapes() {
        let mixed = var(Var::x(1)).scale(
            &(GaussianRational::from_ratio(1, 2) + GaussianRational::i()),
        );
        assert_eq!(mixed.to_string(), "(1/2+i)*x1");
        let nm = var(Var::x(1)).neg();
        assert_eq!(nm.to_string(), "-x1");
        assert_eq!(MultiPoly::zero(u()).to_string(), "0");
    }
}
