//! The universal enveloping algebra with rescaled bracket and the Gutt
//! star product it induces on polynomial functions of the dual.
//!
//! Elements are kept in the Poincare-Birkhoff-Witt basis: formal-parameter
//! series of words `e_{i_1} ... e_{i_m}` with nondecreasing indices.  The
//! defining relation is
//!
//! ```text
//! e_i e_j - e_j e_i = (hbar/i) [e_i, e_j]
//! ```
//!
//! so each out-of-order swap produces a contracted word one letter shorter
//! carrying one extra power of the formal parameter.  The Gutt product is
//! `f * g = sym^{-1}(sym(f) sym(g))`, with `sym` the symmetrization map
//! sending a monomial in the dual coordinates to the average over all
//! orderings of the corresponding word.

use crate::lie::{LieAlgebra, LieError};
use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::series::{HbarSeries, SeriesError};
use crate::vars::{Family, Var, VarUniverse};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UEAError {
    #[error("expected a polynomial in the dual coordinates only, found family {0:?}")]
    NotDualPolynomial(Family),
    #[error("dual coordinate index {0} exceeds algebra dimension {1}")]
    IndexOutOfRange(u32, usize),
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// Element of the truncated enveloping algebra in the PBW basis.
///
/// `terms` maps a nondecreasing word to its coefficient vector in the
/// formal parameter (index = power, length = order + 1).
#[derive(Clone, Debug, PartialEq)]
pub struct UEAElement {
    dim: usize,
    order: usize,
    terms: BTreeMap<Vec<u8>, Vec<GaussianRational>>,
}

impl UEAElement {
    pub fn zero(dim: usize, order: usize) -> Self {
        UEAElement { dim, order, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize, order: usize) -> Self {
        let mut e = Self::zero(dim, order);
        e.add_term(Vec::new(), 0, GaussianRational::one());
        e
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &Vec<GaussianRational>)> {
        self.terms.iter()
    }

    fn add_term(&mut self, word: Vec<u8>, hpow: usize, coeff: GaussianRational) {
        if hpow > self.order || coeff.is_zero() {
            return;
        }
        debug_assert!(word.windows(2).all(|w| w[0] <= w[1]), "word not PBW-ordered");
        let entry = self
            .terms
            .entry(word.clone())
            .or_insert_with(|| vec![GaussianRational::zero(); self.order + 1]);
        entry[hpow] += &coeff;
        if entry.iter().all(GaussianRational::is_zero) {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &UEAElement) -> Result<UEAElement, UEAError> {
        if self.order != other.order {
            return Err(UEAError::OrderMismatch(self.order, other.order));
        }
        let mut out = self.clone();
        for (word, coeffs) in &other.terms {
            for (h, c) in coeffs.iter().enumerate() {
                out.add_term(word.clone(), h, c.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &UEAElement) -> Result<UEAElement, UEAError> {
        let mut out = self.clone();
        for (word, coeffs) in &other.terms {
            for (h, c) in coeffs.iter().enumerate() {
                out.add_term(word.clone(), h, -c.clone());
            }
        }
        if self.order != other.order {
            return Err(UEAError::OrderMismatch(self.order, other.order));
        }
        Ok(out)
    }

    /// Rewrites an arbitrary word into the PBW basis and accumulates it
    /// here with the given scalar weight and parameter shift.
    fn accumulate_reduced(&mut self, algebra: &LieAlgebra, word: Vec<u8>, hpow: usize, coeff: GaussianRational) {
        let mut work: Vec<(Vec<u8>, usize, GaussianRational)> = vec![(word, hpow, coeff)];
        let minus_i = -GaussianRational::i();
        while let Some((w, h, c)) = work.pop() {
            if h > self.order || c.is_zero() {
                continue;
            }
            match w.windows(2).position(|p| p[0] > p[1]) {
                None => self.add_term(w, h, c),
                Some(k) => {
                    let (b, a) = (w[k] as usize, w[k + 1] as usize);
                    let mut swapped = w.clone();
                    swapped.swap(k, k + 1);
                    work.push((swapped, h, c.clone()));
                    // e_b e_a = e_a e_b + (hbar/i) sum_m c[b][a][m] e_m,
                    // and (hbar/i) = -i hbar.
                    for m in 0..self.dim {
                        let s = algebra.structure(b, a, m);
                        if s.is_zero() {
                            continue;
                        }
                        let mut contracted = Vec::with_capacity(w.len() - 1);
                        contracted.extend_from_slice(&w[..k]);
                        contracted.push(m as u8);
                        contracted.extend_from_slice(&w[k + 2..]);
                        work.push((contracted, h + 1, &(&minus_i * s) * &c));
                    }
                }
            }
        }
    }

    pub fn mul(&self, other: &UEAElement, algebra: &LieAlgebra) -> Result<UEAElement, UEAError> {
        if self.order != other.order {
            return Err(UEAError::OrderMismatch(self.order, other.order));
        }
        let mut out = UEAElement::zero(self.dim, self.order);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut concat = w1.clone();
                concat.extend_from_slice(w2);
                for (h1, a) in c1.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (h2, b) in c2.iter().enumerate() {
                        if h1 + h2 > self.order || b.is_zero() {
                            continue;
                        }
                        out.accumulate_reduced(algebra, concat.clone(), h1 + h2, a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Length of the longest word present.
    fn max_word_len(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }
}

fn factorial(n: usize) -> BigRational {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k as i64);
    }
    BigRational::from_integer(f)
}

/// All distinct orderings of a sorted word.
fn distinct_arrangements(word: &[u8]) -> BTreeSet<Vec<u8>> {
    let mut out = BTreeSet::new();
    let mut current = word.to_vec();
    loop {
        out.insert(current.clone());
        // next_permutation in lexicographic order
        let Some(i) = current.windows(2).rposition(|w| w[0] < w[1]) else {
            break;
        };
        let j = current.iter().rposition(|&c| c > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        if current == word {
            break;
        }
    }
    out
}

fn monomial_to_word(mono: &Monomial, dim: usize) -> Result<Vec<u8>, UEAError> {
    let mut word = Vec::new();
    for (var, exp) in mono.factors() {
        match var.family {
            Family::Th => {
                if var.index as usize > dim {
                    return Err(UEAError::IndexOutOfRange(var.index, dim));
                }
                for _ in 0..*exp {
                    word.push((var.index - 1) as u8);
                }
            }
            fam => return Err(UEAError::NotDualPolynomial(fam)),
        }
    }
    word.sort_unstable();
    Ok(word)
}

fn word_to_monomial(word: &[u8]) -> Monomial {
    let mut counts: BTreeMap<u8, u32> = BTreeMap::new();
    for &letter in word {
        *counts.entry(letter).or_insert(0) += 1;
    }
    let factors: Vec<(Var, u32)> =
        counts.into_iter().map(|(l, e)| (Var::th(l as u32 + 1), e)).collect();
    Monomial::from_factors(&factors)
}

/// Symmetrization of a single sorted word: the average of all its
/// orderings, rewritten into the PBW basis.
fn sym_word(algebra: &LieAlgebra, word: &[u8], order: usize) -> UEAElement {
    let mut out = UEAElement::zero(algebra.dim(), order);
    if word.is_empty() {
        return UEAElement::one(algebra.dim(), order);
    }
    // Each distinct arrangement appears (prod of letter multiplicities)!
    // times among all |word|! orderings.
    let mut mult = BigRational::one();
    let mut run = 1usize;
    for k in 1..word.len() {
        if word[k] == word[k - 1] {
            run += 1;
        } else {
            mult *= factorial(run);
            run = 1;
        }
    }
    mult *= factorial(run);
    let weight = GaussianRational::from_real(&mult / &factorial(word.len()));
    for arrangement in distinct_arrangements(word) {
        out.accumulate_reduced(algebra, arrangement, 0, weight.clone());
    }
    out
}

/// Symmetrization of a polynomial in the dual coordinates.
pub fn sym_poly(algebra: &LieAlgebra, f: &MultiPoly, order: usize) -> Result<UEAElement, UEAError> {
    let mut out = UEAElement::zero(algebra.dim(), order);
    for (mono, coeff) in f.terms() {
        let word = monomial_to_word(mono, algebra.dim())?;
        let sym = sym_word(algebra, &word, order);
        for (w, cs) in sym.terms() {
            for (h, c) in cs.iter().enumerate() {
                out.add_term(w.clone(), h, coeff * c);
            }
        }
    }
    Ok(out)
}

/// Symmetrization of a parameter series of dual-coordinate polynomials.
pub fn sym_series(algebra: &LieAlgebra, f: &HbarSeries) -> Result<UEAElement, UEAError> {
    let order = f.order();
    let mut out = UEAElement::zero(algebra.dim(), order);
    for (shift, poly) in f.coeffs().iter().enumerate() {
        if poly.is_zero() {
            continue;
        }
        let sym = sym_poly(algebra, poly, order)?;
        for (w, cs) in sym.terms() {
            for (h, c) in cs.iter().enumerate() {
                out.add_term(w.clone(), h + shift, c.clone());
            }
        }
    }
    Ok(out)
}

/// Inverse of symmetrization, by downward induction on word length: the
/// PBW expansion of `sym(monomial)` is the sorted word plus strictly
/// shorter corrections, so the longest words of the input determine the
/// highest-degree part of the preimage exactly.
pub fn unsym(
    algebra: &LieAlgebra,
    element: &UEAElement,
    universe: VarUniverse,
) -> Result<HbarSeries, UEAError> {
    let order = element.order();
    let mut remaining = element.clone();
    let mut coeffs = vec![MultiPoly::zero(universe); order + 1];
    while let Some(len) = remaining.max_word_len() {
        let mut layer_terms: Vec<Vec<(Monomial, GaussianRational)>> = vec![Vec::new(); order + 1];
        for (word, cs) in remaining.terms() {
            if word.len() != len {
                continue;
            }
            let mono = word_to_monomial(word);
            for (h, c) in cs.iter().enumerate() {
                if !c.is_zero() {
                    layer_terms[h].push((mono.clone(), c.clone()));
                }
            }
        }
        let layer: Vec<MultiPoly> = layer_terms
            .into_iter()
            .map(|ts| MultiPoly::from_terms(universe, ts))
            .collect();
        let layer_series = HbarSeries::from_coeffs(layer.clone());
        remaining = remaining.sub(&sym_series(algebra, &layer_series)?)?;
        debug_assert!(remaining.max_word_len().map_or(true, |l| l < len));
        for (h, p) in layer.into_iter().enumerate() {
            coeffs[h] = coeffs[h].checked_add(&p)?;
        }
    }
    Ok(HbarSeries::from_coeffs(coeffs))
}

/// Gutt star product of two dual-coordinate polynomials via the PBW route.
pub fn gutt_pbw(
    algebra: &LieAlgebra,
    f: &MultiPoly,
    g: &MultiPoly,
    order: usize,
) -> Result<HbarSeries, UEAError> {
    f.check_universe(g)?;
    let sf = sym_poly(algebra, f, order)?;
    let sg = sym_poly(algebra, g, order)?;
    unsym(algebra, &sf.mul(&sg, algebra)?, *f.universe())
}

/// Gutt star product of parameter series (for iterated products).
pub fn gutt_star(
    algebra: &LieAlgebra,
    f: &HbarSeries,
    g: &HbarSeries,
) -> Result<HbarSeries, UEAError> {
    if f.order() != g.order() {
        return Err(UEAError::OrderMismatch(f.order(), g.order()));
    }
    let sf = sym_series(algebra, f)?;
    let sg = sym_series(algebra, g)?;
    unsym(algebra, &sf.mul(&sg, algebra)?, *f.universe())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn u() -> VarUniverse {
        VarUniverse::new(0, 3)
    }

    fn p(src: &str) -> MultiPoly {
        parse_poly(src, u()).unwrap()
    }

    fn star(algebra: &LieAlgebra, f: &str, g: &str, order: usize) -> HbarSeries {
        gutt_pbw(algebra, &p(f), &p(g), order).unwrap()
    }

    #[test]
    fn pbw_rewriting_so3() {
        // e2 e1 = e1 e2 + i*hbar*e3 (since (hbar/i)[e2,e1] = i*hbar*e3).
        let alg = LieAlgebra::so3();
        let mut raw = UEAElement::zero(3, 2);
        raw.accumulate_reduced(&alg, vec![1, 0], 0, GaussianRational::one());
        let mut want = UEAElement::zero(3, 2);
        want.add_term(vec![0, 1], 0, GaussianRational::one());
        want.add_term(vec![2], 1, GaussianRational::i());
        assert_eq!(raw, want);
    }

    #[test]
    fn gutt_unit_and_linear() {
        let alg = LieAlgebra::so3();
        assert_eq!(star(&alg, "1", "1", 3), HbarSeries::one(u(), 3));
        // Linear * 1 and 1 * linear are undeformed.
        let th1 = HbarSeries::from_poly(p("th1"), 3);
        assert_eq!(star(&alg, "th1", "1", 3), th1);
        assert_eq!(star(&alg, "1", "th1", 3), th1);
    }

    #[test]
    fn gutt_linear_times_linear_so3() {
        // th1 * th2 = th1 th2 - (i/2) hbar th3.
        let alg = LieAlgebra::so3();
        let got = star(&alg, "th1", "th2", 2);
        assert_eq!(got.coeff(0), &p("th1*th2"));
        assert_eq!(got.coeff(1), &p("-1/2*i*th3"));
        assert!(got.coeff(2).is_zero());
        // And the commutator is (hbar/i)[th1,th2] = -i hbar th3.
        let ba = star(&alg, "th2", "th1", 2);
        let comm = got.sub(&ba);
        assert!(comm.coeff(0).is_zero());
        assert_eq!(comm.coeff(1), &p("-i*th3"));
    }

    #[test]
    fn commutator_leading_term_is_poisson() {
        // f*g - g*f = -i hbar {f,g}_KK + higher order, on two algebras.
        for alg in [LieAlgebra::so3(), LieAlgebra::heisenberg()] {
            for (f, g) in [
                ("th1^2", "th2"),
                ("th1*th3", "th2^2"),
                ("th1+2*th2", "th3^2-th1"),
            ] {
                let comm = star(&alg, f, g, 1).sub(&star(&alg, g, f, 1));
                let pb = alg.kk_poisson(&p(f), &p(g)).unwrap();
                assert!(comm.coeff(0).is_zero(), "{f},{g}");
                assert_eq!(
                    comm.coeff(1),
                    &pb.scale(&-GaussianRational::i()),
                    "{f},{g} on dim-{} algebra",
                    alg.dim()
                );
            }
        }
    }

    #[test]
    fn sym_round_trip() {
        let alg = LieAlgebra::so3();
        for src in ["1", "th1", "th1*th2", "th3^2", "th1^2*th2 - 3*th3", "th1*th2*th3"] {
            let f = p(src);
            let s = sym_poly(&alg, &f, 4).unwrap();
            let back = unsym(&alg, &s, u()).unwrap();
            assert_eq!(back.coeff(0), &f, "round trip of {src}");
            for k in 1..=4 {
                assert!(back.coeff(k).is_zero(), "spurious correction for {src}");
            }
        }
    }

    #[test]
    fn gutt_degree_structure() {
        // The k-th coefficient of a Gutt product of monomials has degree
        // deg f + deg g - k, so high coefficients vanish.
        let alg = LieAlgebra::so3();
        let got = star(&alg, "th1^2", "th2^2", 6);
        for k in 0..=6 {
            let c = got.coeff(k);
            if !c.is_zero() {
                assert_eq!(c.total_degree(), (4 - k as u32), "coefficient {k}");
            }
        }
        assert!(got.coeff(5).is_zero());
    }

    #[test]
    fn gutt_associativity() {
        let alg = LieAlgebra::so3();
        let order = 4;
        for (f, g, h) in [
            ("th1", "th2", "th3"),
            ("th1^2", "th2", "th1*th3"),
            ("th1+th2", "th2^2", "th3"),
        ] {
            let fg = star(&alg, f, g, order);
            let gh = star(&alg, g, h, order);
            let left = gutt_star(&alg, &fg, &HbarSeries::from_poly(p(h), order)).unwrap();
            let right = gutt_star(&alg, &HbarSeries::from_poly(p(f), order), &gh).unwrap();
            assert_eq!(left, right, "associativity for ({f})*({g})*({h})");
        }
    }

    #[test]
    fn heisenberg_center_is_central() {
        let alg = LieAlgebra::heisenberg();
        let f = "th3^2 + 2*th3";
        for g in ["th1", "th2^2", "th1*th2"] {
            let ab = star(&alg, f, g, 3);
            let ba = star(&alg, g, f, 3);
            assert_eq!(ab, ba, "center commutes with {g}");
        }
    }

    #[test]
    fn rejects_non_dual_input() {
        let alg = LieAlgebra::so3();
        let universe = VarUniverse::new(2, 3);
        let f = parse_poly("x1*th1", universe).unwrap();
        let g = parse_poly("th2", universe).unwrap();
        assert!(matches!(
            gutt_pbw(&alg, &f, &g, 2),
            Err(UEAError::NotDualPolynomial(Family::X))
        ));
    }
}
