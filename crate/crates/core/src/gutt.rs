//! The Gutt star product computed by stationary phase, independently of
//! the enveloping-algebra route in [`crate::uea`].
//!
//! The product of two polynomials on the dual of a Lie algebra is an
//! oscillatory integral over two copies of the group (in exponential
//! coordinates `v1`, `v2`) and two copies of the dual (`p1`, `p2`), with
//! phase `<th, bch(v1, v2)> - <p1, v1> - <p2, v2>` and externals
//! `f(p1) g(p2)`.  The critical point is `v = 0`, `p1 = p2 = th`, and the
//! graph expansion of [`crate::feynman`] evaluates the series exactly.
//!
//! Because the generating function depends only on the primal block, the
//! propagator has no primal-primal entries: every internal vertex leg
//! must pair with an external leg.  A vertex of valence `m` therefore
//! forces at least `m` edges against one internal vertex, so any graph
//! completing an assignment at power `<= N` queries vertex tensors of
//! order at most `N + 1`.  The BCH series is truncated there.

use crate::feynman::{expand, ExternalFn, PhaseError, PhaseModel};
use crate::lie::{bch, LieAlgebra, LieError};
use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::series::HbarSeries;
use crate::vars::{Family, Var, VarUniverse};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GuttError {
    #[error("arguments live on a {0}-dimensional dual but the algebra has dimension {1}")]
    DimensionMismatch(u32, usize),
    #[error("argument uses integration-variable family v; only th and parameters are allowed")]
    UsesIntegrationVariables,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The reusable part of the stationary-phase Gutt product: the BCH phase
/// and its primal/dual bookkeeping for one algebra at one truncation
/// order.
pub struct GuttPhase {
    base: VarUniverse,
    wide: VarUniverse,
    n: usize,
    w: MultiPoly,
    primal: Vec<Var>,
    dual: Vec<Var>,
    order: usize,
}

impl GuttPhase {
    pub fn new(algebra: &LieAlgebra, base: VarUniverse, order: usize) -> Result<Self, GuttError> {
        let n = algebra.dim();
        if base.n() as usize != n {
            return Err(GuttError::DimensionMismatch(base.n(), n));
        }
        let wide = VarUniverse::with_vblocks(base.d(), base.n(), 4);
        let v1: Vec<MultiPoly> = (1..=n as u32)
            .map(|a| MultiPoly::var(wide, wide.v_in_block(0, a)))
            .collect::<Result<_, _>>()?;
        let v2: Vec<MultiPoly> = (1..=n as u32)
            .map(|a| MultiPoly::var(wide, wide.v_in_block(1, a)))
            .collect::<Result<_, _>>()?;
        let z = bch(algebra, &v1, &v2, order.max(1) + 1)?;
        let mut w = MultiPoly::zero(wide);
        for (a, za) in z.iter().enumerate() {
            w = w.checked_add(&za.mul(&MultiPoly::var(wide, Var::th(a as u32 + 1))?))?;
        }
        let mut primal = Vec::with_capacity(2 * n);
        let mut dual = Vec::with_capacity(2 * n);
        for block in 0..2u32 {
            for a in 1..=n as u32 {
                primal.push(wide.v_in_block(block, a));
                dual.push(wide.v_in_block(block + 2, a));
            }
        }
        Ok(GuttPhase { base, wide, n, w, primal, dual, order })
    }

    fn external(&self, f: &MultiPoly, block: u32) -> Result<ExternalFn, GuttError> {
        if f.degree_in_family(Family::V) > 0 {
            return Err(GuttError::UsesIntegrationVariables);
        }
        let lifted = f.into_universe(self.wide)?;
        let mut rename = BTreeMap::new();
        let mut support = Vec::with_capacity(self.n);
        for a in 1..=self.n as u32 {
            let pa = self.wide.v_in_block(block, a);
            rename.insert(Var::th(a), MultiPoly::var(self.wide, pa)?);
            support.push(pa);
        }
        let on_dual = lifted.substitute(&rename)?;
        let mut eval = BTreeMap::new();
        for a in 1..=self.n as u32 {
            eval.insert(self.wide.v_in_block(block, a), MultiPoly::var(self.wide, Var::th(a))?);
        }
        Ok(ExternalFn::poly(on_dual, support, eval))
    }

    /// The Gutt product of `f` and `g`, truncated at the phase's order.
    pub fn product(&self, f: &MultiPoly, g: &MultiPoly) -> Result<HbarSeries, GuttError> {
        f.check_universe(g)?;
        let model = PhaseModel::from_generating(
            self.wide,
            &self.w,
            self.primal.clone(),
            self.dual.clone(),
            vec![self.external(f, 2)?, self.external(g, 3)?],
        )?;
        let full = expand(&model, self.order)?;
        let coeffs = full
            .coeffs()
            .iter()
            .map(|p| {
                MultiPoly::from_terms(self.base, p.terms().map(|(m, c)| (m.clone(), c.clone())))
            })
            .collect::<Vec<_>>();
        Ok(HbarSeries::from_coeffs(coeffs))
    }
}

/// One-shot stationary-phase Gutt product.
pub fn gutt_via_phase(
    algebra: &LieAlgebra,
    f: &MultiPoly,
    g: &MultiPoly,
    order: usize,
) -> Result<HbarSeries, GuttError> {
    GuttPhase::new(algebra, *f.universe(), order)?.product(f, g)
}

/// Products of all monomial pairs `th^alpha * th^beta` with
/// `|alpha|, |beta| <= max_deg`, computed in a single expansion.
///
/// Both factors are tagged with disjoint marker variables
/// (`f = sum_alpha x^alpha th^alpha` on markers `x_1..x_n`,
/// `g` on `x_{n+1}..x_{2n}`); since every term of the expansion is
/// bilinear in one term of each external, the coefficient of the marker
/// monomial `(alpha, beta)` in the result is exactly the product of the
/// corresponding pair.  Keys are exponent vectors, values live in the
/// marker-free universe.
pub fn gutt_monomial_table(
    algebra: &LieAlgebra,
    max_deg: u32,
    order: usize,
) -> Result<BTreeMap<(Vec<u32>, Vec<u32>), HbarSeries>, GuttError> {
    let n = algebra.dim();
    let marked = VarUniverse::new(2 * n as u32, n as u32);
    let plain = VarUniverse::new(0, n as u32);
    let mark = |offset: usize| -> Result<MultiPoly, GuttError> {
        let mut acc = MultiPoly::zero(marked);
        for alpha in degree_box(n, max_deg) {
            let mut factors = Vec::new();
            for (i, &e) in alpha.iter().enumerate() {
                if e > 0 {
                    factors.push((Var::x((offset + i) as u32 + 1), e));
                    factors.push((Var::th(i as u32 + 1), e));
                }
            }
            acc = acc.checked_add(&MultiPoly::from_terms(
                marked,
                [(Monomial::from_factors(&factors), GaussianRational::one())],
            ))?;
        }
        Ok(acc)
    };
    let phase = GuttPhase::new(algebra, marked, order)?;
    let result = phase.product(&mark(0)?, &mark(n)?)?;
    let mut table: BTreeMap<(Vec<u32>, Vec<u32>), Vec<MultiPoly>> = BTreeMap::new();
    for (h, coeff) in result.coeffs().iter().enumerate() {
        for (mono, c) in coeff.terms() {
            let mut alpha = vec![0u32; n];
            let mut beta = vec![0u32; n];
            let mut rest = Vec::new();
            for &(v, e) in mono.factors() {
                if v.family == Family::X {
                    let i = v.index as usize - 1;
                    if i < n {
                        alpha[i] = e;
                    } else {
                        beta[i - n] = e;
                    }
                } else {
                    rest.push((v, e));
                }
            }
            let entry = table
                .entry((alpha, beta))
                .or_insert_with(|| vec![MultiPoly::zero(plain); order + 1]);
            entry[h] = entry[h].checked_add(&MultiPoly::from_terms(
                plain,
                [(Monomial::from_factors(&rest), c.clone())],
            ))?;
        }
    }
    let mut out = BTreeMap::new();
    for alpha in degree_box(n, max_deg) {
        for beta in degree_box(n, max_deg) {
            let coeffs = table
                .remove(&(alpha.clone(), beta.clone()))
                .unwrap_or_else(|| vec![MultiPoly::zero(plain); order + 1]);
            out.insert((alpha.clone(), beta.clone()), HbarSeries::from_coeffs(coeffs));
        }
    }
    Ok(out)
}

/// All exponent vectors of length `n` with total degree at most `max`.
fn degree_box(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    for i in 0..n {
        let mut next = Vec::new();
        for v in out {
            let used: u32 = v.iter().sum();
            for e in 0..=max - used {
                let mut w = v.clone();
                w[i] = e;
                next.push(w);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::uea::gutt_pbw;

    fn u() -> VarUniverse {
        VarUniverse::new(0, 3)
    }

    fn p(src: &str) -> MultiPoly {
        parse_poly(src, u()).unwrap()
    }

    #[test]
    fn abelian_product_is_pointwise() {
        let alg = LieAlgebra::abelian(3);
        let got = gutt_via_phase(&alg, &p("th1^2*th2 + 1"), &p("th3 - th1"), 3).unwrap();
        assert_eq!(got.coeff(0), &p("(th1^2*th2 + 1)*(th3 - th1)"));
        for k in 1..=3 {
            assert!(got.coeff(k).is_zero());
        }
    }

    #[test]
    fn unit_and_linear_terms_so3() {
        let alg = LieAlgebra::so3();
        let one = p("1");
        assert_eq!(gutt_via_phase(&alg, &one, &one, 2).unwrap(), HbarSeries::one(u(), 2));
        let th1 = p("th1");
        let got = gutt_via_phase(&alg, &th1, &one, 2).unwrap();
        assert_eq!(got, HbarSeries::from_poly(th1.clone(), 2));
        // th1 * th2 = th1 th2 - (i/2) hbar th3.
        let got = gutt_via_phase(&alg, &p("th1"), &p("th2"), 2).unwrap();
        assert_eq!(got.coeff(0), &p("th1*th2"));
        assert_eq!(got.coeff(1), &p("-1/2*i*th3"));
        assert!(got.coeff(2).is_zero());
    }

    #[test]
    fn matches_pbw_route_on_so3_samples() {
        let alg = LieAlgebra::so3();
        let pairs = [
            ("th1", "th2"),
            ("th1*th2", "th3"),
            ("th1^2", "th2^2"),
            ("th3^2", "th1*th2*th3"),
        ];
        for (fs, gs) in pairs {
            let f = p(fs);
            let g = p(gs);
            let via_phase = gutt_via_phase(&alg, &f, &g, 3).unwrap();
            let via_pbw = gutt_pbw(&alg, &f, &g, 3).unwrap();
            assert_eq!(via_phase, via_pbw, "pair ({fs}, {gs})");
        }
    }

    #[test]
    fn matches_pbw_route_on_heisenberg_samples() {
        let alg = LieAlgebra::heisenberg();
        for (fs, gs) in [("th1", "th2"), ("th1*th2", "th1^2"), ("th1^2*th2", "th2*th3")] {
            let f = p(fs);
            let g = p(gs);
            let via_phase = gutt_via_phase(&alg, &f, &g, 3).unwrap();
            let via_pbw = gutt_pbw(&alg, &f, &g, 3).unwrap();
            assert_eq!(via_phase, via_pbw, "pair ({fs}, {gs})");
        }
    }

    #[test]
    fn monomial_table_agrees_with_direct_products() {
        let alg = LieAlgebra::so3();
        let table = gutt_monomial_table(&alg, 2, 2).unwrap();
        assert_eq!(table.len(), 100);
        let plain = VarUniverse::new(0, 3);
        for ((alpha, beta), product) in &table {
            let mono = |e: &[u32]| {
                let factors: Vec<(Var, u32)> = e
                    .iter()
                    .enumerate()
                    .filter(|&(_, &k)| k > 0)
                    .map(|(i, &k)| (Var::th(i as u32 + 1), k))
                    .collect();
                MultiPoly::from_terms(
                    plain,
                    [(Monomial::from_factors(&factors), GaussianRational::one())],
                )
            };
            let direct = gutt_via_phase(&alg, &mono(alpha), &mono(beta), 2).unwrap();
            assert_eq!(product, &direct, "pair ({alpha:?}, {beta:?})");
        }
    }

    #[test]
    fn rejects_mismatched_dimension() {
        let alg = LieAlgebra::so3();
        let u2 = VarUniverse::new(0, 2);
        let f = parse_poly("th1", u2).unwrap();
        assert!(matches!(
            gutt_via_phase(&alg, &f, &f, 1),
            Err(GuttError::DimensionMismatch(2, 3))
        ));
    }
}
