//! Standard-ordered quantization: symbols acting as differential
//! operators, symbol recovery, and the standard star product.
//!
//! A symbol `f(x, xi)` acts on a formal function `psi(x)` by replacing
//! each monomial `xi^b` with `(hbar/i)^{|b|} d^b/dx^b`, keeping the
//! `x`-coefficients on the left.  `symbol_extract` inverts this: given the
//! action of an unknown operator on the monomial basis, it recovers the
//! unique symbol, solving triangularly degree by degree, and fails loudly
//! if the action was not of the assumed differential-operator shape.  The
//! extraction is also provided relative to a polynomial substitution of
//! the arguments ("along a flow"), which is how amplitude products are
//! recovered from operator compositions.

use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::series::{HbarSeries, SeriesError};
use crate::vars::{Family, Var, VarUniverse};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("operand depends on xi; operators act on functions of x only")]
    OperandDependsOnXi,
    #[error("action on {0} is not reproduced by any symbol of xi-degree <= {1}")]
    SymbolInconsistent(String, u32),
    #[error("action on {0} has an hbar-power too low for a differential operator")]
    NotDivisible(String),
    #[error("operator evaluation failed: {0}")]
    Action(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `(hbar/i)^k = (-i)^k hbar^k`: the scalar part, the power is a shift.
fn minus_i_pow(k: u32) -> GaussianRational {
    (-GaussianRational::i()).pow(k)
}

fn factorial(n: u32) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n as u64 {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// Applies the standard-ordered operator of the symbol `f` to `psi`.
///
/// `psi` must not depend on `xi`; any other variables (`x`, group
/// coordinates, parameters) ride along as coefficients.
pub fn op_apply(f: &HbarSeries, psi: &HbarSeries) -> Result<HbarSeries, QuantizeError> {
    let universe = *f.universe();
    for c in psi.coeffs() {
        if c.degree_in_family(Family::Xi) > 0 {
            return Err(QuantizeError::OperandDependsOnXi);
        }
    }
    let order = f.order().max(psi.order());
    let mut out = HbarSeries::zero(universe, order);
    for (m, fm) in f.coeffs().iter().enumerate() {
        if m > order {
            break;
        }
        for (xi_mono, coeff) in fm.split_by_family(Family::Xi) {
            let k = xi_mono.total_degree();
            if m + k as usize > order {
                continue;
            }
            let mut d = psi.clone();
            for &(v, e) in xi_mono.factors() {
                d = d.map(|p| p.diff(Var::x(v.index), e));
            }
            if d.is_zero() {
                continue;
            }
            let term = d
                .map(|p| p.mul(&coeff))
                .scale(&minus_i_pow(k))
                .shift_up(m + k as usize)
                .padded(order)
                .truncated(order);
            out = out.add(&term);
        }
    }
    Ok(out)
}

/// Recovers the symbol of an operator from its action on `x`-monomials,
/// assuming the shape `sum_b c_b(x; hbar) (hbar/i)^{|b|} (d^b psi)(F(x))`
/// with `xi`-degree at most `xi_bound` and `F` the given substitution
/// (the identity for honest pseudo-differential operators).
///
/// When `group_cap` is set, the whole extraction happens in the quotient
/// by group-coordinate degree above the cap: the action is expected to be
/// truncated there, and the reconstruction terms are truncated to match.
///
/// Monomials of degree `xi_bound + 1` are used as a consistency check:
/// if the residual there is nonzero the action was not of the assumed
/// shape and an error is returned.
pub fn symbol_extract_along<A>(
    mut action: A,
    flow: &[MultiPoly],
    universe: VarUniverse,
    xi_bound: u32,
    order: usize,
    group_cap: Option<u32>,
) -> Result<HbarSeries, QuantizeError>
where
    A: FnMut(&MultiPoly) -> Result<HbarSeries, QuantizeError>,
{
    let d = universe.d() as usize;
    assert_eq!(flow.len(), d, "substitution must cover every x variable");
    let cap = |s: HbarSeries| match group_cap {
        Some(m) => s.truncate_group_degree(m),
        None => s,
    };
    let mut solved: BTreeMap<Vec<u32>, HbarSeries> = BTreeMap::new();
    for total in 0..=xi_bound + 1 {
        for gamma in exponent_vectors(d, total) {
            let psi = monomial_poly(universe, &gamma);
            let observed = cap(action(&psi)?);
            // Subtract the contributions of already-solved coefficients.
            let mut residual = observed;
            for (beta, c_beta) in &solved {
                if !beta.iter().zip(&gamma).all(|(b, g)| b <= g) {
                    continue;
                }
                let k: u32 = beta.iter().sum();
                let mut value = MultiPoly::one(universe);
                let mut scale = BigRational::one();
                for i in 0..d {
                    let (b, g) = (beta[i], gamma[i]);
                    scale *= factorial(g) / factorial(g - b);
                    value = value.mul(&flow[i].pow(g - b));
                }
                let term = cap(c_beta
                    .mul_poly(&value)
                    .scale(&(&minus_i_pow(k) * &GaussianRational::from_real(scale)))
                    .shift_up(k as usize)
                    .padded(order)
                    .truncated(order));
                residual = residual.padded(order).truncated(order).sub(&term);
            }
            if total <= xi_bound {
                let k = total;
                let gamma_fact = GaussianRational::from_real(
                    gamma.iter().map(|&g| factorial(g)).product::<BigRational>().recip(),
                );
                let c = residual
                    .shift_down(k as usize)
                    .map_err(|_| QuantizeError::NotDivisible(psi.to_string()))?
                    .scale(&(&GaussianRational::i().pow(k) * &gamma_fact));
                if !c.is_zero() {
                    solved.insert(gamma.clone(), c.padded(order).truncated(order));
                }
            } else if !residual.is_zero() {
                return Err(QuantizeError::SymbolInconsistent(psi.to_string(), xi_bound));
            }
        }
    }
    let mut symbol = HbarSeries::zero(universe, order);
    for (beta, c_beta) in solved {
        let factors: Vec<(Var, u32)> = beta
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e > 0)
            .map(|(i, &e)| (Var::xi(i as u32 + 1), e))
            .collect();
        let xi_poly = MultiPoly::from_terms(
            universe,
            [(Monomial::from_factors(&factors), GaussianRational::one())],
        );
        symbol = symbol.add(&c_beta.mul_poly(&xi_poly));
    }
    Ok(symbol)
}

/// `symbol_extract_along` with the identity substitution and no
/// group-degree cap.
pub fn symbol_extract<A>(
    action: A,
    universe: VarUniverse,
    xi_bound: u32,
    order: usize,
) -> Result<HbarSeries, QuantizeError>
where
    A: FnMut(&MultiPoly) -> Result<HbarSeries, QuantizeError>,
{
    let flow: Result<Vec<MultiPoly>, PolyError> = (1..=universe.d())
        .map(|i| MultiPoly::var(universe, Var::x(i)))
        .collect();
    symbol_extract_along(action, &flow?, universe, xi_bound, order, None)
}

/// The standard star product by its closed formula:
/// `sum_a (hbar/i)^{|a|}/a! (d_xi^a f)(d_x^a g)`.
pub fn star_standard(f: &HbarSeries, g: &HbarSeries, order: usize) -> HbarSeries {
    let universe = *f.universe();
    let d = universe.d() as usize;
    let mut out = HbarSeries::zero(universe, order);
    for k in 0..=order as u32 {
        for alpha in exponent_vectors(d, k) {
            let mut df = f.clone();
            let mut dg = g.clone();
            for (i, &e) in alpha.iter().enumerate() {
                if e > 0 {
                    df = df.map(|p| p.diff(Var::xi(i as u32 + 1), e));
                    dg = dg.map(|p| p.diff(Var::x(i as u32 + 1), e));
                }
            }
            if df.is_zero() || dg.is_zero() {
                continue;
            }
            let alpha_fact = GaussianRational::from_real(
                alpha.iter().map(|&e| factorial(e)).product::<BigRational>().recip(),
            );
            let term = df
                .mul(&dg)
                .scale(&(&minus_i_pow(k) * &alpha_fact))
                .shift_up(k as usize)
                .padded(order)
                .truncated(order);
            out = out.add(&term);
        }
    }
    out
}

/// An operator written as `Op(hbar^{-shift} * symbol)`: the one-pole
/// Laurent window needed for generators like `Op((i/hbar) J)`.
#[derive(Clone, Debug)]
pub struct SymbolOperator {
    shift: usize,
    symbol: HbarSeries,
}

impl SymbolOperator {
    pub fn new(shift: usize, symbol: HbarSeries) -> Self {
        let mut op = SymbolOperator { shift, symbol };
        op.normalize();
        op
    }

    pub fn from_symbol(symbol: HbarSeries) -> Self {
        Self::new(0, symbol)
    }

    fn normalize(&mut self) {
        if self.symbol.is_zero() {
            self.shift = 0;
            return;
        }
        while self.shift > 0 && self.symbol.coeff(0).is_zero() {
            self.symbol = self.symbol.shift_down(1).expect("constant term checked zero");
            self.shift -= 1;
        }
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn symbol(&self) -> &HbarSeries {
        &self.symbol
    }

    /// Applies the operator; fails if the result would have a genuine
    /// `hbar` pole.
    pub fn apply(&self, psi: &HbarSeries) -> Result<HbarSeries, QuantizeError> {
        Ok(op_apply(&self.symbol, psi)?.shift_down(self.shift)?)
    }
}

impl PartialEq for SymbolOperator {
    fn eq(&self, other: &Self) -> bool {
        if self.shift != other.shift {
            return false;
        }
        let order = self.symbol.order().min(other.symbol.order());
        self.symbol.truncated(order) == other.symbol.truncated(order)
    }
}

impl Eq for SymbolOperator {}

fn monomial_poly(universe: VarUniverse, gamma: &[u32]) -> MultiPoly {
    let factors: Vec<(Var, u32)> = gamma
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e > 0)
        .map(|(i, &e)| (Var::x(i as u32 + 1), e))
        .collect();
    MultiPoly::from_terms(
        universe,
        [(Monomial::from_factors(&factors), GaussianRational::one())],
    )
}

/// All exponent vectors of length `d` with the given total degree.
fn exponent_vectors(d: usize, total: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; d];
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
    }
    if d == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, total, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::canonical_poisson;
    use crate::parse::parse_poly;

    fn series(src: &str, u: VarUniverse, order: usize) -> HbarSeries {
        HbarSeries::from_poly(parse_poly(src, u).unwrap(), order)
    }

    #[test]
    fn operator_action_basics() {
        let u = VarUniverse::new(2, 1);
        let psi = series("x1^2*x2", u, 2);
        // Op(1) is the identity.
        assert_eq!(op_apply(&series("1", u, 2), &psi).unwrap(), psi);
        // Op(xi1) = (hbar/i) d/dx1.
        let got = op_apply(&series("xi1", u, 2), &psi).unwrap();
        assert!(got.coeff(0).is_zero());
        assert_eq!(got.coeff(1), &parse_poly("-2*i*x1*x2", u).unwrap());
        // Op(x1 xi1): coefficient stays on the left; on monomials this is
        // plain multiplication after differentiation.
        let got = op_apply(&series("x1*xi1", u, 2), &psi).unwrap();
        assert_eq!(got.coeff(1), &parse_poly("-2*i*x1^2*x2", u).unwrap());
        // Mixed second derivative with both variables.
        let got = op_apply(&series("xi1*xi2", u, 2), &psi).unwrap();
        assert_eq!(got.coeff(2), &parse_poly("-2*x1", u).unwrap());
        // Operands with xi are rejected.
        assert!(matches!(
            op_apply(&series("1", u, 2), &series("xi1", u, 2)),
            Err(QuantizeError::OperandDependsOnXi)
        ));
    }

    #[test]
    fn symbol_round_trip() {
        let u = VarUniverse::new(2, 1);
        for src in [
            "1",
            "xi1",
            "x1*xi1",
            "x1^2*xi1^3 + 3*xi2 - 7",
            "i*x2*xi1*xi2 + x1^5",
        ] {
            let f = series(src, u, 3);
            let got = symbol_extract(|psi| op_apply(&f, &HbarSeries::from_poly(psi.clone(), 3)), u, 4, 3)
                .unwrap();
            assert_eq!(got, f.truncated(3), "symbol {src}");
        }
        // A symbol with genuine hbar structure: its hbar^1 xi^2 part only
        // shows up at hbar^3 in the action, so the order must cover that.
        let f = HbarSeries::from_coeffs(vec![
            parse_poly("x1*xi1", u).unwrap(),
            parse_poly("xi2^2", u).unwrap(),
        ]);
        let got = symbol_extract(|psi| op_apply(&f, &HbarSeries::from_poly(psi.clone(), 3)), u, 3, 3)
            .unwrap();
        assert_eq!(got, f.padded(3));
    }

    #[test]
    fn extraction_failure_modes() {
        let u = VarUniverse::new(1, 1);
        // Action is a second-order operator; claiming xi-degree <= 1 must
        // fail on the degree-2 consistency monomials.
        let f = series("xi1^2", u, 3);
        let err = symbol_extract(
            |psi| op_apply(&f, &HbarSeries::from_poly(psi.clone(), 3)),
            u,
            1,
            3,
        );
        assert!(matches!(err, Err(QuantizeError::SymbolInconsistent(_, 1))));
        // A bare derivative without its hbar has no symbol.
        let err = symbol_extract(
            |psi| {
                Ok(HbarSeries::from_poly(psi.diff(Var::x(1), 1), 2))
            },
            u,
            2,
            2,
        );
        assert!(matches!(err, Err(QuantizeError::NotDivisible(_))));
    }

    #[test]
    fn standard_product_anchors() {
        let u = VarUniverse::new(1, 1);
        // xi1 * x1 picks up the derivative correction hbar/i = -i hbar.
        let got = star_standard(&series("xi1", u, 2), &series("x1", u, 2), 2);
        assert_eq!(got.coeff(0), &parse_poly("x1*xi1", u).unwrap());
        assert_eq!(got.coeff(1), &parse_poly("-i", u).unwrap());
        // The opposite order is the plain product.
        let got = star_standard(&series("x1", u, 2), &series("xi1", u, 2), 2);
        assert_eq!(got.coeff(0), &parse_poly("x1*xi1", u).unwrap());
        assert!(got.coeff(1).is_zero());
        // Symbols depending only on xi multiply pointwise.
        let got = star_standard(&series("xi1^2", u, 3), &series("xi1^3 + 1", u, 3), 3);
        assert_eq!(got.coeff(0), &parse_poly("xi1^5 + xi1^2", u).unwrap());
        assert!(got.coeff(1).is_zero() && got.coeff(2).is_zero());
        // Unitality both ways.
        let f = series("x1^2*xi1^2 + i*x1", u, 2);
        assert_eq!(star_standard(&f, &series("1", u, 2), 2), f);
        assert_eq!(star_standard(&series("1", u, 2), &f, 2), f);
    }

    #[test]
    fn standard_product_matches_operator_composition() {
        let u = VarUniverse::new(2, 1);
        let pairs = [
            ("xi1^2*x2", "x1*xi2"),
            ("x1*x2*xi1", "xi1*xi2 + x2^2"),
            ("xi1^3", "x1^3"),
        ];
        for (fs, gs) in pairs {
            let f = series(fs, u, 3);
            let g = series(gs, u, 3);
            let closed = star_standard(&f, &g, 3);
            let composed = symbol_extract(
                |psi| {
                    let inner = op_apply(&g, &HbarSeries::from_poly(psi.clone(), 3))?;
                    op_apply(&f, &inner)
                },
                u,
                6,
                3,
            )
            .unwrap();
            assert_eq!(closed, composed, "pair ({fs}, {gs})");
        }
    }

    #[test]
    fn standard_product_associativity() {
        let u = VarUniverse::new(2, 1);
        let triples = [
            ("x1*xi1", "x2*xi2 + x1", "xi1*xi2"),
            ("xi1^2", "x1^2", "x1*xi1"),
        ];
        for (a, b, c) in triples {
            let (a, b, c) = (series(a, u, 3), series(b, u, 3), series(c, u, 3));
            let left = star_standard(&star_standard(&a, &b, 3), &c, 3);
            let right = star_standard(&a, &star_standard(&b, &c, 3), 3);
            assert_eq!(left, right);
        }
    }

    #[test]
    fn commutator_leading_term_is_poisson_bracket() {
        let u = VarUniverse::new(2, 1);
        let pairs = [("x1^2*xi1", "x1*xi1*xi2"), ("xi1*xi2", "x1*x2"), ("x2*xi1^2", "x1^3*xi2")];
        for (fs, gs) in pairs {
            let f = series(fs, u, 3);
            let g = series(gs, u, 3);
            let comm = star_standard(&f, &g, 3).sub(&star_standard(&g, &f, 3));
            let scaled = comm.shift_down(1).unwrap().scale(&GaussianRational::i());
            let pb = canonical_poisson(f.coeff(0), g.coeff(0)).unwrap();
            assert_eq!(scaled.coeff(0), &pb, "pair ({fs}, {gs})");
        }
    }

    #[test]
    fn symbol_operator_normalization() {
        let u = VarUniverse::new(1, 1);
        // hbar^{-1} * (hbar * xi1) normalizes to shift 0.
        let lifted = series("xi1", u, 2).shift_up(1);
        let a = SymbolOperator::new(1, lifted);
        let b = SymbolOperator::from_symbol(series("xi1", u, 1));
        assert_eq!(a.shift(), 0);
        assert_eq!(a, b);
        // A genuine pole stays: Op(hbar^{-1} i xi1) = derivative operator.
        let gen = SymbolOperator::new(1, series("i*xi1", u, 2));
        assert_eq!(gen.shift(), 1);
        let psi = series("x1^2", u, 2);
        let applied = gen.apply(&psi).unwrap();
        assert_eq!(applied.coeff(0), &parse_poly("2*x1", u).unwrap());
        // Applying a pole to a constant fails the divisibility check.
        let bad = SymbolOperator::new(1, series("x1", u, 2));
        assert!(bad.apply(&psi).is_err());
    }
}
