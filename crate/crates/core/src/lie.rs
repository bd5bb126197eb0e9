//! Finite-dimensional Lie algebras given by exact structure constants.
//!
//! Provides the bracket on polynomial-coefficient vectors, the truncated
//! Baker-Campbell-Hausdorff series (computed from `log(exp a * exp b)` in
//! the free associative algebra and projected onto brackets), the
//! Kirillov-Kostant Poisson bracket on the dual, and Casimir detection.

use crate::parse::parse_scalar;
use crate::poly::{Monomial, MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::vars::{Var, VarUniverse};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("structure constants violate antisymmetry at (i,j,k)=({0},{1},{2})")]
    Antisymmetry(usize, usize, usize),
    #[error("structure constants violate the Jacobi identity at (i,j,k -> l)=({0},{1},{2} -> {3})")]
    Jacobi(usize, usize, usize, usize),
    #[error("structure constant index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("conflicting duplicate structure entry for (i,j)=({0},{1})")]
    DuplicateEntry(usize, usize),
    #[error("vector has {0} components, algebra has dimension {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid scalar '{0}': {1}")]
    BadScalar(String, String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A Lie algebra of dimension `n` with structure constants
/// `[e_i, e_j] = sum_k c[i][j][k] e_k` (all indices 0-based internally).
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<Vec<Vec<GaussianRational>>>,
}

/// JSON form: 1-based indices, scalars as constant expressions.
#[derive(Debug, Deserialize)]
pub struct AlgebraSpec {
    pub dim: usize,
    #[serde(default)]
    pub structure: Vec<StructureEntry>,
}

#[derive(Debug, Deserialize)]
pub struct StructureEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, String>,
}

impl LieAlgebra {
    /// Validates antisymmetry and the Jacobi identity exactly.
    pub fn new(dim: usize, c: Vec<Vec<Vec<GaussianRational>>>) -> Result<Self, LieError> {
        assert_eq!(c.len(), dim);
        for plane in &c {
            assert_eq!(plane.len(), dim);
            for row in plane {
                assert_eq!(row.len(), dim);
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if !(&c[i][j][k] + &c[j][i][k]).is_zero() {
                        return Err(LieError::Antisymmetry(i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        // [[e_i, e_j], e_k] + [[e_j, e_k], e_i] + [[e_k, e_i], e_j] = 0
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let mut s = GaussianRational::zero();
                        for m in 0..dim {
                            s += &(&c[i][j][m] * &c[m][k][l]);
                            s += &(&c[j][k][m] * &c[m][i][l]);
                            s += &(&c[k][i][m] * &c[m][j][l]);
                        }
                        if !s.is_zero() {
                            return Err(LieError::Jacobi(i + 1, j + 1, k + 1, l + 1));
                        }
                    }
                }
            }
        }
        Ok(LieAlgebra { dim, c })
    }

    pub fn abelian(dim: usize) -> Self {
        let zero = GaussianRational::zero();
        LieAlgebra { dim, c: vec![vec![vec![zero; dim]; dim]; dim] }
    }

    /// so(3): [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2.
    pub fn so3() -> Self {
        let mut c = vec![vec![vec![GaussianRational::zero(); 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[i][j][k] = GaussianRational::one();
            c[j][i][k] = -GaussianRational::one();
        }
        LieAlgebra { dim: 3, c }
    }

    /// Heisenberg: [e1,e2]=e3, e3 central.
    pub fn heisenberg() -> Self {
        let mut c = vec![vec![vec![GaussianRational::zero(); 3]; 3]; 3];
        c[0][1][2] = GaussianRational::one();
        c[1][0][2] = -GaussianRational::one();
        LieAlgebra { dim: 3, c }
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<Self, LieError> {
        let n = spec.dim;
        let mut c = vec![vec![vec![GaussianRational::zero(); n]; n]; n];
        let mut seen = vec![vec![false; n]; n];
        let check = |idx: usize| -> Result<usize, LieError> {
            if idx >= 1 && idx <= n {
                Ok(idx - 1)
            } else {
                Err(LieError::IndexOutOfRange(idx, n))
            }
        };
        for entry in &spec.structure {
            let i = check(entry.i)?;
            let j = check(entry.j)?;
            if seen[i][j] {
                return Err(LieError::DuplicateEntry(entry.i, entry.j));
            }
            seen[i][j] = true;
            for (k_str, val) in &entry.coeffs {
                let k = check(k_str.parse::<usize>().map_err(|e| {
                    LieError::BadScalar(k_str.clone(), e.to_string())
                })?)?;
                let scalar = parse_scalar(val)
                    .map_err(|e| LieError::BadScalar(val.clone(), e.to_string()))?;
                c[i][j][k] = scalar;
            }
        }
        // Fill unstated mirror entries by antisymmetry; stated ones must match.
        for i in 0..n {
            for j in 0..n {
                if seen[i][j] && !seen[j][i] {
                    for k in 0..n {
                        c[j][i][k] = -&c[i][j][k];
                    }
                }
            }
        }
        Self::new(n, c)
    }

    pub fn from_json(src: &str) -> Result<Self, LieError> {
        let spec: AlgebraSpec = serde_json::from_str(src)
            .map_err(|e| LieError::BadScalar(String::new(), e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> &GaussianRational {
        &self.c[i][j][k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c
            .iter()
            .all(|p| p.iter().all(|r| r.iter().all(GaussianRational::is_zero)))
    }

    /// Bracket of polynomial-coefficient vectors.
    pub fn bracket(&self, v: &[MultiPoly], w: &[MultiPoly]) -> Result<Vec<MultiPoly>, LieError> {
        if v.len() != self.dim {
            return Err(LieError::DimensionMismatch(v.len(), self.dim));
        }
        if w.len() != self.dim {
            return Err(LieError::DimensionMismatch(w.len(), self.dim));
        }
        let universe = *v[0].universe();
        let mut out = vec![MultiPoly::zero(universe); self.dim];
        for i in 0..self.dim {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if w[j].is_zero() {
                    continue;
                }
                let prod = v[i].checked_mul(&w[j])?;
                for (k, out_k) in out.iter_mut().enumerate() {
                    let cijk = &self.c[i][j][k];
                    if !cijk.is_zero() {
                        *out_k = out_k.checked_add(&prod.scale(cijk))?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Basis vector `e_i` (0-based) as a constant-coefficient vector.
    pub fn basis_vector(&self, universe: VarUniverse, i: usize) -> Vec<MultiPoly> {
        let mut v = vec![MultiPoly::zero(universe); self.dim];
        v[i] = MultiPoly::one(universe);
        v
    }

    /// The generic vector of a `v` block: components `(v_{b*n+1}, ..., v_{b*n+n})`.
    pub fn generic_vector(
        &self,
        universe: VarUniverse,
        block: u32,
    ) -> Result<Vec<MultiPoly>, LieError> {
        (1..=self.dim as u32)
            .map(|i| {
                MultiPoly::var(universe, universe.v_in_block(block, i)).map_err(LieError::from)
            })
            .collect()
    }

    /// Kirillov-Kostant Poisson bracket on polynomial functions of `th`:
    /// `{f,g} = sum_{ijk} c_ij^k th_k (df/dth_i)(dg/dth_j)`.
    pub fn kk_poisson(&self, f: &MultiPoly, g: &MultiPoly) -> Result<MultiPoly, LieError> {
        f.check_universe(g)?;
        let universe = *f.universe();
        let mut out = MultiPoly::zero(universe);
        for i in 0..self.dim {
            let fi = f.diff(Var::th(i as u32 + 1), 1);
            if fi.is_zero() {
                continue;
            }
            for j in 0..self.dim {
                let gj = g.diff(Var::th(j as u32 + 1), 1);
                if gj.is_zero() {
                    continue;
                }
                for k in 0..self.dim {
                    let cijk = &self.c[i][j][k];
                    if cijk.is_zero() {
                        continue;
                    }
                    let thk = MultiPoly::var(universe, Var::th(k as u32 + 1))?;
                    out = out.checked_add(&fi.checked_mul(&gj)?.checked_mul(&thk)?.scale(cijk))?;
                }
            }
        }
        Ok(out)
    }

    /// The brackets `{th_i, f}` for every basis coordinate; `f` is a Casimir
    /// of the Kirillov-Kostant structure iff all residuals vanish.
    pub fn casimir_residuals(&self, f: &MultiPoly) -> Result<Vec<MultiPoly>, LieError> {
        let universe = *f.universe();
        (0..self.dim)
            .map(|i| {
                let thi = MultiPoly::var(universe, Var::th(i as u32 + 1))?;
                self.kk_poisson(&thi, f)
            })
            .collect()
    }

    pub fn is_casimir(&self, f: &MultiPoly) -> Result<bool, LieError> {
        Ok(self.casimir_residuals(f)?.iter().all(MultiPoly::is_zero))
    }

    /// Exact basis of the Casimir polynomials of degree between 1 and
    /// `max_deg`: the kernel of `f -> ({th_1, f}, ..., {th_n, f})` on the
    /// span of non-constant dual monomials, found by row reduction.
    pub fn casimir_basis(
        &self,
        universe: VarUniverse,
        max_deg: u32,
    ) -> Result<Vec<MultiPoly>, LieError> {
        let span = dual_monomials(self.dim, 1, max_deg);
        // Column j = bracket coefficients of span monomial j, stacked over
        // all generators and all result monomials.
        let mut result_monos: std::collections::BTreeSet<(usize, Monomial)> =
            std::collections::BTreeSet::new();
        let mut columns: Vec<Vec<(usize, Monomial, GaussianRational)>> = Vec::new();
        for mono in &span {
            let f = MultiPoly::from_terms(
                universe,
                [(mono.clone(), GaussianRational::one())],
            );
            let mut col = Vec::new();
            for i in 0..self.dim {
                let thi = MultiPoly::var(universe, Var::th(i as u32 + 1))?;
                let res = self.kk_poisson(&thi, &f)?;
                for (m, c) in res.terms() {
                    result_monos.insert((i, m.clone()));
                    col.push((i, m.clone(), c.clone()));
                }
            }
            columns.push(col);
        }
        let row_index: std::collections::BTreeMap<(usize, Monomial), usize> = result_monos
            .into_iter()
            .enumerate()
            .map(|(r, key)| (key, r))
            .collect();
        let mut matrix = crate::linalg::Matrix::zero(row_index.len().max(1), span.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, m, c) in col {
                let r = row_index[&(*i, m.clone())];
                *matrix.at_mut(r, j) = c.clone();
            }
        }
        let mut basis = Vec::new();
        for vec in matrix.kernel_basis() {
            let combo = MultiPoly::from_terms(
                universe,
                span.iter().cloned().zip(vec.into_iter()).filter(|(_, c)| !c.is_zero()),
            );
            basis.push(combo);
        }
        Ok(basis)
    }
}

/// All monomials in `th_1..th_n` with total degree in `[min_deg, max_deg]`.
pub fn dual_monomials(n: usize, min_deg: u32, max_deg: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    // Exponent vectors in lexicographic generation order.
    fn rec(n: usize, i: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            out.push(current.clone());
            return;
        }
        for e in 0..=left {
            current.push(e);
            rec(n, i + 1, left - e, current, out);
            current.pop();
        }
    }
    for deg in min_deg..=max_deg {
        let mut exps = Vec::new();
        rec(n, 0, deg, &mut Vec::new(), &mut exps);
        for e in exps {
            if e.iter().sum::<u32>() != deg {
                continue;
            }
            let factors: Vec<(Var, u32)> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| (Var::th(i as u32 + 1), x))
                .collect();
            out.push(Monomial::from_factors(&factors));
        }
    }
    out
}

// ---- Baker-Campbell-Hausdorff ----

/// Element of the free associative algebra on two letters, truncated by
/// word length; coefficients are plain rationals.
type FreeSeries = BTreeMap<Vec<u8>, BigRational>;

fn free_add_term(s: &mut FreeSeries, word: Vec<u8>, coeff: BigRational) {
    if coeff.is_zero() {
        return;
    }
    let entry = s.entry(word).or_insert_with(BigRational::zero);
    *entry += coeff;
    if entry.is_zero() {
        // Re-borrow to remove; cheap because words are short.
        let dead: Vec<Vec<u8>> = s
            .iter()
            .filter(|(_, c)| c.is_zero())
            .map(|(w, _)| w.clone())
            .collect();
        for w in dead {
            s.remove(&w);
        }
    }
}

fn free_mul(a: &FreeSeries, b: &FreeSeries, max_len: usize) -> FreeSeries {
    let mut out = FreeSeries::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            if wa.len() + wb.len() > max_len {
                continue;
            }
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            free_add_term(&mut out, w, ca * cb);
        }
    }
    out
}

fn free_exp_letter(letter: u8, max_len: usize) -> FreeSeries {
    let mut out = FreeSeries::new();
    let mut fact = BigRational::one();
    for k in 0..=max_len {
        if k > 0 {
            fact /= BigRational::from_integer(BigInt::from(k as i64));
        }
        out.insert(vec![letter; k], fact.clone());
    }
    out
}

/// `log(s)` for `s = 1 + u` with `u` having no constant term.
fn free_log(s: &FreeSeries, max_len: usize) -> FreeSeries {
    let mut u = s.clone();
    u.remove(&Vec::new());
    let mut out = FreeSeries::new();
    let mut power = FreeSeries::new();
    power.insert(Vec::new(), BigRational::one());
    for k in 1..=max_len {
        power = free_mul(&power, &u, max_len);
        let sign = if k % 2 == 1 { BigRational::one() } else { -BigRational::one() };
        let coeff = sign / BigRational::from_integer(BigInt::from(k as i64));
        for (w, c) in &power {
            free_add_term(&mut out, w.clone(), c * &coeff);
        }
    }
    out
}

/// Truncated BCH series `bch(v, w)` with `exp(bch(v,w)) = exp(v) exp(w)`
/// up to total bracket order `order`, evaluated in `algebra` on
/// polynomial-coefficient vectors.
///
/// Each word of the free-algebra logarithm is projected to a Lie element by
/// the first-letter-nested bracketing `w_1 w_2 ... w_m -> [w_1, [w_2, [...,
/// w_m]]] / m`, which is the identity on homogeneous Lie elements.
pub fn bch(
    algebra: &LieAlgebra,
    v: &[MultiPoly],
    w: &[MultiPoly],
    order: usize,
) -> Result<Vec<MultiPoly>, LieError> {
    if v.len() != algebra.dim() {
        return Err(LieError::DimensionMismatch(v.len(), algebra.dim()));
    }
    if w.len() != algebra.dim() {
        return Err(LieError::DimensionMismatch(w.len(), algebra.dim()));
    }
    let universe = *v[0].universe();
    let log = if algebra.is_abelian() {
        // log(exp v exp w) = v + w; skip the free-algebra work.
        let mut s = FreeSeries::new();
        s.insert(vec![0], BigRational::one());
        s.insert(vec![1], BigRational::one());
        s
    } else {
        let ea = free_exp_letter(0, order);
        let eb = free_exp_letter(1, order);
        free_log(&free_mul(&ea, &eb, order), order)
    };
    let gens = [v, w];
    let mut out = vec![MultiPoly::zero(universe); algebra.dim()];
    for (word, coeff) in &log {
        let m = word.len();
        if m == 0 || coeff.is_zero() {
            continue;
        }
        let mut acc: Vec<MultiPoly> = gens[word[m - 1] as usize].to_vec();
        let mut dead = false;
        for &letter in word[..m - 1].iter().rev() {
            acc = algebra.bracket(gens[letter as usize], &acc)?;
            if acc.iter().all(MultiPoly::is_zero) {
                dead = true;
                break;
            }
        }
        if dead {
            continue;
        }
        let scalar = GaussianRational::from_real(
            coeff / BigRational::from_integer(BigInt::from(m as i64)),
        );
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = o.checked_add(&a.scale(&scalar))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn u() -> VarUniverse {
        VarUniverse::with_vblocks(0, 3, 2)
    }

    fn c(k: i64) -> MultiPoly {
        MultiPoly::constant(u(), GaussianRational::from_int(k))
    }

    #[test]
    fn structure_validation() {
        assert!(LieAlgebra::so3().is_abelian() == false);
        // Break Jacobi: [e1,e2]=e1, [e1,e3]=e2 gives
        // [[e1,e2],e3]+[[e2,e3],e1]+[[e3,e1],e2] = [e1,e3] = e2 != 0.
        let mut c = vec![vec![vec![GaussianRational::zero(); 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 0), (0, 2, 1)] {
            c[i][j][k] = GaussianRational::one();
            c[j][i][k] = -GaussianRational::one();
        }
        assert!(matches!(LieAlgebra::new(3, c), Err(LieError::Jacobi(..))));
        // Break antisymmetry.
        let mut c = vec![vec![vec![GaussianRational::zero(); 2]; 2]; 2];
        c[0][1][0] = GaussianRational::one();
        assert!(matches!(LieAlgebra::new(2, c), Err(LieError::Antisymmetry(..))));
    }

    #[test]
    fn json_loading() {
        let src = r#"{"dim": 3, "structure": [
            {"i": 1, "j": 2, "coeffs": {"3": "1"}},
            {"i": 2, "j": 3, "coeffs": {"1": "1"}},
            {"i": 3, "j": 1, "coeffs": {"2": "1"}}
        ]}"#;
        let alg = LieAlgebra::from_json(src).unwrap();
        assert_eq!(alg, LieAlgebra::so3());
        let bad = r#"{"dim": 2, "structure": [{"i": 1, "j": 2, "coeffs": {"5": "1"}}]}"#;
        assert!(matches!(LieAlgebra::from_json(bad), Err(LieError::IndexOutOfRange(5, 2))));
    }

    #[test]
    fn brackets() {
        let alg = LieAlgebra::so3();
        let e1 = alg.basis_vector(u(), 0);
        let e2 = alg.basis_vector(u(), 1);
        let b = alg.bracket(&e1, &e2).unwrap();
        assert_eq!(b, alg.basis_vector(u(), 2));
        // [v, v] = 0 for the generic vector.
        let v = alg.generic_vector(u(), 0).unwrap();
        assert!(alg.bracket(&v, &v).unwrap().iter().all(MultiPoly::is_zero));
        // Heisenberg: [e1,e2]=e3 central.
        let h = LieAlgebra::heisenberg();
        let b = h.bracket(&h.basis_vector(u(), 0), &h.basis_vector(u(), 1)).unwrap();
        assert_eq!(b, h.basis_vector(u(), 2));
        assert!(h
            .bracket(&h.basis_vector(u(), 2), &h.basis_vector(u(), 0))
            .unwrap()
            .iter()
            .all(MultiPoly::is_zero));
    }

    /// Independent oracle: the closed bracket formula for BCH through
    /// third order, `v + w + [v,w]/2 + [v,[v,w]]/12 + [w,[w,v]]/12`.
    fn bch3_oracle(alg: &LieAlgebra, v: &[MultiPoly], w: &[MultiPoly]) -> Vec<MultiPoly> {
        let half = GaussianRational::from_ratio(1, 2);
        let twelfth = GaussianRational::from_ratio(1, 12);
        let vw = alg.bracket(v, w).unwrap();
        let vvw = alg.bracket(v, &vw).unwrap();
        let wv = alg.bracket(w, v).unwrap();
        let wwv = alg.bracket(w, &wv).unwrap();
        (0..alg.dim())
            .map(|k| {
                v[k].add(&w[k])
                    .add(&vw[k].scale(&half))
                    .add(&vvw[k].scale(&twelfth))
                    .add(&wwv[k].scale(&twelfth))
            })
            .collect()
    }

    #[test]
    fn bch_matches_third_order_oracle() {
        for alg in [LieAlgebra::so3(), LieAlgebra::heisenberg()] {
            let v = alg.generic_vector(u(), 0).unwrap();
            let w = alg.generic_vector(u(), 1).unwrap();
            let got = bch(&alg, &v, &w, 3).unwrap();
            let want = bch3_oracle(&alg, &v, &w);
            assert_eq!(got, want, "order-3 BCH for dim-{} algebra", alg.dim());
        }
    }

    #[test]
    fn bch_abelian_is_addition() {
        let alg = LieAlgebra::abelian(3);
        let v = alg.generic_vector(u(), 0).unwrap();
        let w = alg.generic_vector(u(), 1).unwrap();
        let got = bch(&alg, &v, &w, 5).unwrap();
        for k in 0..3 {
            assert_eq!(got[k], v[k].add(&w[k]));
        }
    }

    #[test]
    fn bch_heisenberg_closed_form() {
        // For the Heisenberg algebra the series terminates:
        // bch(v,w) = v + w + [v,w]/2.
        let alg = LieAlgebra::heisenberg();
        let v = alg.generic_vector(u(), 0).unwrap();
        let w = alg.generic_vector(u(), 1).unwrap();
        let got = bch(&alg, &v, &w, 6).unwrap();
        let vw = alg.bracket(&v, &w).unwrap();
        for k in 0..3 {
            let want = v[k].add(&w[k]).add(&vw[k].scale(&GaussianRational::from_ratio(1, 2)));
            assert_eq!(got[k], want);
        }
    }

    #[test]
    fn bch_unit_laws() {
        let alg = LieAlgebra::so3();
        let v = alg.generic_vector(u(), 0).unwrap();
        let zero = vec![MultiPoly::zero(u()); 3];
        assert_eq!(bch(&alg, &v, &zero, 4).unwrap(), v);
        assert_eq!(bch(&alg, &zero, &v, 4).unwrap(), v);
        // bch(v, -v) = 0.
        let neg: Vec<MultiPoly> = v.iter().map(MultiPoly::neg).collect();
        let z = bch(&alg, &v, &neg, 4).unwrap();
        for k in 0..3 {
            assert!(z[k].truncate_group_degree(4).is_zero());
        }
    }

    #[test]
    fn casimir_basis_detection() {
        // so(3), degree <= 2: only the quadratic invariant survives.
        let alg = LieAlgebra::so3();
        let basis = alg.casimir_basis(u(), 2).unwrap();
        assert_eq!(basis.len(), 1);
        let cas = parse_poly("th1^2+th2^2+th3^2", u()).unwrap();
        // Kernel vector is a scalar multiple of the invariant.
        let b = &basis[0];
        let ratio = b.coeff(cas.terms().next().unwrap().0);
        assert!(!ratio.is_zero());
        assert_eq!(b, &cas.scale(&ratio));
        // Heisenberg, degree 1: the center coordinate.
        let h = LieAlgebra::heisenberg();
        let basis = h.casimir_basis(u(), 1).unwrap();
        assert_eq!(basis.len(), 1);
        assert!(h.is_casimir(&basis[0]).unwrap());
        assert_eq!(basis[0].total_degree(), 1);
    }

    #[test]
    fn kk_poisson_and_casimirs() {
        let alg = LieAlgebra::so3();
        let th = |i: u32| MultiPoly::var(u(), Var::th(i)).unwrap();
        // {th1, th2} = th3 for so(3).
        assert_eq!(alg.kk_poisson(&th(1), &th(2)).unwrap(), th(3));
        // th1^2+th2^2+th3^2 is the classic Casimir.
        let cas = parse_poly("th1^2+th2^2+th3^2", u()).unwrap();
        assert!(alg.is_casimir(&cas).unwrap());
        assert!(!alg.is_casimir(&th(1)).unwrap());
        let residuals = alg.casimir_residuals(&th(1)).unwrap();
        assert_eq!(residuals[1], th(3).neg());
        // Heisenberg: the center coordinate is a Casimir.
        let h = LieAlgebra::heisenberg();
        assert!(h.is_casimir(&th(3)).unwrap());
        let _ = c(0);
    }
}
