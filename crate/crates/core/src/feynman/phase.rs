//! Phase models: everything the expansion needs about one oscillatory
//! integral, reduced to exact data at the critical point.
//!
//! A model fixes the integration variables `z`, the inverse Hessian
//! (propagator) `B^{-1}` of the phase at its critical point, the cubic and
//! higher fluctuation phase `s_rest` (whose derivatives at `z = 0` are the
//! internal vertex tensors), and the external insertions with their
//! critical-point evaluations.
//!
//! Two constructors are provided.  `from_generating` handles phases of the
//! split form `S = W(p) - <q, p>` with primal block `p` and dual block
//! `q`: the critical point is `p = 0`, `q = dW(0)`, the Hessian is the
//! block matrix `[[K, -I], [-I, 0]]` with `K = d^2 W(0)`, and its exact
//! inverse `[[0, -I], [-I, -K]]` is verified by multiplication.  Such
//! Hessians always have `|det| = 1` and signature `0` (they deform to a
//! direct sum of hyperbolic planes without losing invertibility), so the
//! scalar stationary-phase prefactor is exactly `1`.  `from_hessian`
//! accepts an explicit constant Hessian for hand-built test phases and
//! checks `|det| = 1` and signature `0` directly.

use crate::linalg::{poly_det, Matrix};
use crate::poly::{MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::series::HbarSeries;
use crate::vars::{Var, VarUniverse};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("integration variable {0} appears twice")]
    DuplicateVariable(Var),
    #[error("generating function may only depend on primal variables and parameters, found {0}")]
    GeneratingUsesDual(Var),
    #[error("primal and dual blocks differ in length: {0} vs {1}")]
    BlockMismatch(usize, usize),
    #[error("Hessian is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("Hessian must have constant entries for the direct constructor; entry ({0},{1}) is {2}")]
    NonConstantHessian(usize, usize, String),
    #[error("stationary-phase prefactor is not 1: |det B| = {det}, signature = {signature}")]
    BadPrefactor { det: String, signature: i64 },
    #[error("Hessian is singular")]
    Singular,
    #[error("inverse Hessian verification failed at block ({0},{1})")]
    InverseCheck(usize, usize),
    #[error("fluctuation phase has a term of z-degree {0} < 3: {1}")]
    LowOrderTerm(u32, String),
    #[error("external insertion depends on undeclared integration variable {0}")]
    ExternalSupport(Var),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One external insertion: a polynomial (or series of polynomials) in a
/// declared subset of the integration variables, together with the
/// substitution evaluating those variables at the critical point.
#[derive(Clone, Debug)]
pub struct ExternalFn {
    f: HbarSeries,
    vars: Vec<Var>,
    eval: BTreeMap<Var, MultiPoly>,
}

impl ExternalFn {
    pub fn series(f: HbarSeries, vars: Vec<Var>, eval: BTreeMap<Var, MultiPoly>) -> Self {
        ExternalFn { f, vars, eval }
    }

    pub fn poly(f: MultiPoly, vars: Vec<Var>, eval: BTreeMap<Var, MultiPoly>) -> Self {
        ExternalFn { f: HbarSeries::from_poly(f, 0), vars, eval }
    }

    pub fn support(&self) -> &[Var] {
        &self.vars
    }

    /// Maximum exponent of `v` anywhere in the series; derivative tensors
    /// of higher order vanish.
    pub fn max_degree(&self, v: Var) -> u32 {
        self.f.coeffs().iter().map(|c| c.degree_of(v)).max().unwrap_or(0)
    }

    /// `d^beta f` evaluated at the critical point, padded or truncated to
    /// the requested series order.  `beta` lists variables with
    /// multiplicity.
    pub fn tensor(&self, beta: &[Var], order: usize) -> Result<HbarSeries, PolyError> {
        let mut out = Vec::with_capacity(self.f.coeffs().len());
        for coeff in self.f.coeffs() {
            let mut d = coeff.clone();
            for &v in beta {
                d = d.diff(v, 1);
                if d.is_zero() {
                    break;
                }
            }
            out.push(d.substitute(&self.eval)?);
        }
        Ok(HbarSeries::from_coeffs(out).padded(order).truncated(order))
    }
}

/// Exact phase data at a single nondegenerate critical point.
#[derive(Clone, Debug)]
pub struct PhaseModel {
    universe: VarUniverse,
    zvars: Vec<Var>,
    propagator: Vec<Vec<MultiPoly>>,
    s_rest: MultiPoly,
    externals: Vec<ExternalFn>,
    hyperbolic: bool,
    constant_phase: MultiPoly,
    critical_dual: Vec<MultiPoly>,
    primal_count: usize,
}

impl PhaseModel {
    /// Split-form constructor: `S = W(primal) - <dual, primal>`.
    pub fn from_generating(
        universe: VarUniverse,
        w: &MultiPoly,
        primal: Vec<Var>,
        dual: Vec<Var>,
        externals: Vec<ExternalFn>,
    ) -> Result<Self, PhaseError> {
        if primal.len() != dual.len() {
            return Err(PhaseError::BlockMismatch(primal.len(), dual.len()));
        }
        let m = primal.len();
        let mut seen = std::collections::BTreeSet::new();
        for &v in primal.iter().chain(dual.iter()) {
            if !seen.insert(v) {
                return Err(PhaseError::DuplicateVariable(v));
            }
        }
        for &v in &dual {
            if w.degree_of(v) > 0 {
                return Err(PhaseError::GeneratingUsesDual(v));
            }
        }
        let zero_primal: BTreeMap<Var, MultiPoly> =
            primal.iter().map(|&v| (v, MultiPoly::zero(universe))).collect();
        let constant_phase = w.substitute(&zero_primal)?;
        let mut critical_dual = Vec::with_capacity(m);
        for &v in &primal {
            critical_dual.push(w.diff(v, 1).substitute(&zero_primal)?);
        }
        let mut k_block = vec![vec![MultiPoly::zero(universe); m]; m];
        for (a, &va) in primal.iter().enumerate() {
            for (b, &vb) in primal.iter().enumerate() {
                k_block[a][b] = w.diff(va, 1).diff(vb, 1).substitute(&zero_primal)?;
            }
        }
        // Fluctuation remainder: primal-degree >= 3 terms of W.
        let s_rest = MultiPoly::from_terms(
            universe,
            w.terms().filter_map(|(mono, c)| {
                let deg: u32 = primal.iter().map(|&v| mono.degree_of(v)).sum();
                (deg >= 3).then(|| (mono.clone(), c.clone()))
            }),
        );
        // Propagator blocks: [[0, -I], [-I, -K]].
        let zdim = 2 * m;
        let mut propagator = vec![vec![MultiPoly::zero(universe); zdim]; zdim];
        let minus_one = MultiPoly::constant(universe, -GaussianRational::one());
        for a in 0..m {
            propagator[a][m + a] = minus_one.clone();
            propagator[m + a][a] = minus_one.clone();
            for b in 0..m {
                let v = k_block[a][b].neg();
                if !v.is_zero() {
                    propagator[m + a][m + b] = v;
                }
            }
        }
        let zvars: Vec<Var> = primal.iter().chain(dual.iter()).copied().collect();
        let model = PhaseModel {
            universe,
            zvars,
            propagator,
            s_rest,
            externals,
            hyperbolic: true,
            constant_phase,
            critical_dual,
            primal_count: m,
        };
        model.verify_inverse(&k_block)?;
        if zdim <= 6 {
            model.verify_unit_determinant(&k_block)?;
        }
        model.verify_externals()?;
        model.verify_low_order()?;
        Ok(model)
    }

    /// The same checked phase with different external insertions.  The
    /// propagator and fluctuation data are reused as verified; only the
    /// external-dependent validation runs again.
    pub fn with_externals(&self, externals: Vec<ExternalFn>) -> Result<Self, PhaseError> {
        let mut model = self.clone();
        model.externals = externals;
        model.verify_externals()?;
        Ok(model)
    }

    /// Direct constructor for hand-built phases with a constant Hessian.
    pub fn from_hessian(
        universe: VarUniverse,
        zvars: Vec<Var>,
        hessian: Vec<Vec<GaussianRational>>,
        s_rest: MultiPoly,
        externals: Vec<ExternalFn>,
    ) -> Result<Self, PhaseError> {
        let zdim = zvars.len();
        let mut seen = std::collections::BTreeSet::new();
        for &v in &zvars {
            if !seen.insert(v) {
                return Err(PhaseError::DuplicateVariable(v));
            }
        }
        assert_eq!(hessian.len(), zdim);
        for (i, row) in hessian.iter().enumerate() {
            assert_eq!(row.len(), zdim);
            for (j, entry) in row.iter().enumerate() {
                if !(entry - &hessian[j][i]).is_zero() {
                    return Err(PhaseError::NotSymmetric(i, j));
                }
            }
        }
        let b = Matrix::from_rows(hessian.clone());
        let det = b.det();
        let (pos, neg) = signature(&hessian).ok_or(PhaseError::Singular)?;
        let abs_one = det.im().is_zero()
            && (det.re().clone().abs() == num_rational::BigRational::from_integer(1.into()));
        if !abs_one || pos != neg {
            return Err(PhaseError::BadPrefactor {
                det: det.to_string(),
                signature: pos as i64 - neg as i64,
            });
        }
        let inv = invert(&b).ok_or(PhaseError::Singular)?;
        let propagator: Vec<Vec<MultiPoly>> = (0..zdim)
            .map(|i| {
                (0..zdim)
                    .map(|j| MultiPoly::constant(universe, inv.at(i, j).clone()))
                    .collect()
            })
            .collect();
        let model = PhaseModel {
            universe,
            zvars,
            propagator,
            s_rest,
            externals,
            hyperbolic: false,
            constant_phase: MultiPoly::zero(universe),
            critical_dual: Vec::new(),
            primal_count: zdim,
        };
        model.verify_externals()?;
        model.verify_low_order()?;
        Ok(model)
    }

    fn verify_inverse(&self, k_block: &[Vec<MultiPoly>]) -> Result<(), PhaseError> {
        let m = self.primal_count;
        let zdim = 2 * m;
        // B = [[K, -I], [-I, 0]] row-multiplied against the stored inverse.
        let entry = |i: usize, j: usize| -> MultiPoly {
            let universe = self.universe;
            if i < m && j < m {
                k_block[i][j].clone()
            } else if i < m && j - m == i {
                MultiPoly::constant(universe, -GaussianRational::one())
            } else if j < m && i - m == j && i >= m {
                MultiPoly::constant(universe, -GaussianRational::one())
            } else {
                MultiPoly::zero(universe)
            }
        };
        for i in 0..zdim {
            for j in 0..zdim {
                let mut sum = MultiPoly::zero(self.universe);
                for k in 0..zdim {
                    let e = entry(i, k);
                    if !e.is_zero() && !self.propagator[k][j].is_zero() {
                        sum = sum.checked_add(&e.checked_mul(&self.propagator[k][j])?)?;
                    }
                }
                let expect_one = i == j;
                if (expect_one && !sum.is_one()) || (!expect_one && !sum.is_zero()) {
                    return Err(PhaseError::InverseCheck(i, j));
                }
            }
        }
        Ok(())
    }

    /// Symbolic determinant of `[[K, -I], [-I, 0]]`: must be a unit
    /// constant.  Only for small blocks; the structural argument covers
    /// larger ones.
    fn verify_unit_determinant(&self, k_block: &[Vec<MultiPoly>]) -> Result<(), PhaseError> {
        let m = self.primal_count;
        let universe = self.universe;
        let zdim = 2 * m;
        let mut rows = vec![vec![MultiPoly::zero(universe); zdim]; zdim];
        for i in 0..m {
            for j in 0..m {
                rows[i][j] = k_block[i][j].clone();
            }
            rows[i][m + i] = MultiPoly::constant(universe, -GaussianRational::one());
            rows[m + i][i] = MultiPoly::constant(universe, -GaussianRational::one());
        }
        let det = poly_det(&rows);
        let ok = det.is_constant()
            && det.constant_term().im().is_zero()
            && det.constant_term().re().clone().abs()
                == num_rational::BigRational::from_integer(1.into());
        if !ok {
            return Err(PhaseError::BadPrefactor { det: det.to_string(), signature: 0 });
        }
        Ok(())
    }

    fn verify_externals(&self) -> Result<(), PhaseError> {
        for ext in &self.externals {
            for coeff in ext.f.coeffs() {
                for (mono, _) in coeff.terms() {
                    for &(v, _) in mono.factors() {
                        if self.zvars.contains(&v) && !ext.vars.contains(&v) {
                            return Err(PhaseError::ExternalSupport(v));
                        }
                    }
                }
            }
            for &v in &ext.vars {
                debug_assert!(self.zvars.contains(&v), "support var outside z block");
            }
        }
        Ok(())
    }

    fn verify_low_order(&self) -> Result<(), PhaseError> {
        for (mono, _) in self.s_rest.terms() {
            let deg: u32 = self.zvars.iter().map(|&v| mono.degree_of(v)).sum();
            if deg < 3 {
                return Err(PhaseError::LowOrderTerm(deg, mono.to_string()));
            }
        }
        Ok(())
    }

    pub fn universe(&self) -> VarUniverse {
        self.universe
    }

    pub fn zdim(&self) -> usize {
        self.zvars.len()
    }

    pub fn zvars(&self) -> &[Var] {
        &self.zvars
    }

    pub fn primal_count(&self) -> usize {
        self.primal_count
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.hyperbolic
    }

    pub fn propagator_entry(&self, i: usize, j: usize) -> &MultiPoly {
        &self.propagator[i][j]
    }

    pub fn externals(&self) -> &[ExternalFn] {
        &self.externals
    }

    /// Value of the phase at the critical point (an external-parameter
    /// polynomial; the caller decides how to interpret it).
    pub fn constant_phase(&self) -> &MultiPoly {
        &self.constant_phase
    }

    /// Critical values of the dual block (split-form models only).
    pub fn critical_dual(&self) -> &[MultiPoly] {
        &self.critical_dual
    }

    /// Maximum z-degree of the fluctuation phase: internal tensors of
    /// higher order vanish.
    pub fn max_vertex_order(&self) -> usize {
        self.s_rest
            .terms()
            .map(|(mono, _)| {
                self.zvars.iter().map(|&v| mono.degree_of(v)).sum::<u32>() as usize
            })
            .max()
            .unwrap_or(0)
    }

    /// `d^alpha S` at the critical point; `alpha` lists z-indices (into
    /// `zvars`) with multiplicity.
    pub fn s_tensor(&self, alpha: &[usize]) -> Result<MultiPoly, PolyError> {
        let mut d = self.s_rest.clone();
        for &i in alpha {
            d = d.diff(self.zvars[i], 1);
            if d.is_zero() {
                return Ok(d);
            }
        }
        let zero: BTreeMap<Var, MultiPoly> = self
            .zvars
            .iter()
            .map(|&v| (v, MultiPoly::zero(self.universe)))
            .collect();
        d.substitute(&zero)
    }

    /// Indices an internal vertex leg may carry: the primal block for
    /// split-form models (dual derivatives of `s_rest` vanish), everything
    /// otherwise.
    pub fn internal_support(&self) -> Vec<usize> {
        (0..self.primal_count).collect()
    }

    /// Positions (into `zvars`) of an external's declared support.
    pub fn external_support_indices(&self, k: usize) -> Vec<usize> {
        self.externals[k]
            .support()
            .iter()
            .map(|v| self.zvars.iter().position(|z| z == v).expect("declared support"))
            .collect()
    }
}

/// Signature of a constant real symmetric matrix by congruence
/// diagonalization; `None` if singular.
fn signature(entries: &[Vec<GaussianRational>]) -> Option<(usize, usize)> {
    let n = entries.len();
    let mut m: Vec<Vec<num_rational::BigRational>> = entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    assert!(e.im().is_zero(), "signature expects a real matrix");
                    e.re().clone()
                })
                .collect()
        })
        .collect();
    let mut pos = 0;
    let mut neg = 0;
    for k in 0..n {
        if m[k][k].is_zero() {
            // Prefer a later nonzero diagonal entry; otherwise create one.
            if let Some(j) = (k + 1..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(k, j);
                for row in m.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..n).find(|&j| !m[k][j].is_zero()) {
                for c in 0..n {
                    let v = m[j][c].clone();
                    m[k][c] += v;
                }
                for r in 0..n {
                    let v = m[r][j].clone();
                    m[r][k] += v;
                }
            } else {
                return None;
            }
        }
        let pivot = m[k][k].clone();
        if pivot.is_zero() {
            return None;
        }
        if pivot > num_rational::BigRational::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            let factor = &m[r][k] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for c in 0..n {
                let delta = &factor * &m[k][c];
                m[r][c] -= delta;
            }
            for rr in 0..n {
                let delta = &factor * &m[rr][k];
                m[rr][r] -= delta;
            }
        }
    }
    Some((pos, neg))
}

/// Exact inverse via row reduction of the augmented matrix.
fn invert(b: &Matrix) -> Option<Matrix> {
    let n = b.rows();
    let mut aug = Matrix::zero(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *aug.at_mut(i, j) = b.at(i, j).clone();
        }
        *aug.at_mut(i, n + i) = GaussianRational::one();
    }
    let pivots = aug.rref();
    if pivots.len() < n {
        return None;
    }
    let mut inv = Matrix::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            *inv.at_mut(i, j) = aug.at(i, n + j).clone();
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    #[test]
    fn split_form_structure() {
        // W = xi1 * (x1 - v1*x1^2) on a 1-dim action universe: primal v1,
        // dual th1.
        let u = VarUniverse::new(1, 1);
        let w = parse_poly("xi1*x1 - v1*xi1*x1^2 + v1^2*xi1*x1^3", u).unwrap();
        let model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![],
        )
        .unwrap();
        assert_eq!(model.constant_phase(), &parse_poly("x1*xi1", u).unwrap());
        assert_eq!(model.critical_dual()[0], parse_poly("-xi1*x1^2", u).unwrap());
        // Propagator blocks: vt = -1, tt = -K = -2*xi1*x1^3.
        assert!(model.propagator_entry(0, 0).is_zero());
        assert_eq!(model.propagator_entry(0, 1), &parse_poly("-1", u).unwrap());
        assert_eq!(
            model.propagator_entry(1, 1),
            &parse_poly("-2*xi1*x1^3", u).unwrap()
        );
        // No cubic term in this truncation.
        assert_eq!(model.max_vertex_order(), 0);
        assert!(model.is_hyperbolic());
    }

    #[test]
    fn split_form_tensors() {
        let u = VarUniverse::new(1, 1);
        let w = parse_poly("xi1*x1 + v1^3*x1 + v1^4", u).unwrap();
        let model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![],
        )
        .unwrap();
        assert_eq!(model.max_vertex_order(), 4);
        assert_eq!(model.s_tensor(&[0, 0, 0]).unwrap(), parse_poly("6*x1", u).unwrap());
        assert_eq!(model.s_tensor(&[0, 0, 0, 0]).unwrap(), parse_poly("24", u).unwrap());
        assert!(model.s_tensor(&[0, 1]).unwrap().is_zero());
        assert!(model.s_tensor(&[0, 0, 0, 0, 0]).unwrap().is_zero());
    }

    #[test]
    fn hessian_constructor_accepts_hyperbolic() {
        let u = VarUniverse::new(2, 1);
        let one = GaussianRational::one();
        let zero = GaussianRational::zero;
        let hessian = vec![vec![zero(), one.clone()], vec![one.clone(), zero()]];
        let s_rest = parse_poly("v1^3", u).unwrap();
        let model = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hessian,
            s_rest,
            vec![],
        )
        .unwrap();
        assert_eq!(model.propagator_entry(0, 1), &parse_poly("1", u).unwrap());
        assert!(model.propagator_entry(0, 0).is_zero());
    }

    #[test]
    fn hessian_constructor_rejects_definite() {
        // Identity Hessian: |det| = 1 but signature 2 -> prefactor not 1.
        let u = VarUniverse::new(2, 1);
        let one = GaussianRational::one();
        let zero = GaussianRational::zero;
        let hessian = vec![vec![one.clone(), zero()], vec![zero(), one.clone()]];
        let err = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hessian,
            MultiPoly::zero(u),
            vec![],
        );
        assert!(matches!(err, Err(PhaseError::BadPrefactor { .. })));
        // Scaled hyperbolic: signature 0 but |det| = 4.
        let two = GaussianRational::from_int(2);
        let hessian = vec![vec![zero(), two.clone()], vec![two, zero()]];
        let err = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hessian,
            MultiPoly::zero(u),
            vec![],
        );
        assert!(matches!(err, Err(PhaseError::BadPrefactor { .. })));
    }

    #[test]
    fn rejects_low_order_rest() {
        let u = VarUniverse::new(1, 1);
        let w = parse_poly("xi1*x1 + v1^3", u).unwrap();
        let mut model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![],
        )
        .unwrap();
        model.s_rest = parse_poly("v1^2", u).unwrap();
        assert!(matches!(model.verify_low_order(), Err(PhaseError::LowOrderTerm(2, _))));
    }

    #[test]
    fn external_tensor_evaluation() {
        let u = VarUniverse::new(1, 1);
        let f = parse_poly("th1^2", u).unwrap();
        let eval: BTreeMap<Var, MultiPoly> =
            [(Var::th(1), parse_poly("-xi1*x1^2", u).unwrap())].into_iter().collect();
        let ext = ExternalFn::poly(f, vec![Var::th(1)], eval);
        // Zeroth tensor: f at the critical point.
        let t0 = ext.tensor(&[], 2).unwrap();
        assert_eq!(t0.coeff(0), &parse_poly("xi1^2*x1^4", u).unwrap());
        let t1 = ext.tensor(&[Var::th(1)], 2).unwrap();
        assert_eq!(t1.coeff(0), &parse_poly("-2*xi1*x1^2", u).unwrap());
        let t2 = ext.tensor(&[Var::th(1), Var::th(1)], 2).unwrap();
        assert_eq!(t2.coeff(0), &parse_poly("2", u).unwrap());
        assert_eq!(ext.max_degree(Var::th(1)), 2);
    }
}
