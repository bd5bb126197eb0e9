//! Polynomial infinitesimal group actions on flat space: Lie-series flows,
//! classical momentum and comomentum maps, cotangent lifts, and their
//! exactly-verified compatibility identities.
//!
//! An action assigns to every basis element `e_i` a polynomial vector field
//! `X^{e_i}` on coordinates `x_1..x_d`.  At load time the table is checked
//! to satisfy `[X^{e_i}, X^{e_j}] = sigma * sum_k c_ij^k X^{e_k}` for one
//! global sign `sigma`; tables satisfying neither sign are rejected.  The
//! cotangent lift is pinned operationally through the canonical Poisson
//! bracket: applying the lifted field of `e_i` to `h` is by definition
//! `{J_i, h}` with `J_i = -<xi, X^{e_i}(x)>`.

use crate::lie::{LieAlgebra, LieError};
use crate::parse::{parse_poly, ParseError};
use crate::poly::{MultiPoly, PolyError};
use crate::scalar::GaussianRational;
use crate::vars::{Family, Var, VarUniverse};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("expected {expected} vector fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("vector field {0} has {1} components, space dimension is {2}")]
    ComponentCount(usize, usize, usize),
    #[error("vector field component may only use x variables: {0}")]
    NotSpacePolynomial(String),
    #[error(
        "vector fields are bracket-compatible for neither sign: \
         [X^{i}, X^{j}] - sigma*X^[e{i},e{j}] has residual component {residual} \
         (+1 sign, component {component})"
    )]
    BracketCompat { i: usize, j: usize, component: usize, residual: String },
    #[error("momentum maps close for neither sign: residual {0} at pair ({1},{2})")]
    MomentumClosure(String, usize, usize),
    #[error("universe {0} does not extend the action's base universe {1}")]
    UniverseTooSmall(VarUniverse, VarUniverse),
    #[error("v-block {0} out of range: universe has {1} blocks")]
    BlockOutOfRange(u32, u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// JSON form: `fields[i][k]` is the `x_k`-component of the field of `e_i`.
#[derive(Debug, Deserialize)]
pub struct ActionSpec {
    pub dim: usize,
    pub fields: Vec<Vec<String>>,
}

/// A validated polynomial action of a Lie algebra on `R^d`.
#[derive(Clone, Debug)]
pub struct InfinitesimalAction {
    algebra: LieAlgebra,
    space_dim: usize,
    base: VarUniverse,
    fields: Vec<Vec<MultiPoly>>,
    sigma: i8,
    sigma_prime: i8,
}

/// Commutator of polynomial vector fields:
/// `[X, Y]_j = sum_k (X_k d(Y_j)/dx_k - Y_k d(X_j)/dx_k)`.
pub fn field_commutator(
    x: &[MultiPoly],
    y: &[MultiPoly],
) -> Result<Vec<MultiPoly>, PolyError> {
    let d = x.len();
    let universe = *x[0].universe();
    let mut out = vec![MultiPoly::zero(universe); d];
    for j in 0..d {
        for k in 0..d {
            let xk = Var::x(k as u32 + 1);
            let a = x[k].checked_mul(&y[j].diff(xk, 1))?;
            let b = y[k].checked_mul(&x[j].diff(xk, 1))?;
            out[j] = out[j].checked_add(&a)?.checked_sub(&b)?;
        }
    }
    Ok(out)
}

/// Canonical Poisson bracket on the cotangent coordinates:
/// `{f, g} = sum_k (df/dxi_k dg/dx_k - df/dx_k dg/dxi_k)`.
pub fn canonical_poisson(f: &MultiPoly, g: &MultiPoly) -> Result<MultiPoly, PolyError> {
    f.check_universe(g)?;
    let universe = *f.universe();
    let mut out = MultiPoly::zero(universe);
    for k in 1..=universe.d() {
        let xk = Var::x(k);
        let xik = Var::xi(k);
        let a = f.diff(xik, 1).checked_mul(&g.diff(xk, 1))?;
        let b = f.diff(xk, 1).checked_mul(&g.diff(xik, 1))?;
        out = out.checked_add(&a)?.checked_sub(&b)?;
    }
    Ok(out)
}

impl InfinitesimalAction {
    pub fn new(
        algebra: LieAlgebra,
        space_dim: usize,
        fields: Vec<Vec<MultiPoly>>,
    ) -> Result<Self, ActionError> {
        let n = algebra.dim();
        if fields.len() != n {
            return Err(ActionError::FieldCount { expected: n, found: fields.len() });
        }
        let base = VarUniverse::new(space_dim as u32, n as u32);
        let mut stored = Vec::with_capacity(n);
        for (i, field) in fields.iter().enumerate() {
            if field.len() != space_dim {
                return Err(ActionError::ComponentCount(i + 1, field.len(), space_dim));
            }
            let mut comps = Vec::with_capacity(space_dim);
            for comp in field {
                if !comp.uses_only(&[Family::X]) {
                    return Err(ActionError::NotSpacePolynomial(comp.to_string()));
                }
                comps.push(comp.into_universe(base)?);
            }
            stored.push(comps);
        }
        let sigma = determine_field_sign(&algebra, &stored, space_dim)?;
        let mut action = InfinitesimalAction {
            algebra,
            space_dim,
            base,
            fields: stored,
            sigma,
            sigma_prime: 1,
        };
        action.sigma_prime = action.determine_momentum_sign()?;
        Ok(action)
    }

    pub fn from_spec(algebra: LieAlgebra, spec: &ActionSpec) -> Result<Self, ActionError> {
        let base = VarUniverse::new(spec.dim as u32, algebra.dim() as u32);
        let fields = spec
            .fields
            .iter()
            .map(|row| row.iter().map(|s| Ok(parse_poly(s, base)?)).collect())
            .collect::<Result<Vec<Vec<MultiPoly>>, ActionError>>()?;
        Self::new(algebra, spec.dim, fields)
    }

    pub fn from_json(algebra: LieAlgebra, src: &str) -> Result<Self, ActionError> {
        let spec: ActionSpec = serde_json::from_str(src)
            .map_err(|e| ActionError::NotSpacePolynomial(e.to_string()))?;
        Self::from_spec(algebra, &spec)
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn space_dim(&self) -> usize {
        self.space_dim
    }

    pub fn base_universe(&self) -> VarUniverse {
        self.base
    }

    /// Sign in `[X^{e_i}, X^{e_j}] = sigma * sum_k c_ij^k X^{e_k}`.
    pub fn sigma(&self) -> i8 {
        self.sigma
    }

    /// Sign in `{J_i, J_j} = sigma' * sum_k c_ij^k J_k`.
    pub fn sigma_prime(&self) -> i8 {
        self.sigma_prime
    }

    pub fn field(&self, i: usize) -> &[MultiPoly] {
        &self.fields[i]
    }

    fn check_universe(&self, universe: VarUniverse) -> Result<(), ActionError> {
        if !self.base.is_sub_universe(&universe) {
            return Err(ActionError::UniverseTooSmall(universe, self.base));
        }
        Ok(())
    }

    /// One application of the flow derivation
    /// `D = -sum_i v_{block,i} sum_k X^{e_i}_k d/dx_k`.
    fn flow_derivation(
        &self,
        universe: VarUniverse,
        block: u32,
        f: &MultiPoly,
    ) -> Result<MultiPoly, ActionError> {
        let mut out = MultiPoly::zero(universe);
        for i in 0..self.algebra.dim() {
            let vi = MultiPoly::var(universe, universe.v_in_block(block, i as u32 + 1))?;
            for k in 0..self.space_dim {
                let df = f.diff(Var::x(k as u32 + 1), 1);
                if df.is_zero() {
                    continue;
                }
                let xik = self.fields[i][k].into_universe(universe)?;
                out = out.checked_sub(&vi.checked_mul(&xik)?.checked_mul(&df)?)?;
            }
        }
        Ok(out)
    }

    /// Coordinates of the flow along `exp(-v)` as the truncated Lie series
    /// `sum_{k<=M} (1/k!) D^k x_j`, with `v` drawn from the given block.
    pub fn flow_series(
        &self,
        universe: VarUniverse,
        block: u32,
        max_vdeg: u32,
    ) -> Result<Vec<MultiPoly>, ActionError> {
        self.check_universe(universe)?;
        if block >= universe.vblocks() {
            return Err(ActionError::BlockOutOfRange(block, universe.vblocks()));
        }
        let mut out = Vec::with_capacity(self.space_dim);
        for j in 1..=self.space_dim {
            let mut term = MultiPoly::var(universe, Var::x(j as u32))?;
            let mut total = term.clone();
            for k in 1..=max_vdeg {
                term = self.flow_derivation(universe, block, &term)?;
                if term.is_zero() {
                    break;
                }
                let inv_k = GaussianRational::from_real(
                    BigRational::new(BigInt::from(1), BigInt::from(k as i64)),
                );
                term = term.scale(&inv_k);
                total = total.checked_add(&term)?;
            }
            out.push(total);
        }
        Ok(out)
    }

    /// Momentum map components `J_i = -<xi, X^{e_i}(x)>`.
    pub fn classical_momentum(&self, universe: VarUniverse) -> Result<Vec<MultiPoly>, ActionError> {
        self.check_universe(universe)?;
        let mut out = Vec::with_capacity(self.algebra.dim());
        for field in &self.fields {
            let mut j = MultiPoly::zero(universe);
            for (k, comp) in field.iter().enumerate() {
                let xik = MultiPoly::var(universe, Var::xi(k as u32 + 1))?;
                j = j.checked_sub(&xik.checked_mul(&comp.into_universe(universe)?)?)?;
            }
            out.push(j);
        }
        Ok(out)
    }

    /// Comomentum map: substitutes `th_i -> J_i` into a dual polynomial.
    pub fn comomentum_pullback(
        &self,
        universe: VarUniverse,
        u: &MultiPoly,
    ) -> Result<MultiPoly, ActionError> {
        self.check_universe(universe)?;
        let momenta = self.classical_momentum(universe)?;
        let bindings: BTreeMap<Var, MultiPoly> = momenta
            .into_iter()
            .enumerate()
            .map(|(i, j)| (Var::th(i as u32 + 1), j))
            .collect();
        Ok(u.substitute_family(Family::Th, &bindings)?)
    }

    /// Components of the lifted field of `e_i` on the cotangent
    /// coordinates, normalized so that applying it equals `{J_i, .}`:
    /// the first `d` entries multiply `d/dx_k`, the last `d` multiply
    /// `d/dxi_k`.
    pub fn cotangent_lift_field(
        &self,
        universe: VarUniverse,
        i: usize,
    ) -> Result<Vec<MultiPoly>, ActionError> {
        self.check_universe(universe)?;
        let ji = &self.classical_momentum(universe)?[i];
        let mut out = Vec::with_capacity(2 * self.space_dim);
        for k in 1..=self.space_dim as u32 {
            out.push(ji.diff(Var::xi(k), 1));
        }
        for k in 1..=self.space_dim as u32 {
            out.push(ji.diff(Var::x(k), 1).neg());
        }
        Ok(out)
    }

    /// Applies the lifted field of `e_i` to `h`; equal to `{J_i, h}` by
    /// construction.
    pub fn cotangent_lift_apply(
        &self,
        universe: VarUniverse,
        i: usize,
        h: &MultiPoly,
    ) -> Result<MultiPoly, ActionError> {
        let ji = &self.classical_momentum(universe)?[i];
        Ok(canonical_poisson(ji, h)?)
    }

    fn determine_momentum_sign(&self) -> Result<i8, ActionError> {
        let universe = self.base;
        let momenta = self.classical_momentum(universe)?;
        let n = self.algebra.dim();
        for sign in [1i8, -1] {
            let mut ok = true;
            'outer: for i in 0..n {
                for j in 0..n {
                    let pb = canonical_poisson(&momenta[i], &momenta[j])?;
                    let mut closed = MultiPoly::zero(universe);
                    for (k, jk) in momenta.iter().enumerate() {
                        let c = self.algebra.structure(i, j, k);
                        if !c.is_zero() {
                            closed = closed.checked_add(&jk.scale(c))?;
                        }
                    }
                    if sign < 0 {
                        closed = closed.neg();
                    }
                    if pb.sub(&closed).is_zero() == false {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                return Ok(sign);
            }
        }
        // Unreachable when the field-level check passed, but report faithfully.
        let pb = canonical_poisson(&momenta[0], &momenta[1])?;
        Err(ActionError::MomentumClosure(pb.to_string(), 1, 2))
    }

    /// Exhaustive classical verification: the comomentum intertwines the
    /// two Poisson structures up to `sigma'`, and lifted fields annihilate
    /// pullbacks of Casimir elements.
    pub fn classical_checks(&self, max_deg: u32) -> Result<ClassicalReport, ActionError> {
        let universe = self.base;
        let n = self.algebra.dim() as u32;
        let monos = crate::lie::dual_monomials(n as usize, 1, max_deg);
        let sigma_prime = GaussianRational::from_int(self.sigma_prime as i64);
        let mut morphism_residuals = Vec::new();
        for (a, ma) in monos.iter().enumerate() {
            let f = MultiPoly::from_terms(universe, [(ma.clone(), GaussianRational::one())]);
            let jf = self.comomentum_pullback(universe, &f)?;
            for mb in monos.iter().skip(a) {
                let g = MultiPoly::from_terms(universe, [(mb.clone(), GaussianRational::one())]);
                let jg = self.comomentum_pullback(universe, &g)?;
                let lhs = canonical_poisson(&jf, &jg)?;
                let pb = self.algebra.kk_poisson(&f, &g)?;
                let rhs = self.comomentum_pullback(universe, &pb)?.scale(&sigma_prime);
                let residual = lhs.sub(&rhs);
                if !residual.is_zero() {
                    morphism_residuals.push((f.to_string(), g.to_string(), residual));
                }
            }
        }
        let mut casimir_residuals = Vec::new();
        for cas in self.algebra.casimir_basis(universe, max_deg)? {
            let jcas = self.comomentum_pullback(universe, &cas)?;
            for i in 0..self.algebra.dim() {
                let residual = self.cotangent_lift_apply(universe, i, &jcas)?;
                if !residual.is_zero() {
                    casimir_residuals.push((cas.to_string(), i + 1, residual));
                }
            }
        }
        Ok(ClassicalReport {
            sigma: self.sigma,
            sigma_prime: self.sigma_prime,
            checked_degree: max_deg,
            morphism_residuals,
            casimir_residuals,
        })
    }
}

fn determine_field_sign(
    algebra: &LieAlgebra,
    fields: &[Vec<MultiPoly>],
    space_dim: usize,
) -> Result<i8, ActionError> {
    let n = algebra.dim();
    let mut first_failure: Option<(usize, usize, usize, String)> = None;
    'signs: for sign in [1i8, -1] {
        for i in 0..n {
            for j in 0..n {
                let comm = field_commutator(&fields[i], &fields[j])?;
                for k in 0..space_dim {
                    let mut closed = MultiPoly::zero(*fields[i][k].universe());
                    for (m, field_m) in fields.iter().enumerate() {
                        let c = algebra.structure(i, j, m);
                        if !c.is_zero() {
                            closed = closed.checked_add(&field_m[k].scale(c))?;
                        }
                    }
                    if sign < 0 {
                        closed = closed.neg();
                    }
                    let residual = comm[k].sub(&closed);
                    if !residual.is_zero() {
                        if sign == 1 {
                            first_failure =
                                Some((i + 1, j + 1, k + 1, residual.to_string()));
                        }
                        continue 'signs;
                    }
                }
            }
        }
        return Ok(sign);
    }
    let (i, j, component, residual) =
        first_failure.unwrap_or((1, 1, 1, "0".to_string()));
    Err(ActionError::BracketCompat { i, j, component, residual })
}

/// Result of `classical_checks`: the loaded signs plus every nonzero
/// residual, labeled by the inputs that produced it.
#[derive(Debug)]
pub struct ClassicalReport {
    pub sigma: i8,
    pub sigma_prime: i8,
    pub checked_degree: u32,
    pub morphism_residuals: Vec<(String, String, MultiPoly)>,
    pub casimir_residuals: Vec<(String, usize, MultiPoly)>,
}

impl ClassicalReport {
    pub fn is_ok(&self) -> bool {
        self.morphism_residuals.is_empty() && self.casimir_residuals.is_empty()
    }
}

fn gallery_fields(universe: VarUniverse, rows: &[&[&str]]) -> Vec<Vec<MultiPoly>> {
    rows.iter()
        .map(|row| {
            row.iter()
                .map(|s| parse_poly(s, universe).expect("gallery field parses"))
                .collect()
        })
        .collect()
}

/// `R^d` acting on itself by translations: `X^{e_i} = d/dx_i`.
pub fn translation_action(d: usize) -> InfinitesimalAction {
    let universe = VarUniverse::new(d as u32, d as u32);
    let fields = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| {
                    if i == k {
                        MultiPoly::one(universe)
                    } else {
                        MultiPoly::zero(universe)
                    }
                })
                .collect()
        })
        .collect();
    InfinitesimalAction::new(LieAlgebra::abelian(d), d, fields)
        .expect("translation fields commute")
}

/// `so(3)` acting on `R^3` by rotations: `X^{e_i}(x) = e_i x x`.
pub fn rotation_so3_action() -> InfinitesimalAction {
    let universe = VarUniverse::new(3, 3);
    InfinitesimalAction::new(
        LieAlgebra::so3(),
        3,
        gallery_fields(
            universe,
            &[&["0", "-x3", "x2"], &["x3", "0", "-x1"], &["-x2", "x1", "0"]],
        ),
    )
    .expect("rotation fields close under bracket")
}

/// The one-parameter action on `R` generated by `x^2 d/dx`, the smallest
/// action with a genuinely nonlinear flow.
pub fn quadratic_flow_action() -> InfinitesimalAction {
    let universe = VarUniverse::new(1, 1);
    InfinitesimalAction::new(
        LieAlgebra::abelian(1),
        1,
        gallery_fields(universe, &[&["x1^2"]]),
    )
    .expect("a single field always closes")
}

/// The Heisenberg algebra acting on the plane:
/// `e1 -> d/dx1`, `e2 -> x1 d/dx2`, `e3 -> -d/dx2`.
pub fn heisenberg_plane_action() -> InfinitesimalAction {
    let universe = VarUniverse::new(2, 3);
    InfinitesimalAction::new(
        LieAlgebra::heisenberg(),
        2,
        gallery_fields(universe, &[&["1", "0"], &["0", "x1"], &["0", "-1"]]),
    )
    .expect("plane fields realize the Heisenberg bracket")
}
