//! Quantum momentum maps: from an infinitesimal action plus a validated
//! amplitude system to an algebra morphism between star products.
//!
//! The map sends a polynomial `u` on the dual of the Lie algebra to an
//! `hbar`-series of standard-ordered symbols on the cotangent space.  It
//! is computed as the stationary-phase expansion of an oscillatory
//! integral whose phase is
//!
//! ```text
//!     S(v, th) = <xi, flow_v(x)> - <th, v>,
//! ```
//!
//! with two external insertions: `u` on the dual slot (evaluated at the
//! critical point `th = J(x, xi)`, the classical momentum map) and the
//! amplitude series of the G-system on the group slot (evaluated at
//! `v = 0`).  The phase is of split type, so its critical point is
//! unique, the Hessian has unit determinant and zero signature, and the
//! scalar prefactor of the expansion is exactly `1`; `QmmPhase` exposes
//! that Hessian data for direct inspection.
//!
//! `QmmModel` gates every computation behind the composition identity of
//! the G-system (its Maurer-Cartan residual must vanish through the
//! tracked orders), then offers the map itself (`apply`, and its closed
//! two-graph form `linear` on algebra generators) together with the
//! mechanical checks of the structural identities: `verify_morphism`
//! (the map intertwines the Gutt product with the standard product),
//! `verify_second` (the infinitesimal generator of the G-system equals
//! the quantized momentum component, and its commutator action deforms
//! the cotangent lift), `verify_equivariance` (that commutator action is
//! a derivation of the standard product), and
//! `verify_invariant_hamiltonian` (quantized Casimir elements commute
//! with the generators, while naive pullback quantization exhibits an
//! anomaly).  Group-level invariance statements are verified in their
//! infinitesimal form — the derivative at the unit along each basis
//! direction — which is exact in polynomial data; the group versions
//! follow by formal exponentiation.

use crate::action::{ActionError, InfinitesimalAction};
use crate::feynman::{expand, ExternalFn, PhaseError, PhaseModel};
use crate::gsystem::{GSystem, GSystemError};
use crate::lie::{LieAlgebra, LieError};
use crate::linalg::poly_det;
use crate::poly::{MultiPoly, PolyError};
use crate::quantize::{star_standard, QuantizeError, SymbolOperator};
use crate::scalar::GaussianRational;
use crate::series::{HbarSeries, SeriesError};
use crate::uea::{gutt_pbw, UEAError};
use crate::vars::{Family, Var, VarUniverse};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QmmError {
    #[error("expected a polynomial on the dual of the algebra, found {0}")]
    NotDualPolynomial(String),
    #[error("expected a symbol polynomial in (x, xi), found {0}")]
    NotSymbolPolynomial(String),
    #[error("composition identity fails at hbar^{level}: residual {residual}")]
    CompositionIdentity { level: usize, residual: String },
    #[error("not a Casimir element: {{th_{index}, f}} = {residual}")]
    NotCasimir { index: usize, residual: String },
    #[error("basis index {0} out of range for an algebra of dimension {1}")]
    BasisOutOfRange(usize, usize),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    GSystem(#[from] GSystemError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Uea(#[from] UEAError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The split-form oscillatory phase of one action: generating function
/// `W(v) = <xi, flow_v(x)>` truncated at group degree `vdeg`, primal
/// block `v`, dual block `th`, and the critical-point data that the
/// expansion engine consumes.
#[derive(Clone, Debug)]
pub struct QmmPhase {
    universe: VarUniverse,
    w: MultiPoly,
    primal: Vec<Var>,
    dual: Vec<Var>,
    momentum: Vec<MultiPoly>,
    vdeg: u32,
    skeleton: PhaseModel,
}

impl QmmPhase {
    /// Builds the phase and verifies its critical structure: the critical
    /// value is `<x, xi>` (cancelling the conjugation prefactor of the
    /// defining integral) and the critical dual slot is the classical
    /// momentum map.  Both are structural identities of the flow; their
    /// failure would signal corrupted flow data, so they are asserted.
    pub fn build(action: &InfinitesimalAction, vdeg: u32) -> Result<Self, QmmError> {
        let universe = action.base_universe();
        let n = action.algebra().dim();
        let flow = action.flow_series(universe, 0, vdeg)?;
        let mut w = MultiPoly::zero(universe);
        for (k, comp) in flow.iter().enumerate() {
            let xik = MultiPoly::var(universe, Var::xi(k as u32 + 1))?;
            w = w.checked_add(&xik.checked_mul(comp)?)?;
        }
        let primal: Vec<Var> = (1..=n as u32).map(|i| universe.v_in_block(0, i)).collect();
        let dual: Vec<Var> = (1..=n as u32).map(Var::th).collect();
        let momentum = action.classical_momentum(universe)?;
        let skeleton = PhaseModel::from_generating(
            universe,
            &w,
            primal.clone(),
            dual.clone(),
            Vec::new(),
        )?;
        let mut xdotxi = MultiPoly::zero(universe);
        for k in 1..=action.space_dim() as u32 {
            let xk = MultiPoly::var(universe, Var::x(k))?;
            let xik = MultiPoly::var(universe, Var::xi(k))?;
            xdotxi = xdotxi.checked_add(&xk.checked_mul(&xik)?)?;
        }
        assert_eq!(
            skeleton.constant_phase(),
            &xdotxi,
            "critical value of the phase must be <x, xi>"
        );
        assert_eq!(
            skeleton.critical_dual(),
            momentum.as_slice(),
            "critical dual slot must be the classical momentum map"
        );
        Ok(QmmPhase { universe, w, primal, dual, momentum, vdeg, skeleton })
    }

    pub fn universe(&self) -> VarUniverse {
        self.universe
    }

    /// The generating function `W(v) = <xi, flow_v(x)>`.
    pub fn generating(&self) -> &MultiPoly {
        &self.w
    }

    pub fn momentum(&self) -> &[MultiPoly] {
        &self.momentum
    }

    pub fn vdeg(&self) -> u32 {
        self.vdeg
    }

    /// Assembles the expansion model with the given external insertions.
    /// The propagator data — built once with an exact inverse check and,
    /// for blocks small enough to expand, a symbolic unit-determinant
    /// check — is shared; only external validation runs per call.
    pub fn model(&self, externals: Vec<ExternalFn>) -> Result<PhaseModel, QmmError> {
        Ok(self.skeleton.with_externals(externals)?)
    }

    /// Mixed derivative tensor of the full phase at the critical point:
    /// `d_v^alpha d_th^beta S` evaluated at `v = 0`, `th = J(x, xi)`.
    /// Since `S` is linear in `th`, every tensor with at least one dual
    /// index and total order at least three vanishes.
    pub fn s_tensor(&self, v_alpha: &[u32], th_beta: &[u32]) -> Result<MultiPoly, QmmError> {
        let universe = self.universe;
        let mut s = self.w.clone();
        for (a, &th) in self.dual.iter().enumerate() {
            let pair = MultiPoly::var(universe, th)?
                .checked_mul(&MultiPoly::var(universe, self.primal[a])?)?;
            s = s.checked_sub(&pair)?;
        }
        for (i, &e) in v_alpha.iter().enumerate() {
            if e > 0 {
                s = s.diff(self.primal[i], e);
            }
        }
        for (a, &e) in th_beta.iter().enumerate() {
            if e > 0 {
                s = s.diff(self.dual[a], e);
            }
        }
        let mut bind: BTreeMap<Var, MultiPoly> = self
            .primal
            .iter()
            .map(|&v| (v, MultiPoly::zero(universe)))
            .collect();
        for (a, &th) in self.dual.iter().enumerate() {
            bind.insert(th, self.momentum[a].clone());
        }
        Ok(s.substitute(&bind)?)
    }

    /// Second-derivative block `K = d^2_v W(0)` as exact polynomials.
    fn k_block(&self) -> Result<Vec<Vec<MultiPoly>>, QmmError> {
        let n = self.primal.len();
        let zero_primal: BTreeMap<Var, MultiPoly> = self
            .primal
            .iter()
            .map(|&v| (v, MultiPoly::zero(self.universe)))
            .collect();
        let mut k = vec![vec![MultiPoly::zero(self.universe); n]; n];
        for i in 0..n {
            for j in 0..n {
                k[i][j] = self
                    .w
                    .diff(self.primal[i], 1)
                    .diff(self.primal[j], 1)
                    .substitute(&zero_primal)?;
            }
        }
        Ok(k)
    }

    /// The phase Hessian at the critical point, `B = [[K, -I], [-I, 0]]`
    /// in `(v, th)` block order.
    pub fn hessian(&self) -> Result<Vec<Vec<MultiPoly>>, QmmError> {
        let n = self.primal.len();
        let k = self.k_block()?;
        let mut b = vec![vec![MultiPoly::zero(self.universe); 2 * n]; 2 * n];
        let minus_one = MultiPoly::constant(self.universe, -GaussianRational::one());
        for i in 0..n {
            for j in 0..n {
                b[i][j] = k[i][j].clone();
            }
            b[i][n + i] = minus_one.clone();
            b[n + i][i] = minus_one.clone();
        }
        Ok(b)
    }

    /// The exact inverse `B^{-1} = [[0, -I], [-I, -K]]`.
    pub fn hessian_inverse(&self) -> Result<Vec<Vec<MultiPoly>>, QmmError> {
        let n = self.primal.len();
        let k = self.k_block()?;
        let mut inv = vec![vec![MultiPoly::zero(self.universe); 2 * n]; 2 * n];
        let minus_one = MultiPoly::constant(self.universe, -GaussianRational::one());
        for i in 0..n {
            inv[i][n + i] = minus_one.clone();
            inv[n + i][i] = minus_one.clone();
            for j in 0..n {
                inv[n + i][n + j] = k[i][j].neg();
            }
        }
        Ok(inv)
    }

    /// Verifies the stationary-phase prefactor data symbolically:
    /// `det B` is a unit constant, `B B^{-1} = I` exactly, and the
    /// unipotent congruence `U B U^T` with `U = [[I, K/2], [0, I]]`
    /// lands on the split form `[[0, -I], [-I, 0]]`, so the signature
    /// vanishes at every real point.
    pub fn hessian_checks(&self) -> Result<HessianReport, QmmError> {
        let universe = self.universe;
        let n = self.primal.len();
        let b = self.hessian()?;
        let det = poly_det(&b);
        let det_is_unit = det.is_constant()
            && det.constant_term().im().is_zero()
            && det.constant_term().re().clone().abs()
                == BigRational::from_integer(1.into());
        let product = mat_mul(&b, &self.hessian_inverse()?)?;
        let inverse_exact = is_identity(&product);
        let k = self.k_block()?;
        let half = GaussianRational::from_ratio(1, 2);
        let mut u = vec![vec![MultiPoly::zero(universe); 2 * n]; 2 * n];
        for i in 0..n {
            u[i][i] = MultiPoly::one(universe);
            u[n + i][n + i] = MultiPoly::one(universe);
            for j in 0..n {
                u[i][n + j] = k[i][j].scale(&half);
            }
        }
        let congruent = mat_mul(&mat_mul(&u, &b)?, &mat_transpose(&u))?;
        let mut split = vec![vec![MultiPoly::zero(universe); 2 * n]; 2 * n];
        let minus_one = MultiPoly::constant(universe, -GaussianRational::one());
        for i in 0..n {
            split[i][n + i] = minus_one.clone();
            split[n + i][i] = minus_one.clone();
        }
        let signature_zero = congruent == split;
        Ok(HessianReport { det, det_is_unit, inverse_exact, signature_zero })
    }
}

/// Outcome of the symbolic Hessian verification.
#[derive(Debug)]
pub struct HessianReport {
    pub det: MultiPoly,
    pub det_is_unit: bool,
    pub inverse_exact: bool,
    pub signature_zero: bool,
}

impl HessianReport {
    pub fn is_ok(&self) -> bool {
        self.det_is_unit && self.inverse_exact && self.signature_zero
    }
}

fn mat_mul(
    a: &[Vec<MultiPoly>],
    b: &[Vec<MultiPoly>],
) -> Result<Vec<Vec<MultiPoly>>, PolyError> {
    let universe = *a[0][0].universe();
    let rows = a.len();
    let cols = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![MultiPoly::zero(universe); cols]; rows];
    for i in 0..rows {
        for j in 0..cols {
            let mut sum = MultiPoly::zero(universe);
            for (k, b_row) in b.iter().enumerate().take(inner) {
                if a[i][k].is_zero() || b_row[j].is_zero() {
                    continue;
                }
                sum = sum.checked_add(&a[i][k].checked_mul(&b_row[j])?)?;
            }
            out[i][j] = sum;
        }
    }
    Ok(out)
}

fn mat_transpose(a: &[Vec<MultiPoly>]) -> Vec<Vec<MultiPoly>> {
    let rows = a.len();
    let cols = a[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].clone()).collect())
        .collect()
}

fn is_identity(a: &[Vec<MultiPoly>]) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, e)| if i == j { e.is_one() } else { e.is_zero() })
    })
}

/// A G-system bound to truncation orders, with the composition identity
/// verified up front.  All theorem-level checks hang off this type, so
/// nothing downstream ever runs on an invalid amplitude system.
#[derive(Clone, Debug)]
pub struct QmmModel {
    gsystem: GSystem,
    order: usize,
    vdeg: u32,
    phase: QmmPhase,
}

impl QmmModel {
    /// Binds the system at `hbar`-order `order` with the default group
    /// truncation `2 * order + 2`, deep enough for every vertex tensor
    /// the expansion can query.
    pub fn new(gsystem: GSystem, order: usize) -> Result<Self, QmmError> {
        let vdeg = 2 * order as u32 + 2;
        Self::with_truncations(gsystem, order, vdeg)
    }

    /// Same with an explicit group truncation.  Fails with the first
    /// nonzero residual level if the G-system does not satisfy its
    /// composition identity through `hbar^order`.
    pub fn with_truncations(
        gsystem: GSystem,
        order: usize,
        vdeg: u32,
    ) -> Result<Self, QmmError> {
        let residual = gsystem.mc_residual(order, gsystem.vdeg())?;
        if !residual.is_zero() {
            let level = residual
                .coeffs()
                .iter()
                .position(|c| !c.is_zero())
                .unwrap_or(0);
            return Err(QmmError::CompositionIdentity {
                level,
                residual: residual.coeff(level).to_string(),
            });
        }
        // Deep enough for every vertex tensor queried at this order; the
        // raised-order internal passes (e.g. the invariant-Hamiltonian
        // check) rebuild a deeper phase on demand.
        let depth = vdeg.max(2 * order as u32 + 2);
        let phase = QmmPhase::build(gsystem.action(), depth)?;
        Ok(QmmModel { gsystem, order, vdeg, phase })
    }

    pub fn gsystem(&self) -> &GSystem {
        &self.gsystem
    }

    pub fn action(&self) -> &InfinitesimalAction {
        self.gsystem.action()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        self.action().algebra()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vdeg(&self) -> u32 {
        self.vdeg
    }

    /// The oscillatory phase of this model (built at construction).
    pub fn phase(&self) -> &QmmPhase {
        &self.phase
    }

    fn check_dual_poly(&self, u: &MultiPoly) -> Result<(), QmmError> {
        if !u.uses_only(&[Family::Th]) {
            return Err(QmmError::NotDualPolynomial(u.to_string()));
        }
        Ok(())
    }

    fn check_symbol_poly(&self, f: &MultiPoly) -> Result<MultiPoly, QmmError> {
        if !f.uses_only(&[Family::X, Family::Xi]) {
            return Err(QmmError::NotSymbolPolynomial(f.to_string()));
        }
        Ok(f.into_universe(self.action().base_universe())?)
    }

    /// The quantum momentum map on a dual polynomial, through
    /// `hbar^order`.
    pub fn apply(&self, u: &MultiPoly) -> Result<HbarSeries, QmmError> {
        self.apply_at(u, self.order)
    }

    /// The map truncated below the model's order — the building block of
    /// the `hbar`-linear extension, exposed so callers assembling many
    /// series can reuse images of shared coefficients.
    pub fn apply_truncated(
        &self,
        u: &MultiPoly,
        order: usize,
    ) -> Result<HbarSeries, QmmError> {
        assert!(
            order <= self.order,
            "truncation {order} exceeds the verified order {}",
            self.order
        );
        self.apply_at(u, order)
    }

    fn apply_at(&self, u: &MultiPoly, order: usize) -> Result<HbarSeries, QmmError> {
        self.check_dual_poly(u)?;
        // A graph with a nonzero amplitude routes every group-slot leg to
        // a dual derivative of `u`, so no surviving vertex tensor exceeds
        // the dual degree of `u`; the generic bound is `2 * order + 2`.
        let needed = (2 * order as u32 + 2).max(u.degree_in_family(Family::Th));
        let rebuilt;
        let phase = if needed <= self.phase.vdeg {
            &self.phase
        } else {
            rebuilt = QmmPhase::build(self.action(), needed)?;
            &rebuilt
        };
        let universe = phase.universe();
        let u_l = u.into_universe(universe)?;
        let eval_u: BTreeMap<Var, MultiPoly> = phase
            .dual
            .iter()
            .enumerate()
            .map(|(a, &th)| (th, phase.momentum[a].clone()))
            .collect();
        let u_ext = ExternalFn::poly(u_l, phase.dual.clone(), eval_u);
        let a_series = self.gsystem.series(universe, order)?;
        let eval_a: BTreeMap<Var, MultiPoly> = phase
            .primal
            .iter()
            .map(|&v| (v, MultiPoly::zero(universe)))
            .collect();
        let a_ext = ExternalFn::series(a_series, phase.primal.clone(), eval_a);
        let model = phase.model(vec![u_ext, a_ext])?;
        let out = expand(&model, order)?;
        for c in out.coeffs() {
            assert!(
                c.uses_only(&[Family::X, Family::Xi]),
                "integration variables must not survive the expansion"
            );
        }
        Ok(out)
    }

    /// `hbar`-linear extension of the map to series of dual polynomials.
    pub fn apply_series(&self, u: &HbarSeries) -> Result<HbarSeries, QmmError> {
        let universe = self.action().base_universe();
        let mut out = HbarSeries::zero(universe, self.order);
        for (k, c) in u.coeffs().iter().enumerate().take(self.order + 1) {
            if c.is_zero() {
                continue;
            }
            let jc = self.apply_at(c, self.order - k)?;
            out = out.add(&jc.padded(self.order).shift_up(k));
        }
        Ok(out)
    }

    /// The map on the algebra generator `th_{i+1}` in closed form.  Only
    /// two graphs survive on a linear element: the bare critical
    /// evaluation, giving the classical momentum component, and the
    /// single dual-group edge, giving `(1/i) * hbar` times the group
    /// derivative of the amplitude at the unit:
    ///
    /// ```text
    ///     J_i  +  (hbar/i) * sum_l hbar^l d_{v_i} P^l(0; x, xi).
    /// ```
    pub fn linear(&self, i: usize) -> Result<HbarSeries, QmmError> {
        self.linear_at(i, self.order)
    }

    fn linear_at(&self, i: usize, order: usize) -> Result<HbarSeries, QmmError> {
        let n = self.algebra().dim();
        if i >= n {
            return Err(QmmError::BasisOutOfRange(i, n));
        }
        let universe = self.action().base_universe();
        let mut coeffs = vec![MultiPoly::zero(universe); order + 1];
        coeffs[0] = self.action().classical_momentum(universe)?[i].clone();
        let minus_i = -GaussianRational::i();
        for level in 0..order {
            if level <= self.gsystem.order() {
                let unit_slope = self
                    .gsystem
                    .coefficient(level)
                    .diff(Var::v(i as u32 + 1), 1)
                    .at_family_zero(Family::V);
                if !unit_slope.is_zero() {
                    coeffs[level + 1] = coeffs[level + 1]
                        .checked_add(&unit_slope.into_universe(universe)?.scale(&minus_i))?;
                }
            }
        }
        Ok(HbarSeries::from_coeffs(coeffs))
    }

    /// Morphism residual `J^a(f *_G g) - J^a(f) *_st J^a(g)`; zero for a
    /// valid model.  The Gutt product is taken through the symmetrized
    /// enveloping-algebra route, keeping the two sides of the comparison
    /// on independent computational paths.
    pub fn verify_morphism(
        &self,
        f: &MultiPoly,
        g: &MultiPoly,
    ) -> Result<HbarSeries, QmmError> {
        self.check_dual_poly(f)?;
        self.check_dual_poly(g)?;
        let fg = gutt_pbw(self.algebra(), f, g, self.order)?;
        let left = self.apply_series(&fg)?;
        let right = star_standard(&self.apply(f)?, &self.apply(g)?, self.order);
        Ok(left.sub(&right))
    }

    /// Symbol series of `(i/hbar)[Op(J^a(e_{i+1})), Op(h)]`, reliable
    /// through `hbar^order`.
    fn tilde_apply_series(
        &self,
        i: usize,
        h: &HbarSeries,
        order: usize,
    ) -> Result<HbarSeries, QmmError> {
        let raised = order + 1;
        let ja = self.linear_at(i, raised)?;
        let h_r = h.padded(raised).truncated(raised);
        let bracket = star_standard(&ja, &h_r, raised)
            .sub(&star_standard(&h_r, &ja, raised));
        Ok(bracket
            .scale(&GaussianRational::i())
            .shift_down(1)?
            .truncated(order))
    }

    /// The deformed generator `f -> (i/hbar)[Op(J^a(e_{i+1})), Op(f)]`
    /// on a symbol polynomial; its leading term is the cotangent lift of
    /// the action field.
    pub fn tilde_generator(&self, i: usize, f: &MultiPoly) -> Result<HbarSeries, QmmError> {
        let f_l = self.check_symbol_poly(f)?;
        self.tilde_apply_series(i, &HbarSeries::from_poly(f_l, 0), self.order)
    }

    /// Two-route check of the generator identity along basis direction
    /// `e_{i+1}`: the exact `SymbolOperator` equality between the
    /// infinitesimal G-system generator and `Op` of `i/hbar` times the
    /// quantized momentum component, plus the leading-term comparison of
    /// the deformed generator against the cotangent lift on `f`.
    pub fn verify_second(&self, i: usize, f: &MultiPoly) -> Result<SecondReport, QmmError> {
        let n = self.algebra().dim();
        if i >= n {
            return Err(QmmError::BasisOutOfRange(i, n));
        }
        let expected = SymbolOperator::new(
            1,
            self.linear_at(i, self.order + 1)?.scale(&GaussianRational::i()),
        );
        let observed = self.gsystem.t_infinitesimal(i, self.order)?;
        let operators_equal = expected == observed;
        let universe = self.action().base_universe();
        let f_l = self.check_symbol_poly(f)?;
        let commutator = self.tilde_apply_series(i, &HbarSeries::from_poly(f_l.clone(), 0), self.order)?;
        let classical = self.action().cotangent_lift_apply(universe, i, &f_l)?;
        let leading_residual = commutator.coeff(0).sub(&classical);
        Ok(SecondReport { expected, observed, operators_equal, commutator, leading_residual })
    }

    /// Derivation residual of the deformed generator over the standard
    /// product:
    /// `tilde t(f *_st g) - tilde t(f) *_st g - f *_st tilde t(g)`.
    pub fn verify_equivariance(
        &self,
        i: usize,
        f: &MultiPoly,
        g: &MultiPoly,
    ) -> Result<HbarSeries, QmmError> {
        let f_l = self.check_symbol_poly(f)?;
        let g_l = self.check_symbol_poly(g)?;
        let raised = self.order + 1;
        let fs = HbarSeries::from_poly(f_l, raised);
        let gs = HbarSeries::from_poly(g_l, raised);
        let fg = star_standard(&fs, &gs, raised);
        let left = self.tilde_apply_series(i, &fg, self.order)?;
        let tf = self.tilde_apply_series(i, &fs, self.order)?;
        let tg = self.tilde_apply_series(i, &gs, self.order)?;
        let right = star_standard(&tf, &gs.truncated(self.order), self.order)
            .add(&star_standard(&fs.truncated(self.order), &tg, self.order));
        Ok(left.sub(&right))
    }

    /// For a Casimir element `f`, the commutator of every generator with
    /// the quantized Hamiltonian `Op(J^a(f))` (expected zero), contrasted
    /// with the same commutator against the naive pullback quantization
    /// `Op(J^* f)` (generically nonzero: the anomaly the amplitude
    /// corrections remove).
    pub fn verify_invariant_hamiltonian(
        &self,
        f: &MultiPoly,
    ) -> Result<CasimirReport, QmmError> {
        self.check_dual_poly(f)?;
        let residuals = self.algebra().casimir_residuals(f)?;
        if let Some((idx, r)) = residuals.iter().enumerate().find(|(_, r)| !r.is_zero()) {
            return Err(QmmError::NotCasimir {
                index: idx + 1,
                residual: r.to_string(),
            });
        }
        let n = self.algebra().dim();
        let raised = self.order + 1;
        let universe = self.action().base_universe();
        let h = self.apply_at(f, raised)?;
        let pullback = self
            .action()
            .comomentum_pullback(universe, &f.into_universe(universe)?)?;
        let h_naive = HbarSeries::from_poly(pullback, raised);
        let mut invariant = Vec::with_capacity(n);
        let mut naive = Vec::with_capacity(n);
        for i in 0..n {
            let s_i = self.linear_at(i, raised)?.scale(&GaussianRational::i());
            let commute = |target: &HbarSeries| -> Result<HbarSeries, QmmError> {
                Ok(star_standard(&s_i, target, raised)
                    .sub(&star_standard(target, &s_i, raised))
                    .shift_down(1)?
                    .truncated(self.order))
            };
            invariant.push(commute(&h)?);
            naive.push(commute(&h_naive)?);
        }
        Ok(CasimirReport { invariant, naive })
    }
}

/// Outcome of `verify_second`: both routes to the generator, their
/// equality, the deformed commutator action on the probe symbol, and
/// the residual of its leading term against the cotangent lift.
#[derive(Debug)]
pub struct SecondReport {
    pub expected: SymbolOperator,
    pub observed: SymbolOperator,
    pub operators_equal: bool,
    pub commutator: HbarSeries,
    pub leading_residual: MultiPoly,
}

/// Outcome of `verify_invariant_hamiltonian`: per basis direction, the
/// commutator with the quantized Casimir and with its naive pullback
/// quantization.
#[derive(Debug)]
pub struct CasimirReport {
    pub invariant: Vec<HbarSeries>,
    pub naive: Vec<HbarSeries>,
}

impl CasimirReport {
    pub fn invariant_ok(&self) -> bool {
        self.invariant.iter().all(HbarSeries::is_zero)
    }

    pub fn anomaly_present(&self) -> bool {
        self.naive.iter().any(|s| !s.is_zero())
    }
}

/// Evaluates a dual polynomial at the negated fiber coordinates,
/// `th_k -> -xi_k`: the exact closed form of the translation-model map.
pub fn negated_fiber(
    universe: VarUniverse,
    u: &MultiPoly,
) -> Result<MultiPoly, PolyError> {
    let n = universe.n();
    let bind: Result<BTreeMap<Var, MultiPoly>, PolyError> = (1..=n)
        .map(|a| Ok((Var::th(a), MultiPoly::var(universe, Var::xi(a))?.neg())))
        .collect();
    u.into_universe(universe)?.substitute(&bind?)
}
