//! Formal G-systems: the hbar-graded amplitudes attached to group
//! elements in exponential coordinates, the operators they induce on
//! formal wavefunctions, the amplitude differential and composition
//! product, and the Maurer-Cartan residual that certifies a candidate.
//!
//! A system stores coefficients `P^l(v; x, xi)` for `l = 0..N` with the
//! momentum degree of `P^l` bounded by `l`, the group-coordinate degree
//! bounded by `M`, and the unit normalization `P^0(0) = 1`,
//! `P^l(0) = 0` for `l >= 1`.  The induced operator is
//!
//! `T_{exp(v)} psi(x) = sum_l hbar^l [P^l(v; x, (hbar/i) d_y) psi(y)]`
//! evaluated at `y = flow_v(x)`,
//!
//! with the `x`-coefficients of `P^l` kept at the outer point and the
//! derivatives of `psi` evaluated at the flowed point.  Group elements
//! only ever appear through polynomial truncations in their exponential
//! coordinates, so every identity below is a polynomial identity in
//! `(v, w, t)` up to the tracked degrees.

use crate::action::{ActionError, InfinitesimalAction};
use crate::lie::{bch, LieError};
use crate::parse::{parse_poly, ParseError};
use crate::poly::{MultiPoly, PolyError};
use crate::quantize::{symbol_extract, symbol_extract_along, QuantizeError, SymbolOperator};
use crate::scalar::GaussianRational;
use crate::series::HbarSeries;
use crate::vars::{Family, Var, VarUniverse};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GSystemError {
    #[error("coefficient list must contain the leading entry n = 0")]
    MissingLeading,
    #[error("coefficient n = {0} appears twice")]
    DuplicateCoefficient(usize),
    #[error("coefficient n = {0} exceeds the hbar truncation N = {1}")]
    CoefficientOutOfRange(usize, usize),
    #[error("coefficient n = {level} has momentum degree {found} > {level}")]
    XiDegreeTooHigh { level: usize, found: u32 },
    #[error("coefficient n = {level} has group-coordinate degree {found} > M = {bound}")]
    GroupDegreeTooHigh { level: usize, found: u32, bound: u32 },
    #[error("leading coefficient at v = 0 must be 1, found {0}")]
    LeadingUnitViolated(String),
    #[error("coefficient n = {0} at v = 0 must vanish, found {1}")]
    NotVanishingAtUnit(usize, String),
    #[error("coefficient n = {0} may only use x, xi and v variables")]
    ForeignVariables(usize),
    #[error("Lie element has {0} entries but the algebra has dimension {1}")]
    WrongDimension(usize, usize),
    #[error("operand depends on xi; operators act on functions of x only")]
    OperandDependsOnXi,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Serialized form: `{"N": .., "M": .., "P": [{"n": .., "poly": ".."}]}`.
/// Missing levels are zero; the leading level must be present.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct GSystemSpec {
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "M")]
    pub vdeg: u32,
    #[serde(rename = "P")]
    pub coefficients: Vec<GSystemCoeff>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct GSystemCoeff {
    pub n: usize,
    pub poly: String,
}

/// A validated candidate G-system over one action.
#[derive(Clone, Debug)]
pub struct GSystem {
    action: InfinitesimalAction,
    order: usize,
    vdeg: u32,
    p: Vec<MultiPoly>,
}

fn minus_i_pow(k: u32) -> GaussianRational {
    (-GaussianRational::i()).pow(k)
}

impl GSystem {
    pub fn new(
        action: InfinitesimalAction,
        order: usize,
        vdeg: u32,
        p: Vec<MultiPoly>,
    ) -> Result<Self, GSystemError> {
        assert_eq!(p.len(), order + 1, "expected one coefficient per hbar power");
        for (level, poly) in p.iter().enumerate() {
            if !poly.uses_only(&[Family::X, Family::Xi, Family::V]) {
                return Err(GSystemError::ForeignVariables(level));
            }
            let xi_deg = poly.degree_in_family(Family::Xi);
            if xi_deg as usize > level {
                return Err(GSystemError::XiDegreeTooHigh { level, found: xi_deg });
            }
            let v_deg = poly.degree_in_family(Family::V);
            if v_deg > vdeg {
                return Err(GSystemError::GroupDegreeTooHigh { level, found: v_deg, bound: vdeg });
            }
            let at_unit = poly.at_family_zero(Family::V);
            if level == 0 {
                if at_unit != MultiPoly::one(*poly.universe()) {
                    return Err(GSystemError::LeadingUnitViolated(at_unit.to_string()));
                }
            } else if !at_unit.is_zero() {
                return Err(GSystemError::NotVanishingAtUnit(level, at_unit.to_string()));
            }
        }
        Ok(GSystem { action, order, vdeg, p })
    }

    /// The trivial system: `P^0 = 1`, all higher coefficients zero.
    pub fn trivial(action: InfinitesimalAction, order: usize, vdeg: u32) -> Self {
        let universe = action.base_universe();
        let mut p = vec![MultiPoly::zero(universe); order + 1];
        p[0] = MultiPoly::one(universe);
        GSystem { action, order, vdeg, p }
    }

    pub fn from_spec(action: InfinitesimalAction, spec: &GSystemSpec) -> Result<Self, GSystemError> {
        let universe = action.base_universe();
        let mut p = vec![None; spec.order + 1];
        for entry in &spec.coefficients {
            if entry.n > spec.order {
                return Err(GSystemError::CoefficientOutOfRange(entry.n, spec.order));
            }
            if p[entry.n].is_some() {
                return Err(GSystemError::DuplicateCoefficient(entry.n));
            }
            p[entry.n] = Some(parse_poly(&entry.poly, universe)?);
        }
        if p[0].is_none() {
            return Err(GSystemError::MissingLeading);
        }
        let p = p
            .into_iter()
            .map(|entry| entry.unwrap_or_else(|| MultiPoly::zero(universe)))
            .collect();
        GSystem::new(action, spec.order, spec.vdeg, p)
    }

    pub fn from_json(action: InfinitesimalAction, src: &str) -> Result<Self, GSystemError> {
        let spec: GSystemSpec = serde_json::from_str(src)?;
        GSystem::from_spec(action, &spec)
    }

    pub fn action(&self) -> &InfinitesimalAction {
        &self.action
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vdeg(&self) -> u32 {
        self.vdeg
    }

    pub fn coefficient(&self, level: usize) -> &MultiPoly {
        &self.p[level]
    }

    /// The amplitude as an hbar-series over `universe` with the formal
    /// `v`-slots left in place.
    pub fn series(&self, universe: VarUniverse, order: usize) -> Result<HbarSeries, GSystemError> {
        let mut coeffs = Vec::with_capacity(order + 1);
        for level in 0..=order {
            if level < self.p.len() {
                coeffs.push(self.p[level].into_universe(universe)?);
            } else {
                coeffs.push(MultiPoly::zero(universe));
            }
        }
        Ok(HbarSeries::from_coeffs(coeffs))
    }

    /// The amplitude evaluated on a Lie element: formal `v`-slots
    /// substituted by the entries of `v`, group degree truncated at `vdeg`.
    pub fn at_element(
        &self,
        universe: VarUniverse,
        v: &[MultiPoly],
        order: usize,
        vdeg: u32,
    ) -> Result<HbarSeries, GSystemError> {
        let n = self.action.algebra().dim();
        if v.len() != n {
            return Err(GSystemError::WrongDimension(v.len(), n));
        }
        let bindings: BTreeMap<Var, MultiPoly> =
            (1..=n as u32).map(|a| (Var::v(a), v[a as usize - 1].clone())).collect();
        let mut coeffs = Vec::with_capacity(order + 1);
        for level in 0..=order {
            if level < self.p.len() {
                let lifted = self.p[level].into_universe(universe)?;
                coeffs.push(lifted.substitute(&bindings)?.truncate_group_degree(vdeg));
            } else {
                coeffs.push(MultiPoly::zero(universe));
            }
        }
        Ok(HbarSeries::from_coeffs(coeffs))
    }

    /// Applies `T_{exp(v)}` to `psi`.  The entries of `v` may be any
    /// polynomials in group coordinates (generic `v`-block variables,
    /// BCH combinations, or curve parameters `t*e_i`); `psi` may carry
    /// parameters but must not depend on `xi`.
    pub fn t_apply(
        &self,
        v: &[MultiPoly],
        psi: &HbarSeries,
        order: usize,
        vdeg: u32,
    ) -> Result<HbarSeries, GSystemError> {
        let prepared = self.prepare(*psi.universe(), v, order, vdeg)?;
        self.t_apply_prepared(&prepared, psi, order, vdeg)
    }

    /// Precomputes the element-dependent data of `T_{exp(v)}` — the
    /// amplitude at the element and the flow substitution — so that many
    /// operands can be processed without redoing the Lie series.
    pub fn prepare(
        &self,
        universe: VarUniverse,
        v: &[MultiPoly],
        order: usize,
        vdeg: u32,
    ) -> Result<PreparedElement, GSystemError> {
        let amplitude = self.at_element(universe, v, order, vdeg)?;
        let flow = flow_at(&self.action, universe, v, vdeg)?;
        let flow_map: BTreeMap<Var, MultiPoly> = flow
            .into_iter()
            .enumerate()
            .map(|(j, f)| (Var::x(j as u32 + 1), f))
            .collect();
        Ok(PreparedElement { amplitude, flow_map })
    }

    /// `t_apply` against precomputed element data.
    pub fn t_apply_prepared(
        &self,
        prepared: &PreparedElement,
        psi: &HbarSeries,
        order: usize,
        vdeg: u32,
    ) -> Result<HbarSeries, GSystemError> {
        let universe = *psi.universe();
        for c in psi.coeffs() {
            if c.degree_in_family(Family::Xi) > 0 {
                return Err(GSystemError::OperandDependsOnXi);
            }
        }
        let flow_map = &prepared.flow_map;
        let mut derived_cache: BTreeMap<Vec<(Var, u32)>, HbarSeries> = BTreeMap::new();
        let mut out = HbarSeries::zero(universe, order);
        for (level, pl) in prepared.amplitude.coeffs().iter().enumerate() {
            for (xi_mono, coeff) in pl.split_by_family(Family::Xi) {
                let k = xi_mono.total_degree();
                if level + k as usize > order {
                    continue;
                }
                let key: Vec<(Var, u32)> = xi_mono.factors().to_vec();
                if !derived_cache.contains_key(&key) {
                    let mut flowed = Vec::with_capacity(psi.coeffs().len());
                    for c in psi.coeffs() {
                        let mut dc = c.clone();
                        for &(xv, e) in &key {
                            dc = dc.diff(Var::x(xv.index), e);
                            if dc.is_zero() {
                                break;
                            }
                        }
                        flowed.push(dc.substitute(flow_map)?.truncate_group_degree(vdeg));
                    }
                    derived_cache.insert(key.clone(), HbarSeries::from_coeffs(flowed));
                }
                let dpsi = &derived_cache[&key];
                if dpsi.is_zero() {
                    continue;
                }
                let term = dpsi
                    .mul_poly(&coeff)
                    .scale(&minus_i_pow(k))
                    .shift_up(level + k as usize)
                    .padded(order)
                    .truncated(order)
                    .truncate_group_degree(vdeg);
                out = out.add(&term);
            }
        }
        Ok(out)
    }

    /// The amplitude differential on a degree-1 amplitude, evaluated on
    /// the pair of generic group elements `(exp(v), exp(w))`:
    /// `(da)_{v,w} = -a_{BCH(v,w)}`, over the two-block universe.
    pub fn coboundary(&self, order: usize, vdeg: u32) -> Result<HbarSeries, GSystemError> {
        let wide = self.action.base_universe().widened(2);
        let (v, w) = generic_pair(&self.action, wide)?;
        let z = bch(self.action.algebra(), &v, &w, vdeg as usize)?;
        let minus_one = -GaussianRational::one();
        Ok(self.at_element(wide, &z, order, vdeg)?.scale(&minus_one))
    }

    /// `d/dt T_{exp(t e_i)}` at `t = 0`, as a standard-ordered operator
    /// with a single hbar pole: `SymbolOperator::new(1, hbar * action)`.
    pub fn t_infinitesimal(&self, i: usize, order: usize) -> Result<SymbolOperator, GSystemError> {
        let universe = self.action.base_universe();
        let n = self.action.algebra().dim();
        let t = MultiPoly::var(universe, Var::t())?;
        let v: Vec<MultiPoly> = (0..n)
            .map(|a| if a == i { t.clone() } else { MultiPoly::zero(universe) })
            .collect();
        let inner = order + 1;
        let prepared = self.prepare(universe, &v, inner, self.vdeg.max(2))?;
        let symbol = symbol_extract(
            |psi| {
                let full = self
                    .t_apply_prepared(
                        &prepared,
                        &HbarSeries::from_poly(psi.clone(), inner),
                        inner,
                        self.vdeg.max(2),
                    )
                    .map_err(|e| QuantizeError::Action(e.to_string()))?;
                let sliced = full.map(|c| c.coeff_of_power(Var::t(), 1));
                Ok(sliced.shift_up(1).truncated(inner))
            },
            universe,
            order as u32 + 1,
            inner,
        )?;
        Ok(SymbolOperator::new(1, symbol))
    }

    /// The residual `coboundary(a) + amplitude_compose(a, a)`; zero on
    /// every coefficient visible below the truncation exactly when the
    /// candidate is a formal G-system to the tracked orders, equivalently
    /// when `T_{exp(v)} T_{exp(w)} = T_{exp(BCH(v,w))}`.
    pub fn mc_residual(&self, order: usize, vdeg: u32) -> Result<HbarSeries, GSystemError> {
        let composed = amplitude_compose(self, self, order, vdeg)?;
        let residual = composed.add(&self.coboundary(order, vdeg)?);
        Ok(visible_window(&residual))
    }

    /// Leading-coefficient inverse identity:
    /// `P^0(v; x) * P^0(-v; flow_v(x)) - 1`, the unit-pair slice of the
    /// Maurer-Cartan equation at hbar^0.
    pub fn leading_inverse_residual(&self, vdeg: u32) -> Result<MultiPoly, GSystemError> {
        let universe = self.action.base_universe();
        let n = self.action.algebra().dim();
        let v: Vec<MultiPoly> = (1..=n as u32)
            .map(|a| MultiPoly::var(universe, Var::v(a)))
            .collect::<Result<_, _>>()?;
        let neg: Vec<MultiPoly> = v.iter().map(MultiPoly::neg).collect();
        let flow = flow_at(&self.action, universe, &v, vdeg)?;
        let bind_neg: BTreeMap<Var, MultiPoly> =
            (1..=n as u32).map(|a| (Var::v(a), neg[a as usize - 1].clone())).collect();
        let bind_flow: BTreeMap<Var, MultiPoly> = flow
            .into_iter()
            .enumerate()
            .map(|(j, f)| (Var::x(j as u32 + 1), f))
            .collect();
        let transported = self.p[0].substitute(&bind_neg)?.substitute(&bind_flow)?;
        let product = self.p[0].mul(&transported).truncate_group_degree(vdeg);
        Ok(product.sub(&MultiPoly::one(universe)))
    }
}

/// Element-dependent data of one translation operator, reusable across
/// operands: the amplitude evaluated at the element and the flow as a
/// coordinate substitution.
#[derive(Clone, Debug)]
pub struct PreparedElement {
    amplitude: HbarSeries,
    flow_map: BTreeMap<Var, MultiPoly>,
}

/// The flow of `exp(-v)` for an arbitrary polynomial Lie element `v`:
/// the truncated Lie series `sum_k (1/k!) D^k x_j` with
/// `D = -sum_i v_i X^{e_i} . d/dx`, group degree capped at `vdeg`.
pub fn flow_at(
    action: &InfinitesimalAction,
    universe: VarUniverse,
    v: &[MultiPoly],
    vdeg: u32,
) -> Result<Vec<MultiPoly>, GSystemError> {
    let n = action.algebra().dim();
    if v.len() != n {
        return Err(GSystemError::WrongDimension(v.len(), n));
    }
    let fields: Vec<Vec<MultiPoly>> = (0..n)
        .map(|i| {
            action
                .field(i)
                .iter()
                .map(|c| c.into_universe(universe))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let derive = |f: &MultiPoly| -> Result<MultiPoly, GSystemError> {
        let mut out = MultiPoly::zero(universe);
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            for (k, field_k) in fields[i].iter().enumerate() {
                let df = f.diff(Var::x(k as u32 + 1), 1);
                if df.is_zero() {
                    continue;
                }
                out = out.checked_sub(&v[i].checked_mul(field_k)?.checked_mul(&df)?)?;
            }
        }
        Ok(out.truncate_group_degree(vdeg))
    };
    let mut out = Vec::with_capacity(action.space_dim());
    for j in 1..=action.space_dim() as u32 {
        let mut term = MultiPoly::var(universe, Var::x(j))?;
        let mut total = term.clone();
        for k in 1..=vdeg {
            term = derive(&term)?;
            if term.is_zero() {
                break;
            }
            let inv = GaussianRational::from_ratio(1, k as i64);
            term = term.scale(&inv);
            total = total.checked_add(&term)?;
        }
        out.push(total);
    }
    Ok(out)
}

fn generic_pair(
    action: &InfinitesimalAction,
    wide: VarUniverse,
) -> Result<(Vec<MultiPoly>, Vec<MultiPoly>), GSystemError> {
    let n = action.algebra().dim() as u32;
    let v = (1..=n)
        .map(|a| MultiPoly::var(wide, wide.v_in_block(0, a)))
        .collect::<Result<Vec<_>, _>>()?;
    let w = (1..=n)
        .map(|a| MultiPoly::var(wide, wide.v_in_block(1, a)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((v, w))
}

/// The composite amplitude `c` with `T^c_{(exp v, exp w)} = T^a_{exp v}
/// T^b_{exp w}`, recovered by symbol extraction along the flow at
/// `BCH(v, w)` (the composite of the two flows by the group law).
///
/// A momentum monomial `xi^beta` at `hbar^l` acts at `hbar^{l + |beta|}`,
/// so the extraction at truncation `order` determines the coefficients
/// with `l + |beta| <= order`; the rest are reported as zero.  Compare
/// through [`visible_window`].
pub fn amplitude_compose(
    a: &GSystem,
    b: &GSystem,
    order: usize,
    vdeg: u32,
) -> Result<HbarSeries, GSystemError> {
    let action = &a.action;
    let wide = action.base_universe().widened(2);
    let (v, w) = generic_pair(action, wide)?;
    let z = bch(action.algebra(), &v, &w, vdeg as usize)?;
    let flow = flow_at(action, wide, &z, vdeg)?;
    let prep_w = b.prepare(wide, &w, order, vdeg)?;
    let prep_v = a.prepare(wide, &v, order, vdeg)?;
    let composed = symbol_extract_along(
        |psi| {
            let inner = b
                .t_apply_prepared(
                    &prep_w,
                    &HbarSeries::from_poly(psi.into_universe(wide)?, order),
                    order,
                    vdeg,
                )
                .map_err(|e| QuantizeError::Action(e.to_string()))?;
            a.t_apply_prepared(&prep_v, &inner, order, vdeg)
                .map_err(|e| QuantizeError::Action(e.to_string()))
        },
        &flow,
        wide,
        order as u32,
        order,
        Some(vdeg),
    )?;
    Ok(composed.truncate_group_degree(vdeg))
}

/// Zeroes every coefficient the operator truncation cannot see: the
/// `xi^beta` sector of the `hbar^l` slot survives only when
/// `l + |beta|` is at most the series order.
pub fn visible_window(series: &HbarSeries) -> HbarSeries {
    let order = series.order();
    let coeffs = series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| {
            c.retain_monomials(|m| {
                m.factors()
                    .iter()
                    .filter(|&&(var, _)| var.family == Family::Xi)
                    .map(|&(_, e)| e)
                    .sum::<u32>() as usize
                    <= order - l
            })
        })
        .collect();
    HbarSeries::from_coeffs(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebra;
    use crate::parse::parse_poly;

    fn translations(d: usize) -> InfinitesimalAction {
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
        InfinitesimalAction::new(LieAlgebra::abelian(d), d, fields).unwrap()
    }

    fn dilation_like() -> InfinitesimalAction {
        // One-dimensional action generated by x^2 d/dx.
        let universe = VarUniverse::new(1, 1);
        let fields = vec![vec![parse_poly("x1^2", universe).unwrap()]];
        InfinitesimalAction::new(LieAlgebra::abelian(1), 1, fields).unwrap()
    }

    fn series(src: &str, u: VarUniverse, order: usize) -> HbarSeries {
        HbarSeries::from_poly(parse_poly(src, u).unwrap(), order)
    }

    #[test]
    fn trivial_translation_operator_is_pullback() {
        let action = translations(2);
        let u = action.base_universe();
        let a = GSystem::trivial(action, 2, 3);
        let v = vec![
            parse_poly("v1", u).unwrap(),
            parse_poly("v2", u).unwrap(),
        ];
        let psi = series("x1^2*x2", u, 2);
        let got = a.t_apply(&v, &psi, 2, 3).unwrap();
        assert_eq!(got.coeff(0), &parse_poly("(x1 - v1)^2*(x2 - v2)", u).unwrap());
        assert!(got.coeff(1).is_zero() && got.coeff(2).is_zero());
        // v = 0 leaves psi unchanged.
        let zero_v = vec![MultiPoly::zero(u); 2];
        assert_eq!(a.t_apply(&zero_v, &psi, 2, 3).unwrap(), psi);
    }

    #[test]
    fn trivial_quadratic_field_operator_composes_with_flow() {
        let action = dilation_like();
        let u = action.base_universe();
        let a = GSystem::trivial(action, 1, 3);
        let v = vec![parse_poly("v1", u).unwrap()];
        let got = a.t_apply(&v, &series("x1", u, 1), 1, 3).unwrap();
        assert_eq!(
            got.coeff(0),
            &parse_poly("x1 - v1*x1^2 + v1^2*x1^3 - v1^3*x1^4", u).unwrap()
        );
    }

    #[test]
    fn trivial_system_satisfies_maurer_cartan() {
        for action in [translations(2), dilation_like()] {
            let a = GSystem::trivial(action, 2, 4);
            let residual = a.mc_residual(2, 4).unwrap();
            assert!(residual.is_zero(), "residual {residual:?}");
        }
    }

    #[test]
    fn exponential_perturbation_satisfies_maurer_cartan() {
        // On translations the x-independent system P^l = (v1 xi1)^l / l!
        // composes exactly: symbols without x-dependence multiply
        // pointwise and BCH is plain addition.
        let action = translations(1);
        let u = action.base_universe();
        let p = vec![
            MultiPoly::one(u),
            parse_poly("v1*xi1", u).unwrap(),
            parse_poly("1/2*v1^2*xi1^2", u).unwrap(),
        ];
        let a = GSystem::new(action, 2, 4, p).unwrap();
        let residual = a.mc_residual(2, 4).unwrap();
        assert!(residual.is_zero(), "residual {residual:?}");
    }

    #[test]
    fn broken_system_fails_maurer_cartan_where_expected() {
        let action = translations(1);
        let u = action.base_universe();
        let p = vec![MultiPoly::one(u), parse_poly("v1*x1*xi1", u).unwrap(), MultiPoly::zero(u)];
        let a = GSystem::new(action, 2, 4, p).unwrap();
        let residual = a.mc_residual(2, 4).unwrap();
        // Composing transports the inner x-coefficient: the hbar^1 defect
        // is exactly -v1 w1 xi1 (w = second block variable).
        let wide = u.widened(2);
        assert!(residual.coeff(0).is_zero());
        assert_eq!(residual.coeff(1), &parse_poly("-v1*v2*xi1", wide).unwrap());
    }

    #[test]
    fn infinitesimal_generator_of_translations() {
        let action = translations(2);
        let u = action.base_universe();
        let a = GSystem::trivial(action, 2, 3);
        // d/dt of psi(x - t e_1) is -d/dx1: symbol -i xi1 under one pole.
        let got = a.t_infinitesimal(0, 2).unwrap();
        let want = SymbolOperator::new(1, series("-i*xi1", u, 3));
        assert_eq!(got, want);
        let psi = series("x1^2*x2", u, 2);
        let applied = got.apply(&psi).unwrap();
        assert_eq!(applied.coeff(0), &parse_poly("-2*x1*x2", u).unwrap());
    }

    #[test]
    fn infinitesimal_generator_sees_first_order_coefficients() {
        let action = translations(1);
        let u = action.base_universe();
        let p = vec![MultiPoly::one(u), parse_poly("v1*x1*xi1", u).unwrap(), MultiPoly::zero(u)];
        let a = GSystem::new(action, 2, 4, p).unwrap();
        let got = a.t_infinitesimal(0, 2).unwrap();
        let want = SymbolOperator::new(
            1,
            HbarSeries::from_coeffs(vec![
                parse_poly("-i*xi1", u).unwrap(),
                MultiPoly::zero(u),
                parse_poly("x1*xi1", u).unwrap(),
                MultiPoly::zero(u),
            ]),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn leading_inverse_identity() {
        let a = GSystem::trivial(dilation_like(), 1, 4);
        assert!(a.leading_inverse_residual(4).unwrap().is_zero());
        // A v-dependent leading coefficient that is not multiplicative
        // over the flow leaves a residual.
        let u = a.action().base_universe();
        let p = vec![parse_poly("1 + v1^2*x1", u).unwrap(), MultiPoly::zero(u)];
        let b = GSystem::new(dilation_like(), 1, 4, p).unwrap();
        assert!(!b.leading_inverse_residual(4).unwrap().is_zero());
    }

    #[test]
    fn validation_rejects_malformed_systems() {
        let action = translations(1);
        let u = action.base_universe();
        // Momentum degree above the level.
        let p = vec![MultiPoly::one(u), parse_poly("v1*xi1^2", u).unwrap()];
        assert!(matches!(
            GSystem::new(action.clone(), 1, 3, p),
            Err(GSystemError::XiDegreeTooHigh { level: 1, found: 2 })
        ));
        // Leading coefficient not normalized at the unit.
        let p = vec![parse_poly("2 + v1", u).unwrap(), MultiPoly::zero(u)];
        assert!(matches!(
            GSystem::new(action.clone(), 1, 3, p),
            Err(GSystemError::LeadingUnitViolated(_))
        ));
        // Higher coefficient with a constant term.
        let p = vec![MultiPoly::one(u), parse_poly("1 + v1", u).unwrap()];
        assert!(matches!(
            GSystem::new(action.clone(), 1, 3, p),
            Err(GSystemError::NotVanishingAtUnit(1, _))
        ));
        // JSON loader round trip and duplicate detection.
        let good = r#"{"N": 1, "M": 3, "P": [{"n": 0, "poly": "1"}, {"n": 1, "poly": "v1*xi1"}]}"#;
        let a = GSystem::from_json(action.clone(), good).unwrap();
        assert_eq!(a.coefficient(1), &parse_poly("v1*xi1", u).unwrap());
        let dupe = r#"{"N": 1, "M": 3, "P": [{"n": 0, "poly": "1"}, {"n": 0, "poly": "1"}]}"#;
        assert!(matches!(
            GSystem::from_json(action, dupe),
            Err(GSystemError::DuplicateCoefficient(0))
        ));
    }
}
