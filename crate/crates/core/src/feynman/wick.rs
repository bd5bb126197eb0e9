//! Independent evaluation of the stationary-phase expansion by direct
//! moment summation, with no reference to graphs.
//!
//! The exponential of the interaction is expanded into multisets of
//! Taylor terms of the fluctuation phase, each external is Taylor
//! expanded around the critical point, and the resulting Gaussian moment
//! is computed by summing over pair-type count matrices.  Sharing no
//! combinatorial bookkeeping with the graph evaluator, this provides an
//! end-to-end cross-check of symmetry factors, signs, and powers.

use super::phase::{PhaseError, PhaseModel};
use crate::poly::MultiPoly;
use crate::scalar::GaussianRational;
use crate::series::HbarSeries;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::collections::BTreeMap;

/// One Taylor term of the interaction: a z-multi-index (sorted, with
/// multiplicity) and the coefficient `d^alpha S(c) / alpha!`.
struct Interaction {
    alpha: Vec<usize>,
    value: MultiPoly,
}

/// One Taylor term of an external: exponent vector over its support
/// positions and the coefficient `d^beta f(c) / beta!`.
struct ExternalTerm {
    counts: BTreeMap<usize, usize>,
    value: HbarSeries,
}

fn factorial(n: usize) -> BigRational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// `alpha!` for a sorted multi-index: product of the factorials of the
/// repetition counts.
fn multi_factorial(sorted: &[usize]) -> BigRational {
    let mut acc = BigRational::one();
    let mut run = 0usize;
    for (k, &i) in sorted.iter().enumerate() {
        run += 1;
        if k + 1 == sorted.len() || sorted[k + 1] != i {
            acc *= factorial(run);
            run = 0;
        }
    }
    acc
}

/// All sorted multi-indices over `support` with the given length.
fn multi_indices(support: &[usize], len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(support: &[usize], from: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for p in from..support.len() {
            cur.push(support[p]);
            rec(support, p, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(support, 0, len, &mut cur, &mut out);
    out
}

/// Nonzero interaction Taylor terms of all orders.
fn interactions(model: &PhaseModel) -> Result<Vec<Interaction>, PhaseError> {
    let support = model.internal_support();
    let mut out = Vec::new();
    for len in 3..=model.max_vertex_order() {
        for alpha in multi_indices(&support, len) {
            let tensor = model.s_tensor(&alpha)?;
            if tensor.is_zero() {
                continue;
            }
            let inv = GaussianRational::from_real(multi_factorial(&alpha).recip());
            out.push(Interaction { alpha: alpha.clone(), value: tensor.scale(&inv) });
        }
    }
    Ok(out)
}

/// Nonzero external Taylor terms, bounded by the polynomial degrees of
/// the insertion.
fn external_terms(
    model: &PhaseModel,
    k: usize,
    order: usize,
) -> Result<Vec<ExternalTerm>, PhaseError> {
    let support = model.external_support_indices(k);
    let ext = &model.externals()[k];
    let bounds: Vec<usize> = support
        .iter()
        .map(|&i| ext.max_degree(model.zvars()[i]) as usize)
        .collect();
    let mut out = Vec::new();
    let mut counts = vec![0usize; support.len()];
    loop {
        let beta: Vec<_> = support
            .iter()
            .zip(&counts)
            .flat_map(|(&i, &c)| std::iter::repeat(model.zvars()[i]).take(c))
            .collect();
        let tensor = ext.tensor(&beta, order)?;
        if !tensor.is_zero() {
            let mut fact = BigRational::one();
            for &c in &counts {
                fact *= factorial(c);
            }
            let inv = GaussianRational::from_real(fact.recip());
            out.push(ExternalTerm {
                counts: support
                    .iter()
                    .zip(&counts)
                    .filter(|&(_, &c)| c > 0)
                    .map(|(&i, &c)| (i, c))
                    .collect(),
                value: tensor.scale(&inv),
            });
        }
        // Odometer over the degree box.
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return Ok(out);
            }
            if counts[pos] < bounds[pos] {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// Gaussian moment of the monomial with index counts `m`: sum over
/// symmetric pair-count matrices of the number of matchings of that type
/// times the product of propagator entries.
fn moment(model: &PhaseModel, m: &BTreeMap<usize, usize>) -> MultiPoly {
    let universe = model.universe();
    let idx: Vec<usize> = m.keys().copied().collect();
    let counts: Vec<usize> = m.values().copied().collect();
    let total: usize = counts.iter().sum();
    if total % 2 == 1 {
        return MultiPoly::zero(universe);
    }
    let mut acc = MultiPoly::zero(universe);
    // rem[r]: legs of index idx[r] not yet paired with earlier indices.
    let mut rem = counts.clone();
    let mut count_factor = BigRational::one();
    for &c in &counts {
        count_factor *= factorial(c);
    }
    fn rec(
        model: &PhaseModel,
        idx: &[usize],
        rem: &mut Vec<usize>,
        r: usize,
        row: usize,
        weight: BigRational,
        value: MultiPoly,
        acc: &mut MultiPoly,
    ) {
        if r == idx.len() {
            acc_add(acc, value.scale(&GaussianRational::from_real(weight)));
            return;
        }
        // `row` walks the partners s >= r for index position r.
        if row == idx.len() {
            if rem[r] == 0 {
                rec(model, idx, rem, r + 1, r + 1, weight, value, acc);
            }
            return;
        }
        if row == r {
            // Pairs internal to r: a_rr pairs consume 2 a_rr legs.
            let max_self = rem[r] / 2;
            let prop = model.propagator_entry(idx[r], idx[r]).clone();
            for a in 0..=max_self {
                if a > 0 && prop.is_zero() {
                    break;
                }
                let mut w = weight.clone();
                for _ in 0..a {
                    w /= BigRational::from_integer(2.into());
                }
                w /= factorial(a);
                let mut val = value.clone();
                for _ in 0..a {
                    val = val.mul(&prop);
                }
                rem[r] -= 2 * a;
                rec(model, idx, rem, r, row + 1, w, val, acc);
                rem[r] += 2 * a;
            }
        } else {
            let cap = rem[r].min(rem[row]);
            let prop = model.propagator_entry(idx[r], idx[row]).clone();
            for a in 0..=cap {
                if a > 0 && prop.is_zero() {
                    break;
                }
                let mut w = weight.clone();
                w /= factorial(a);
                let mut val = value.clone();
                for _ in 0..a {
                    val = val.mul(&prop);
                }
                rem[r] -= a;
                rem[row] -= a;
                rec(model, idx, rem, r, row + 1, w, val, acc);
                rem[r] += a;
                rem[row] += a;
            }
        }
    }
    rec(
        model,
        &idx,
        &mut rem,
        0,
        0,
        count_factor,
        MultiPoly::one(universe),
        &mut acc,
    );
    acc
}

fn acc_add(acc: &mut MultiPoly, delta: MultiPoly) {
    *acc = acc.add(&delta);
}

/// Expansion through `hbar^order` by direct moment summation.
pub fn wick_expand(model: &PhaseModel, order: usize) -> Result<HbarSeries, PhaseError> {
    let universe = model.universe();
    let inters = interactions(model)?;
    let n_ext = model.externals().len();
    let mut ext_terms = Vec::with_capacity(n_ext);
    for k in 0..n_ext {
        let terms = external_terms(model, k, order)?;
        if terms.is_empty() {
            // An external vanishing identically kills every contribution.
            return Ok(HbarSeries::zero(universe, order));
        }
        ext_terms.push(terms);
    }
    let mut acc = HbarSeries::zero(universe, order);

    // Multisets of interactions: nondecreasing term indices.  Power grows
    // by at least |alpha|/2 - 1 >= 1/2 per insertion, so the recursion
    // bottoms out quickly.
    let mut picks: Vec<usize> = Vec::new();
    enumerate_insertions(model, &inters, &ext_terms, order, 0, &mut picks, &mut acc)?;
    Ok(acc)
}

fn enumerate_insertions(
    model: &PhaseModel,
    inters: &[Interaction],
    ext_terms: &[Vec<ExternalTerm>],
    order: usize,
    from: usize,
    picks: &mut Vec<usize>,
    acc: &mut HbarSeries,
) -> Result<(), PhaseError> {
    let ends: usize = picks.iter().map(|&t| inters[t].alpha.len()).sum();
    let k = picks.len();
    // Minimum achievable power for this insertion multiset.
    if (ends + 1) / 2 > order + k {
        return Ok(());
    }
    contribute(model, inters, ext_terms, order, picks, acc)?;
    for t in from..inters.len() {
        picks.push(t);
        enumerate_insertions(model, inters, ext_terms, order, t, picks, acc)?;
        picks.pop();
    }
    Ok(())
}

/// Contribution of one fixed insertion multiset, summed over external
/// Taylor terms and pairings.
fn contribute(
    model: &PhaseModel,
    inters: &[Interaction],
    ext_terms: &[Vec<ExternalTerm>],
    order: usize,
    picks: &[usize],
    acc: &mut HbarSeries,
) -> Result<(), PhaseError> {
    let universe = model.universe();
    let k = picks.len();
    // Multiset weight: product of term values over repetition factorials.
    let mut weight = MultiPoly::one(universe);
    let mut run = 0usize;
    for (pos, &t) in picks.iter().enumerate() {
        weight = weight.mul(&inters[t].value);
        run += 1;
        if pos + 1 == picks.len() || picks[pos + 1] != t {
            let inv = GaussianRational::from_real(factorial(run).recip());
            weight = weight.scale(&inv);
            run = 0;
        }
    }
    let mut base_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &t in picks {
        for &i in &inters[t].alpha {
            *base_counts.entry(i).or_insert(0) += 1;
        }
    }
    // Cartesian product over one Taylor term per external.
    let mut choice = vec![0usize; ext_terms.len()];
    loop {
        let mut m = base_counts.clone();
        let mut ext_value = HbarSeries::one(universe, order);
        for (e, &c) in choice.iter().enumerate() {
            let term = &ext_terms[e][c];
            for (&i, &cnt) in &term.counts {
                *m.entry(i).or_insert(0) += cnt;
            }
            ext_value = ext_value.mul(&term.value);
        }
        let total: usize = m.values().sum();
        if total % 2 == 0 && !ext_value.is_zero() {
            let pairs = total / 2;
            if pairs >= k && pairs - k <= order {
                let power = pairs - k;
                let mom = moment(model, &m);
                if !mom.is_zero() {
                    let mut scalar = GaussianRational::i().pow(power as u32);
                    if k % 2 == 1 {
                        scalar = -scalar;
                    }
                    let contrib = ext_value
                        .mul_poly(&weight.mul(&mom))
                        .shift_up(power)
                        .scale(&scalar);
                    *acc = acc.add(&contrib);
                }
            }
        }
        // Odometer over external term choices.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(());
            }
            if choice[pos] + 1 < ext_terms[pos].len() {
                choice[pos] += 1;
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feynman::expand::expand_with;
    use crate::feynman::phase::{ExternalFn, PhaseModel};
    use crate::parse::parse_poly;
    use crate::vars::{Var, VarUniverse};

    fn hyperbolic_pair() -> Vec<Vec<GaussianRational>> {
        let one = GaussianRational::one();
        let zero = GaussianRational::zero;
        vec![vec![zero(), one.clone()], vec![one, zero()]]
    }

    fn zero_eval(u: VarUniverse) -> BTreeMap<Var, MultiPoly> {
        [
            (Var::v(1), MultiPoly::zero(u)),
            (Var::th(1), MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn moment_of_two_legs_is_propagator() {
        let u = VarUniverse::new(1, 1);
        let model = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hyperbolic_pair(),
            MultiPoly::zero(u),
            vec![],
        )
        .unwrap();
        // <z0 z1> = B^{-1}[0][1] = 1; <z0 z0> = 0; <z0^2 z1^2> = 2 + 0.
        let m: BTreeMap<usize, usize> = [(0, 1), (1, 1)].into_iter().collect();
        assert_eq!(moment(&model, &m), parse_poly("1", u).unwrap());
        let m: BTreeMap<usize, usize> = [(0, 2)].into_iter().collect();
        assert!(moment(&model, &m).is_zero());
        let m: BTreeMap<usize, usize> = [(0, 2), (1, 2)].into_iter().collect();
        assert_eq!(moment(&model, &m), parse_poly("2", u).unwrap());
        let m: BTreeMap<usize, usize> = [(0, 1)].into_iter().collect();
        assert!(moment(&model, &m).is_zero());
    }

    #[test]
    fn cubic_star_matches_hand_value() {
        let u = VarUniverse::new(1, 1);
        let f = ExternalFn::poly(parse_poly("th1^3", u).unwrap(), vec![Var::th(1)], zero_eval(u));
        let g = ExternalFn::poly(parse_poly("1", u).unwrap(), vec![], zero_eval(u));
        let model = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hyperbolic_pair(),
            parse_poly("1/6*v1^3", u).unwrap(),
            vec![f, g],
        )
        .unwrap();
        let result = wick_expand(&model, 3).unwrap();
        assert!(result.coeff(0).is_zero());
        assert!(result.coeff(1).is_zero());
        assert_eq!(result.coeff(2), &parse_poly("1", u).unwrap());
        assert!(result.coeff(3).is_zero());
    }

    #[test]
    fn tadpole_matches_hand_value() {
        let u = VarUniverse::new(1, 1);
        let f = ExternalFn::poly(parse_poly("th1", u).unwrap(), vec![Var::th(1)], zero_eval(u));
        let model = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hyperbolic_pair(),
            parse_poly("1/2*v1^2*th1", u).unwrap(),
            vec![f],
        )
        .unwrap();
        let result = wick_expand(&model, 2).unwrap();
        assert!(result.coeff(0).is_zero());
        assert_eq!(result.coeff(1), &parse_poly("-i", u).unwrap());
    }

    /// The decisive cross-check: graph evaluation and direct moment
    /// summation agree on a split-form phase with mixed cubic and quartic
    /// terms and two nontrivial externals.
    #[test]
    fn agrees_with_graph_expansion() {
        let u = VarUniverse::new(1, 1);
        let w = parse_poly(
            "x1*xi1 + x1*v1^2 + xi1*v1^3 + v1^4 + v1^3",
            u,
        )
        .unwrap();
        let crit: BTreeMap<Var, MultiPoly> = [
            (Var::v(1), MultiPoly::zero(u)),
            (Var::th(1), MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(
            parse_poly("th1^2 + v1*th1", u).unwrap(),
            vec![Var::v(1), Var::th(1)],
            crit.clone(),
        );
        let g = ExternalFn::poly(parse_poly("th1^2", u).unwrap(), vec![Var::th(1)], crit);
        let model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![f, g],
        )
        .unwrap();
        for order in 0..=3 {
            let graphs = expand_with(&model, order, false).unwrap();
            let attached = expand_with(&model, order, true).unwrap();
            let moments = wick_expand(&model, order).unwrap();
            assert_eq!(graphs, moments, "order {order}");
            assert_eq!(attached, moments, "order {order}");
        }
    }

    /// Same agreement on a hand Hessian with a self-coupled propagator
    /// entry, so self-pairings and internal loops are exercised.
    #[test]
    fn agrees_with_graph_expansion_self_coupling() {
        let u = VarUniverse::new(1, 1);
        let one = GaussianRational::one();
        let zero = GaussianRational::zero;
        // B = [[0, 1], [1, 1]]: det = -1, signature 0; B^{-1} has a
        // nonzero (0,0) entry, so internal legs can self-pair.
        let hessian = vec![vec![zero(), one.clone()], vec![one.clone(), one.clone()]];
        let f = ExternalFn::poly(
            parse_poly("th1^2 + th1", u).unwrap(),
            vec![Var::th(1)],
            zero_eval(u),
        );
        let g = ExternalFn::poly(parse_poly("th1", u).unwrap(), vec![Var::th(1)], zero_eval(u));
        let model = PhaseModel::from_hessian(
            u,
            vec![Var::v(1), Var::th(1)],
            hessian,
            parse_poly("1/6*v1^3 + 1/2*v1^2*th1", u).unwrap(),
            vec![f, g],
        )
        .unwrap();
        for order in 0..=3 {
            let graphs = expand_with(&model, order, false).unwrap();
            let moments = wick_expand(&model, order).unwrap();
            assert_eq!(graphs, moments, "order {order}");
        }
    }
}
