//! Graph-by-graph evaluation of the stationary-phase expansion.
//!
//! `amplitude` computes the bare value of one graph by summing over every
//! assignment of z-indices to edge ends: each internal vertex of valence
//! `m` contributes the `m`-th derivative tensor of the fluctuation phase
//! at the critical point, each external vertex the matching derivative of
//! its insertion, and each edge one propagator entry.  `expand` sums
//! `i^p (-1)^{V_int} hbar^p / |Aut|` times the amplitude over all graph
//! classes up to the requested power.
//!
//! For split-form phases the internal legs only couple through the primal
//! block and the primal-primal propagator block vanishes, so graphs with
//! internal-internal edges contribute zero; `expand` then enumerates only
//! externally attached graphs.  `expand_with(…, false)` forces the full
//! enumeration so the equivalence can be tested.

use super::enumerate::{enumerate_attached, enumerate_graphs};
use super::graph::FeynmanGraph;
use super::phase::{PhaseError, PhaseModel};
use crate::poly::MultiPoly;
use crate::scalar::GaussianRational;
use crate::series::HbarSeries;
use std::collections::BTreeMap;

/// Tensor and index-pair caches reused across the graphs of one
/// expansion.
struct Evaluator<'a> {
    model: &'a PhaseModel,
    order: usize,
    s_cache: BTreeMap<Vec<usize>, MultiPoly>,
    ext_cache: Vec<BTreeMap<Vec<usize>, HbarSeries>>,
    pair_cache: BTreeMap<(usize, usize), Vec<(usize, usize)>>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a PhaseModel, order: usize) -> Self {
        Evaluator {
            model,
            order,
            s_cache: BTreeMap::new(),
            ext_cache: vec![BTreeMap::new(); model.externals().len()],
            pair_cache: BTreeMap::new(),
        }
    }

    fn s_tensor(&mut self, sorted: &[usize]) -> Result<&MultiPoly, PhaseError> {
        if !self.s_cache.contains_key(sorted) {
            let t = self.model.s_tensor(sorted)?;
            self.s_cache.insert(sorted.to_vec(), t);
        }
        Ok(&self.s_cache[sorted])
    }

    fn ext_tensor(&mut self, k: usize, sorted: &[usize]) -> Result<&HbarSeries, PhaseError> {
        if !self.ext_cache[k].contains_key(sorted) {
            let vars: Vec<_> = sorted.iter().map(|&i| self.model.zvars()[i]).collect();
            let t = self.model.externals()[k].tensor(&vars, self.order)?;
            self.ext_cache[k].insert(sorted.to_vec(), t);
        }
        Ok(&self.ext_cache[k][sorted])
    }

    /// Index pairs `(i, j)` with a nonzero propagator entry, where `i`
    /// ranges over the legal indices of vertex `u` and `j` over those of
    /// `v`.  All internal vertices share one class, so the cache key
    /// collapses them.
    fn admissible(&mut self, u: usize, v: usize) -> &Vec<(usize, usize)> {
        let n_ext = self.model.externals().len();
        let class = |w: usize| if w < n_ext { w } else { n_ext };
        let key = (class(u), class(v));
        if !self.pair_cache.contains_key(&key) {
            let side = |c: usize| -> Vec<usize> {
                if c < n_ext {
                    self.model.external_support_indices(c)
                } else {
                    self.model.internal_support()
                }
            };
            let left = side(key.0);
            let right = side(key.1);
            let mut pairs = Vec::new();
            for &i in &left {
                for &j in &right {
                    if !self.model.propagator_entry(i, j).is_zero() {
                        pairs.push((i, j));
                    }
                }
            }
            self.pair_cache.insert(key, pairs);
        }
        &self.pair_cache[&key]
    }

    fn amplitude(&mut self, g: &FeynmanGraph) -> Result<HbarSeries, PhaseError> {
        let n_ext = self.model.externals().len();
        assert_eq!(g.n_ext(), n_ext, "graph and model disagree on external count");
        let total = n_ext + g.n_int();
        let mut instances = Vec::new();
        for (&(u, v), &mult) in g.edges() {
            for _ in 0..mult {
                instances.push((u, v));
            }
        }
        let valence: Vec<usize> = (0..total).map(|v| g.valence(v)).collect();
        let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); total];
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        let mut acc = HbarSeries::zero(self.model.universe(), self.order);
        self.assign(&instances, 0, &valence, &mut assigned, &mut chosen, &mut acc)?;
        Ok(acc)
    }

    fn assign(
        &mut self,
        instances: &[(usize, usize)],
        pos: usize,
        valence: &[usize],
        assigned: &mut Vec<Vec<usize>>,
        chosen: &mut Vec<(usize, usize)>,
        acc: &mut HbarSeries,
    ) -> Result<(), PhaseError> {
        let n_ext = self.model.externals().len();
        if pos == instances.len() {
            let mut poly = MultiPoly::one(self.model.universe());
            for &(i, j) in chosen.iter() {
                poly = poly.mul(self.model.propagator_entry(i, j));
            }
            for w in n_ext..assigned.len() {
                let mut idx = assigned[w].clone();
                idx.sort_unstable();
                let t = self.s_tensor(&idx)?.clone();
                poly = poly.mul(&t);
            }
            let mut series = HbarSeries::from_poly(poly, self.order);
            for k in 0..n_ext {
                let mut idx = assigned[k].clone();
                idx.sort_unstable();
                let t = self.ext_tensor(k, &idx)?.clone();
                series = series.mul(&t);
            }
            *acc = acc.add(&series);
            return Ok(());
        }
        let (u, v) = instances[pos];
        let pairs = self.admissible(u, v).clone();
        for (i, j) in pairs {
            assigned[u].push(i);
            assigned[v].push(j);
            chosen.push((i, j));
            // As soon as a vertex has all its legs, reject assignments
            // whose tensor vanishes.
            let mut viable = true;
            let endpoints: &[usize] = if u == v { &[u][..] } else { &[u, v][..] };
            for &w in endpoints {
                if assigned[w].len() == valence[w] {
                    let mut idx = assigned[w].clone();
                    idx.sort_unstable();
                    let dead = if w < n_ext {
                        self.ext_tensor(w, &idx)?.is_zero()
                    } else {
                        self.s_tensor(&idx)?.is_zero()
                    };
                    if dead {
                        viable = false;
                        break;
                    }
                }
            }
            if viable {
                self.assign(instances, pos + 1, valence, assigned, chosen, acc)?;
            }
            chosen.pop();
            assigned[u].pop();
            assigned[v].pop();
        }
        Ok(())
    }
}

/// Bare value of one graph: the Einstein sum over leg indices of vertex
/// tensors and propagator entries, without the power or symmetry
/// prefactor.
pub fn amplitude(
    graph: &FeynmanGraph,
    model: &PhaseModel,
    order: usize,
) -> Result<HbarSeries, PhaseError> {
    Evaluator::new(model, order).amplitude(graph)
}

/// Full expansion through `hbar^order`, using the attached-graph
/// enumeration when the phase permits it.
pub fn expand(model: &PhaseModel, order: usize) -> Result<HbarSeries, PhaseError> {
    expand_with(model, order, true)
}

/// Expansion with explicit control over the attached-graph shortcut.
pub fn expand_with(
    model: &PhaseModel,
    order: usize,
    prune: bool,
) -> Result<HbarSeries, PhaseError> {
    let n_ext = model.externals().len();
    let graphs = if prune && model.is_hyperbolic() {
        enumerate_attached(n_ext, order)
    } else {
        enumerate_graphs(n_ext, order)
    };
    let mut ev = Evaluator::new(model, order);
    let mut acc = HbarSeries::zero(model.universe(), order);
    for g in &graphs {
        let amp = ev.amplitude(g)?;
        if amp.is_zero() {
            continue;
        }
        let p = g.power();
        let mut scalar = GaussianRational::i().pow(p as u32);
        if g.n_int() % 2 == 1 {
            scalar = -scalar;
        }
        scalar = &scalar * &GaussianRational::from_ratio(1, g.aut() as i64);
        acc = acc.add(&amp.shift_up(p).scale(&scalar));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feynman::phase::ExternalFn;
    use crate::parse::parse_poly;
    use crate::vars::{Var, VarUniverse};
    use std::collections::BTreeMap;

    fn hyperbolic_pair(u: VarUniverse) -> Vec<Vec<GaussianRational>> {
        let one = GaussianRational::one();
        let zero = GaussianRational::zero;
        vec![vec![zero(), one.clone()], vec![one, zero()]]
    }

    /// Phase (1/2)z·Bz + u^3/6 with B hyperbolic in (u, w) = (v1, th1);
    /// externals f = w^3, g = 1.  The only surviving graph is the
    /// internal star with a triple edge to f, giving exactly hbar^2.
    #[test]
    fn cubic_star_value() {
        let u = VarUniverse::new(1, 1);
        let uvar = Var::v(1);
        let wvar = Var::th(1);
        let s_rest = parse_poly("1/6*v1^3", u).unwrap();
        let eval: BTreeMap<Var, MultiPoly> = [
            (uvar, MultiPoly::zero(u)),
            (wvar, MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(parse_poly("th1^3", u).unwrap(), vec![wvar], eval.clone());
        let g = ExternalFn::poly(parse_poly("1", u).unwrap(), vec![], eval.clone());
        let model = PhaseModel::from_hessian(
            u,
            vec![uvar, wvar],
            hyperbolic_pair(u),
            s_rest,
            vec![f, g],
        )
        .unwrap();
        let result = expand_with(&model, 3, false).unwrap();
        assert!(result.coeff(0).is_zero());
        assert!(result.coeff(1).is_zero());
        assert_eq!(result.coeff(2), &parse_poly("1", u).unwrap());
        assert!(result.coeff(3).is_zero());
    }

    /// Same phase, f = w^2 and g = w: the star now splits its legs
    /// between the two externals but the total is again hbar^2.
    #[test]
    fn cubic_star_split_legs() {
        let u = VarUniverse::new(1, 1);
        let uvar = Var::v(1);
        let wvar = Var::th(1);
        let s_rest = parse_poly("1/6*v1^3", u).unwrap();
        let eval: BTreeMap<Var, MultiPoly> = [
            (uvar, MultiPoly::zero(u)),
            (wvar, MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(parse_poly("th1^2", u).unwrap(), vec![wvar], eval.clone());
        let g = ExternalFn::poly(parse_poly("th1", u).unwrap(), vec![wvar], eval.clone());
        let model = PhaseModel::from_hessian(
            u,
            vec![uvar, wvar],
            hyperbolic_pair(u),
            s_rest,
            vec![f, g],
        )
        .unwrap();
        let result = expand_with(&model, 2, false).unwrap();
        assert!(result.coeff(0).is_zero());
        assert!(result.coeff(1).is_zero());
        assert_eq!(result.coeff(2), &parse_poly("1", u).unwrap());
    }

    /// Phase with cubic u^2 w / 2: the tadpole survives and fixes both
    /// the sign convention and the loop combinatorics: the result is
    /// exactly -i hbar for f = w, g = 1.
    #[test]
    fn tadpole_sign() {
        let u = VarUniverse::new(1, 1);
        let uvar = Var::v(1);
        let wvar = Var::th(1);
        let s_rest = parse_poly("1/2*v1^2*th1", u).unwrap();
        let eval: BTreeMap<Var, MultiPoly> = [
            (uvar, MultiPoly::zero(u)),
            (wvar, MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(parse_poly("th1", u).unwrap(), vec![wvar], eval.clone());
        let g = ExternalFn::poly(parse_poly("1", u).unwrap(), vec![], eval.clone());
        let model = PhaseModel::from_hessian(
            u,
            vec![uvar, wvar],
            hyperbolic_pair(u),
            s_rest,
            vec![f, g],
        )
        .unwrap();
        let result = expand_with(&model, 2, false).unwrap();
        assert!(result.coeff(0).is_zero());
        assert_eq!(result.coeff(1), &parse_poly("-i", u).unwrap());
    }

    /// Purely quadratic split-form phase whose dual-dual propagator block
    /// carries a parameter: the external loop on f = th1^2 contributes
    /// -i a hbar with a = -K read from the generating function.
    #[test]
    fn quadratic_external_loop() {
        let u = VarUniverse::new(1, 1);
        // W = x1 xi1 + (1/2) x1 v1^2: K = x1, so the th-th propagator is
        // -x1 and the loop gives (1/2)·2·(-x1)·i hbar = -i x1 hbar.
        let w = parse_poly("x1*xi1 + 1/2*x1*v1^2", u).unwrap();
        let crit: BTreeMap<Var, MultiPoly> = [
            (Var::v(1), MultiPoly::zero(u)),
            (Var::th(1), MultiPoly::zero(u)),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(parse_poly("th1^2", u).unwrap(), vec![Var::th(1)], crit);
        let model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![f],
        )
        .unwrap();
        let result = expand(&model, 2).unwrap();
        assert!(result.coeff(0).is_zero());
        assert_eq!(result.coeff(1), &parse_poly("-i*x1", u).unwrap());
        assert!(result.coeff(2).is_zero());
    }

    /// The empty graph reproduces the product of critical values.
    #[test]
    fn order_zero_is_pointwise_product() {
        let u = VarUniverse::new(1, 1);
        let uvar = Var::v(1);
        let wvar = Var::th(1);
        let eval: BTreeMap<Var, MultiPoly> = [
            (uvar, MultiPoly::zero(u)),
            (wvar, parse_poly("x1*xi1", u).unwrap()),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(parse_poly("th1^2", u).unwrap(), vec![wvar], eval.clone());
        let g = ExternalFn::poly(parse_poly("th1 + 1", u).unwrap(), vec![wvar], eval.clone());
        let model = PhaseModel::from_hessian(
            u,
            vec![uvar, wvar],
            hyperbolic_pair(u),
            MultiPoly::zero(u),
            vec![f, g],
        )
        .unwrap();
        let result = expand_with(&model, 0, false).unwrap();
        let expect = parse_poly("x1^2*xi1^2*(x1*xi1 + 1)", u).unwrap();
        assert_eq!(result.coeff(0), &expect);
    }

    /// Pruned and unpruned expansions agree for a split-form phase with a
    /// genuine cubic remainder.
    #[test]
    fn attached_pruning_is_exact() {
        let u = VarUniverse::new(1, 1);
        let w = parse_poly("x1*xi1 + x1*v1^2 + xi1*v1^3 + v1^4", u).unwrap();
        let crit: BTreeMap<Var, MultiPoly> = [
            (Var::v(1), MultiPoly::zero(u)),
            (Var::th(1), parse_poly("0", u).unwrap()),
        ]
        .into_iter()
        .collect();
        let f = ExternalFn::poly(
            parse_poly("th1^2 + v1*th1", u).unwrap(),
            vec![Var::v(1), Var::th(1)],
            crit.clone(),
        );
        let g = ExternalFn::poly(parse_poly("th1^3", u).unwrap(), vec![Var::th(1)], crit);
        let model = PhaseModel::from_generating(
            u,
            &w,
            vec![Var::v(1)],
            vec![Var::th(1)],
            vec![f, g],
        )
        .unwrap();
        let fast = expand_with(&model, 3, true).unwrap();
        let slow = expand_with(&model, 3, false).unwrap();
        assert_eq!(fast, slow);
    }
}
