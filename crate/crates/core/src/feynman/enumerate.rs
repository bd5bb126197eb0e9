//! Exhaustive enumeration of Feynman graph isomorphism classes by power.
//!
//! The power of a graph is `|E| - |V_int|`.  Since every internal vertex
//! has valence >= 3, a graph of power p satisfies `|V_int| <= 2p` and
//! `|E| <= 3p`, so the class list for a power bound is finite.  A second
//! enumerator produces only externally-attached graphs (no edge between
//! two internal vertices); for hyperbolic phase models all other classes
//! have vanishing amplitude.

use super::graph::{EdgeMultiset, FeynmanGraph};
use std::collections::BTreeSet;

/// All isomorphism classes with power at most `max_power`, internal
/// valence >= 3, sorted deterministically.
pub fn enumerate_graphs(n_ext: usize, max_power: usize) -> Vec<FeynmanGraph> {
    assert!(n_ext >= 1, "need at least one external vertex");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n_int in 0..=2 * max_power {
        for power in 0..=max_power {
            let n_edges = power + n_int;
            if 2 * n_edges < 3 * n_int {
                continue;
            }
            let mut pairs = Vec::new();
            let total = n_ext + n_int;
            for u in 0..total {
                for v in u..total {
                    pairs.push((u, v));
                }
            }
            let mut edges = EdgeMultiset::new();
            distribute(
                n_ext,
                n_int,
                &pairs,
                0,
                n_edges,
                &mut edges,
                &mut |edges: &EdgeMultiset| {
                    let g = FeynmanGraph::new(n_ext, n_int, edges.clone());
                    if g.is_valid() && seen.insert(g.clone()) {
                        out.push(g);
                    }
                },
            );
        }
    }
    out.sort();
    out
}

/// Distributes `remaining` edges over `pairs[from..]`, pruning on internal
/// valence: once every pair touching an internal vertex is fixed, the
/// vertex must have valence >= 3, and unfinished internal vertices must
/// still be able to reach valence 3 with the edges left.
fn distribute(
    n_ext: usize,
    n_int: usize,
    pairs: &[(usize, usize)],
    from: usize,
    remaining: usize,
    edges: &mut EdgeMultiset,
    emit: &mut impl FnMut(&EdgeMultiset),
) {
    if from == pairs.len() {
        if remaining == 0 {
            emit(edges);
        }
        return;
    }
    let valence = |edges: &EdgeMultiset, v: usize| -> usize {
        edges
            .iter()
            .map(|(&(a, b), &m)| (a == v) as usize * m + (b == v) as usize * m)
            .sum()
    };
    let pair = pairs[from];
    let total = n_ext + n_int;
    // Pairs are ordered with nondecreasing first coordinate, so no pair
    // after `from` touches vertex w once the next first coordinate
    // exceeds w.
    let finished = |w: usize| from + 1 == pairs.len() || pairs[from + 1].0 > w;
    for mult in 0..=remaining {
        if mult > 0 {
            *edges.entry(pair).or_insert(0) += 1;
        }
        let mut feasible = true;
        for w in n_ext..total {
            let val = valence(edges, w);
            if finished(w) {
                if val < 3 {
                    feasible = false;
                    break;
                }
            } else if val + 2 * (remaining - mult) < 3 {
                feasible = false;
                break;
            }
        }
        if feasible {
            distribute(n_ext, n_int, pairs, from + 1, remaining - mult, edges, emit);
        }
    }
    // The loop left multiplicity `remaining` on this pair; undo it.
    if remaining > 0 {
        edges.remove(&pair);
    }
}

/// Externally-attached classes only: every edge touches an external
/// vertex.  Exactly the classes with nonzero amplitude for hyperbolic
/// phases; much smaller than the full list.
pub fn enumerate_attached(n_ext: usize, max_power: usize) -> Vec<FeynmanGraph> {
    assert!(n_ext >= 1);
    // External-external edge patterns: multiplicities for each unordered
    // external pair (loops included).
    let mut ext_pairs = Vec::new();
    for u in 0..n_ext {
        for v in u..n_ext {
            ext_pairs.push((u, v));
        }
    }
    // Internal vertex types: distributions over externals with total >= 3.
    // A type of total valence t contributes power t - 1 >= 2.
    let mut types: Vec<Vec<usize>> = Vec::new();
    let max_valence = max_power + 1;
    let mut current = vec![0usize; n_ext];
    gen_types(0, n_ext, max_valence, &mut current, &mut types);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    // Choose a multiset of internal types with total power <= max_power,
    // then distribute the remaining power over external-external edges.
    let mut chosen: Vec<usize> = Vec::new();
    gen_multisets(&types, 0, max_power, &mut chosen, &mut |chosen| {
        let used: usize = chosen
            .iter()
            .map(|&t| types[t].iter().sum::<usize>() - 1)
            .sum();
        let budget = max_power - used;
        // Distribute 0..=budget edges over external pairs.
        let mut ext_edges = vec![0usize; ext_pairs.len()];
        gen_ext_edges(0, budget, &mut ext_edges, &mut |ext_edges: &[usize]| {
            let mut edges = EdgeMultiset::new();
            for (k, &(u, v)) in ext_pairs.iter().enumerate() {
                if ext_edges[k] > 0 {
                    edges.insert((u, v), ext_edges[k]);
                }
            }
            for (i, &t) in chosen.iter().enumerate() {
                let vertex = n_ext + i;
                for (e, &mult) in types[t].iter().enumerate() {
                    if mult > 0 {
                        edges.insert((e, vertex), mult);
                    }
                }
            }
            let g = FeynmanGraph::new(n_ext, chosen.len(), edges);
            debug_assert!(g.is_valid() && g.power() <= max_power);
            if seen.insert(g.clone()) {
                out.push(g);
            }
        });
    });
    out.sort();
    out
}

fn gen_types(
    i: usize,
    n_ext: usize,
    max_total: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if i == n_ext {
        if current.iter().sum::<usize>() >= 3 {
            out.push(current.clone());
        }
        return;
    }
    let used: usize = current[..i].iter().sum();
    for m in 0..=(max_total - used) {
        current[i] = m;
        gen_types(i + 1, n_ext, max_total, current, out);
    }
    current[i] = 0;
}

/// Nondecreasing index multisets with total power within budget.
fn gen_multisets(
    types: &[Vec<usize>],
    min_type: usize,
    budget: usize,
    chosen: &mut Vec<usize>,
    emit: &mut impl FnMut(&Vec<usize>),
) {
    emit(chosen);
    for t in min_type..types.len() {
        let cost = types[t].iter().sum::<usize>() - 1;
        if cost <= budget {
            chosen.push(t);
            gen_multisets(types, t, budget - cost, chosen, emit);
            chosen.pop();
        }
    }
}

fn gen_ext_edges(
    i: usize,
    budget: usize,
    edges: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if i == edges.len() {
        emit(edges);
        return;
    }
    for m in 0..=budget {
        edges[i] = m;
        gen_ext_edges(i + 1, budget - m, edges, emit);
    }
    edges[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_zero_is_empty_graph() {
        let graphs = enumerate_graphs(2, 0);
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].num_edges(), 0);
        assert_eq!(graphs[0].n_int(), 0);
        let graphs = enumerate_graphs(1, 0);
        assert_eq!(graphs.len(), 1);
    }

    #[test]
    fn power_one_classes() {
        // Nine classes: empty; three external edge placements (0-0 loop,
        // 0-1 edge, 1-1 loop); figure-eight internal; two tadpoles; theta;
        // dumbbell.
        let graphs = enumerate_graphs(2, 1);
        assert_eq!(graphs.len(), 9);
        let theta: Vec<_> = graphs.iter().filter(|g| g.n_int() == 2).collect();
        assert_eq!(theta.len(), 2);
        let auts: BTreeSet<u64> = theta.iter().map(|g| g.aut()).collect();
        assert_eq!(auts, BTreeSet::from([8, 12]));
    }

    #[test]
    fn attached_subset_of_full() {
        for max_power in 0..=2 {
            let full = enumerate_graphs(2, max_power);
            let attached = enumerate_attached(2, max_power);
            let expected: Vec<_> = full
                .iter()
                .filter(|g| g.is_externally_attached())
                .cloned()
                .collect();
            assert_eq!(attached, expected, "power bound {max_power}");
        }
    }

    #[test]
    fn single_external_counts() {
        let graphs = enumerate_graphs(1, 1);
        // Empty; loop on the external; figure-eight; tadpole; theta; dumbbell.
        assert_eq!(graphs.len(), 6);
    }

    /// Independent brute-force oracle: enumerate every labeled multigraph
    /// on a fixed vertex set directly from edge lists, reduce modulo
    /// internal permutations by exhaustive comparison, and compare class
    /// counts.  Exponential; only run at tiny sizes.
    fn oracle_count(n_ext: usize, max_power: usize) -> usize {
        let mut classes: BTreeSet<FeynmanGraph> = BTreeSet::new();
        for n_int in 0..=2 * max_power {
            let total = n_ext + n_int;
            let mut pairs = Vec::new();
            for u in 0..total {
                for v in u..total {
                    pairs.push((u, v));
                }
            }
            for n_edges in 0..=(max_power + n_int) {
                // All multisets of size n_edges over the pair list.
                let mut stack = vec![(0usize, n_edges, EdgeMultiset::new())];
                while let Some((i, left, edges)) = stack.pop() {
                    if i == pairs.len() {
                        if left == 0 {
                            let g = FeynmanGraph::new(n_ext, n_int, edges);
                            if g.is_valid() && g.power() <= max_power {
                                classes.insert(g);
                            }
                        }
                        continue;
                    }
                    for m in 0..=left {
                        let mut e = edges.clone();
                        if m > 0 {
                            e.insert(pairs[i], m);
                        }
                        stack.push((i + 1, left - m, e));
                    }
                }
            }
        }
        classes.len()
    }

    #[test]
    fn oracle_agreement_small() {
        for n_ext in 1..=2 {
            for max_power in 0..=1 {
                assert_eq!(
                    enumerate_graphs(n_ext, max_power).len(),
                    oracle_count(n_ext, max_power),
                    "n_ext={n_ext} max_power={max_power}"
                );
            }
        }
    }

    #[test]
    fn oracle_agreement_power_two() {
        assert_eq!(enumerate_graphs(2, 2).len(), oracle_count(2, 2));
    }

    #[test]
    fn golden_counts() {
        // Frozen class counts; the small ones are oracle-verified above
        // and the attached family is filter-checked against the full one.
        assert_eq!(enumerate_graphs(2, 1).len(), 9);
        assert_eq!(enumerate_graphs(2, 2).len(), 87);
        assert_eq!(enumerate_graphs(2, 3).len(), 922);
        // Without internal-internal edges only the four external-only
        // classes survive at power 1: empty, one edge, and the two loops.
        assert_eq!(enumerate_attached(2, 1).len(), 4);
        assert_eq!(enumerate_attached(2, 2).len(), 14);
        assert_eq!(enumerate_attached(2, 3).len(), 41);
    }
}
