//! Isomorphism classes of Feynman graphs with exact automorphism counts.
//!
//! A graph has `n_ext` distinguished external vertices (labels `0..n_ext`,
//! fixed pointwise by automorphisms) and `n_int` internal vertices (labels
//! `n_ext..n_ext+n_int`, freely permutable).  Edges form a multiset over
//! unordered vertex pairs; loops are allowed.  Internal vertices must have
//! valence at least 3, which bounds everything in terms of the power
//! `|E| - |V_int|`.

use std::collections::BTreeMap;

pub type EdgeMultiset = BTreeMap<(usize, usize), usize>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FeynmanGraph {
    n_ext: usize,
    n_int: usize,
    /// Canonical representative: minimal edge encoding over all internal
    /// relabelings.
    edges: EdgeMultiset,
    aut: u64,
}

impl FeynmanGraph {
    /// Builds the isomorphism class of the given labeled multigraph,
    /// canonicalizing internal labels and counting automorphisms.
    pub fn new(n_ext: usize, n_int: usize, edges: EdgeMultiset) -> Self {
        let mut normalized = EdgeMultiset::new();
        for (&(u, v), &m) in &edges {
            assert!(u.max(v) < n_ext + n_int, "edge endpoint out of range");
            *normalized.entry((u.min(v), u.max(v))).or_insert(0) += m;
        }
        let (canonical, vertex_auts) = canonicalize(n_ext, n_int, &normalized);
        let mut aut = vertex_auts;
        for (&(u, v), &m) in &canonical {
            if u == v {
                // Parallel loops permute freely and each loop's two legs swap.
                aut *= factorial(m) * (1u64 << m);
            } else {
                aut *= factorial(m);
            }
        }
        FeynmanGraph { n_ext, n_int, edges: canonical, aut }
    }

    pub fn n_ext(&self) -> usize {
        self.n_ext
    }

    pub fn n_int(&self) -> usize {
        self.n_int
    }

    pub fn edges(&self) -> &EdgeMultiset {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.values().sum()
    }

    /// `|E| - |V_int|`, the order of the graph's contribution.
    pub fn power(&self) -> usize {
        self.num_edges() - self.n_int
    }

    pub fn aut(&self) -> u64 {
        self.aut
    }

    /// Valence of a vertex; loops count twice.
    pub fn valence(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|(&(a, b), &m)| {
                let mut c = 0;
                if a == v {
                    c += m;
                }
                if b == v {
                    c += m;
                }
                c
            })
            .sum()
    }

    pub fn is_valid(&self) -> bool {
        (self.n_ext..self.n_ext + self.n_int).all(|v| self.valence(v) >= 3)
    }

    /// True when no edge touches two internal vertices (including internal
    /// loops); such graphs are the only survivors for hyperbolic phases.
    pub fn is_externally_attached(&self) -> bool {
        self.edges
            .keys()
            .all(|&(u, v)| u < self.n_ext || v < self.n_ext)
    }
}

fn factorial(n: usize) -> u64 {
    (2..=n as u64).product::<u64>().max(1)
}

/// Applies an internal-vertex relabeling to an edge multiset.
pub fn relabel(n_ext: usize, edges: &EdgeMultiset, perm: &[usize]) -> EdgeMultiset {
    let map = |v: usize| if v < n_ext { v } else { n_ext + perm[v - n_ext] };
    let mut out = EdgeMultiset::new();
    for (&(u, v), &m) in edges {
        let (a, b) = (map(u), map(v));
        let key = if a <= b { (a, b) } else { (b, a) };
        *out.entry(key).or_insert(0) += m;
    }
    out
}

/// Canonical representative (minimum over internal permutations) and the
/// number of permutations fixing the canonical form.
fn canonicalize(n_ext: usize, n_int: usize, edges: &EdgeMultiset) -> (EdgeMultiset, u64) {
    if n_int == 0 {
        return (edges.clone(), 1);
    }
    let mut best: Option<EdgeMultiset> = None;
    let mut perm: Vec<usize> = (0..n_int).collect();
    let mut stabilizer = 0u64;
    loop {
        let candidate = relabel(n_ext, edges, &perm);
        match &best {
            None => {
                best = Some(candidate);
                stabilizer = 1;
            }
            Some(b) => {
                use std::cmp::Ordering;
                match candidate.cmp(b) {
                    Ordering::Less => {
                        best = Some(candidate);
                        stabilizer = 1;
                    }
                    Ordering::Equal => stabilizer += 1,
                    Ordering::Greater => {}
                }
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    (best.unwrap(), stabilizer)
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n_ext: usize, n_int: usize, edges: &[((usize, usize), usize)]) -> FeynmanGraph {
        FeynmanGraph::new(n_ext, n_int, edges.iter().copied().collect())
    }

    #[test]
    fn automorphism_counts() {
        // Empty graph.
        assert_eq!(graph(2, 0, &[]).aut(), 1);
        // Single edge between externals.
        assert_eq!(graph(2, 0, &[((0, 1), 1)]).aut(), 1);
        // Loop on an external: swap the two legs.
        assert_eq!(graph(2, 0, &[((0, 0), 1)]).aut(), 2);
        // Figure-eight: two loops on one internal vertex.
        assert_eq!(graph(2, 1, &[((2, 2), 2)]).aut(), 8);
        // Tadpole: loop plus leg to external.
        assert_eq!(graph(2, 1, &[((2, 2), 1), ((2, 0), 1)]).aut(), 2);
        // Theta: triple edge between two internals -> 2 * 3!.
        assert_eq!(graph(2, 2, &[((2, 3), 3)]).aut(), 12);
        // Dumbbell: two looped internals joined by an edge -> 2 * 2 * 2.
        assert_eq!(graph(2, 2, &[((2, 2), 1), ((3, 3), 1), ((2, 3), 1)]).aut(), 8);
    }

    #[test]
    fn canonical_labels_are_stable() {
        // The same class reached through different labelings.
        let a = graph(2, 2, &[((2, 2), 1), ((2, 3), 1), ((3, 0), 1), ((3, 1), 1)]);
        let b = graph(2, 2, &[((3, 3), 1), ((2, 3), 1), ((2, 0), 1), ((2, 1), 1)]);
        assert_eq!(a, b);
        // The two vertices are distinguishable, so the only symmetry is
        // the leg swap of the loop.
        assert_eq!(a.aut(), 2);
    }

    #[test]
    fn power_and_validity() {
        let theta = graph(2, 2, &[((2, 3), 3)]);
        assert_eq!(theta.power(), 1);
        assert!(theta.is_valid());
        assert!(!theta.is_externally_attached());
        let tadpole = graph(2, 1, &[((2, 2), 1), ((2, 0), 1)]);
        assert!(tadpole.is_valid());
        assert!(!tadpole.is_externally_attached());
        let star = graph(2, 1, &[((2, 0), 2), ((2, 1), 1)]);
        assert_eq!(star.power(), 2);
        assert!(star.is_valid());
        assert!(star.is_externally_attached());
        let thin = graph(2, 1, &[((2, 0), 1), ((2, 1), 1)]);
        assert!(!thin.is_valid());
    }
}
