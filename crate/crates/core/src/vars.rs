//! The fixed variable universe shared by all polynomials.
//!
//! Variables come in five indexed families, totally ordered as
//! `x < xi < th < v < t`; within a family, by index. A [`VarUniverse`]
//! records the family sizes so that loaders can validate indices and
//! arithmetic can reject operands from different universes.
//!
//! The `v` family can be widened to several blocks of `n` variables each:
//! two-argument group computations (a composition in coordinates `(v, w)`)
//! place `w` in the second block, i.e. `w_i = v_{n+i}`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Variable family, in canonical display/order position.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Family {
    X,
    Xi,
    Th,
    V,
    T,
}

impl Family {
    pub fn prefix(self) -> &'static str {
        match self {
            Family::X => "x",
            Family::Xi => "xi",
            Family::Th => "th",
            Family::V => "v",
            Family::T => "t",
        }
    }
}

/// A single variable: a family plus a 1-based index (`t` has index 0).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub family: Family,
    pub index: u32,
}

impl Var {
    pub fn x(i: u32) -> Var {
        Var { family: Family::X, index: i }
    }
    pub fn xi(i: u32) -> Var {
        Var { family: Family::Xi, index: i }
    }
    pub fn th(i: u32) -> Var {
        Var { family: Family::Th, index: i }
    }
    pub fn v(i: u32) -> Var {
        Var { family: Family::V, index: i }
    }
    pub fn t() -> Var {
        Var { family: Family::T, index: 0 }
    }

    /// Does this variable count toward the group-coordinate degree that the
    /// truncation parameter `M` bounds? (`v` blocks and the curve parameter `t`.)
    pub fn is_group_coordinate(self) -> bool {
        matches!(self.family, Family::V | Family::T)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.family == Family::T {
            write!(f, "t")
        } else {
            write!(f, "{}{}", self.family.prefix(), self.index)
        }
    }
}

/// Family sizes: `x`,`xi` have `d` variables; `th` has `n`; `v` has
/// `n * vblocks`; `t` is always present.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct VarUniverse {
    d: u32,
    n: u32,
    vblocks: u32,
}

impl VarUniverse {
    pub fn new(d: u32, n: u32) -> Self {
        VarUniverse { d, n, vblocks: 1 }
    }

    pub fn with_vblocks(d: u32, n: u32, vblocks: u32) -> Self {
        assert!(vblocks >= 1, "at least one v block");
        VarUniverse { d, n, vblocks }
    }

    /// Scalar universe: no indexed variables at all (only `t`).
    pub fn scalar() -> Self {
        VarUniverse { d: 0, n: 0, vblocks: 1 }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn vblocks(&self) -> u32 {
        self.vblocks
    }

    /// Same families, `vblocks` widened to `k`.
    pub fn widened(&self, k: u32) -> Self {
        VarUniverse { d: self.d, n: self.n, vblocks: self.vblocks.max(k) }
    }

    pub fn contains(&self, var: Var) -> bool {
        match var.family {
            Family::X | Family::Xi => var.index >= 1 && var.index <= self.d,
            Family::Th => var.index >= 1 && var.index <= self.n,
            Family::V => var.index >= 1 && var.index <= self.n * self.vblocks,
            Family::T => var.index == 0,
        }
    }

    /// Is every variable of `self` also a variable of `other`?
    pub fn is_sub_universe(&self, other: &VarUniverse) -> bool {
        self.d <= other.d && self.n <= other.n && self.n * self.vblocks <= other.n * other.vblocks
    }

    /// The `v` variable of block `block` (0-based) with in-block index `i` (1-based).
    pub fn v_in_block(&self, block: u32, i: u32) -> Var {
        assert!(block < self.vblocks && i >= 1 && i <= self.n);
        Var::v(block * self.n + i)
    }
}

impl fmt::Display for VarUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(d={}, n={}, vblocks={})", self.d, self.n, self.vblocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_order_matches_display_order() {
        let mut vars = vec![Var::t(), Var::v(1), Var::th(2), Var::xi(1), Var::x(3)];
        vars.sort();
        let shown: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        assert_eq!(shown, ["x3", "xi1", "th2", "v1", "t"]);
    }

    #[test]
    fn universe_membership() {
        let u = VarUniverse::new(2, 3);
        assert!(u.contains(Var::x(2)));
        assert!(!u.contains(Var::x(3)));
        assert!(u.contains(Var::th(3)));
        assert!(u.contains(Var::v(3)));
        assert!(!u.contains(Var::v(4)));
        assert!(u.contains(Var::t()));

        let wide = u.widened(2);
        assert!(wide.contains(Var::v(6)));
        assert!(u.is_sub_universe(&wide));
        assert!(!wide.is_sub_universe(&u));
        assert_eq!(wide.v_in_block(1, 2), Var::v(5));
    }
}
