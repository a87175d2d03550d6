use std::fmt;

use serde::{Deserialize, Serialize};

use super::address::VertexAddress;

/// The triangle `T_R(x)`: the vertex `x` and its descendants down to depth `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriangleRef {
    pub vertex: VertexAddress,
    pub height: u32,
}

impl TriangleRef {
    pub fn new(vertex: VertexAddress, height: u32) -> Self {
        TriangleRef { vertex, height }
    }

    pub fn base_height(&self) -> i64 {
        self.vertex.height() - self.height as i64
    }

    /// Inclusion between triangles reduces to comparing vertices and base
    /// heights: `T_R(x) ⊆ T_S(y)` iff `y ⪰ x` and the base of `T_S(y)` is not
    /// above the base of `T_R(x)`.
    pub fn is_subset_of(&self, other: &TriangleRef) -> bool {
        other.vertex.is_above(&self.vertex) && other.base_height() <= self.base_height()
    }

    pub fn contains(&self, x: &VertexAddress) -> bool {
        self.vertex.is_above(x) && x.height() >= self.base_height()
    }
}

impl fmt::Display for TriangleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{}({})", self.height, self.vertex)
    }
}

/// `T'_R(x) = T_R(x) ∪ {p^R(x)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModTriangleRef {
    pub inner: TriangleRef,
}

impl ModTriangleRef {
    pub fn new(vertex: VertexAddress, height: u32) -> Self {
        ModTriangleRef {
            inner: TriangleRef::new(vertex, height),
        }
    }

    pub fn top(&self) -> VertexAddress {
        self.inner.vertex.ancestor(self.inner.height as u64)
    }

    pub fn contains(&self, x: &VertexAddress) -> bool {
        self.inner.contains(x) || self.top() == *x
    }
}

impl fmt::Display for ModTriangleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T'_{}({})", self.inner.height, self.inner.vertex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    #[test]
    fn inclusion() {
        let small = TriangleRef::new(a("0"), 1);
        let big = TriangleRef::new(a("1"), 2);
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        // same vertex height, different vertices: incomparable
        let other = TriangleRef::new(a("1/1"), 0);
        assert!(!small.is_subset_of(&other) && !other.is_subset_of(&small));
        // T_1(p(o)) does not contain T_1(o): its base stops at height 0
        let t1po = TriangleRef::new(a("1"), 1);
        assert!(!small.is_subset_of(&t1po));
        assert!(t1po.contains(&a("0")) && !t1po.contains(&a("0/1")));
    }

    #[test]
    fn modified_top_point() {
        let m = ModTriangleRef::new(a("0/1"), 1);
        assert_eq!(m.top(), a("0"));
        assert!(m.contains(&a("0")));
        assert!(m.contains(&a("0/1.0")));
        assert!(!m.contains(&a("0/2")));
    }
}
