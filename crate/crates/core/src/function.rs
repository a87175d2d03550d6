use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::tree::{TreeWindow, VertexAddress, VertexId};

#[derive(Serialize, Deserialize)]
struct Entry {
    addr: VertexAddress,
    val: String,
}

/// Finitely supported function on the vertices, keyed by canonical address.
/// Zero values are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseFunction {
    entries: BTreeMap<VertexAddress, Rational>,
}

impl SparseFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(x: VertexAddress) -> Self {
        let mut f = Self::new();
        f.set(x, rational::one());
        f
    }

    pub fn indicator<I: IntoIterator<Item = VertexAddress>>(points: I) -> Self {
        let mut f = Self::new();
        for x in points {
            f.set(x, rational::one());
        }
        f
    }

    pub fn set(&mut self, x: VertexAddress, value: Rational) {
        if value == rational::zero() {
            self.entries.remove(&x);
        } else {
            self.entries.insert(x, value);
        }
    }

    pub fn add(&mut self, x: VertexAddress, value: Rational) {
        let cur = self.get(&x);
        self.set(x, cur + value);
    }

    pub fn get(&self, x: &VertexAddress) -> Rational {
        self.entries.get(x).cloned().unwrap_or_else(rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexAddress, &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut g = Self::new();
        for (x, v) in &self.entries {
            g.set(x.clone(), v * c);
        }
        g
    }

    pub fn abs(&self) -> Self {
        let mut g = Self::new();
        for (x, v) in &self.entries {
            g.set(x.clone(), rational::abs(v));
        }
        g
    }

    /// `‖f‖₁`.
    pub fn l1(&self) -> Rational {
        self.entries.values().map(rational::abs).sum()
    }

    /// Resolves every support point to a window id.
    pub fn resolve(&self, w: &TreeWindow) -> Result<Vec<(VertexId, Rational)>> {
        self.entries
            .iter()
            .map(|(x, v)| Ok((w.id_of(x)?, v.clone())))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<Entry> =
            serde_json::from_str(text).map_err(|e| Error::FunctionParse(e.to_string()))?;
        let mut f = Self::new();
        for e in entries {
            f.add(e.addr, rational::parse(&e.val)?);
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|(addr, v)| Entry {
                addr: addr.clone(),
                val: rational::format(v),
            })
            .collect();
        serde_json::to_string(&entries).expect("function serializes")
    }
}

impl FromIterator<(VertexAddress, Rational)> for SparseFunction {
    fn from_iter<I: IntoIterator<Item = (VertexAddress, Rational)>>(iter: I) -> Self {
        let mut f = Self::new();
        for (x, v) in iter {
            f.add(x, v);
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn json_and_zero_handling() {
        let f = SparseFunction::from_json(r#"[{"addr": "0", "val": "3/2"}, {"addr": "1", "val": "-1/2"}]"#)
            .unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.l1(), ratio(2, 1));
        assert_eq!(SparseFunction::from_json(&f.to_json()).unwrap(), f);
        let mut g = f.clone();
        g.add(VertexAddress::origin(), ratio(-3, 2));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn resolve_rejects_points_outside() {
        let w = TreeWindow::build(crate::tree::ValenceSpec::homogeneous(2).unwrap(), 1, 0).unwrap();
        assert!(SparseFunction::delta(VertexAddress::ray(2)).resolve(&w).is_err());
        assert!(SparseFunction::delta(VertexAddress::ray(1)).resolve(&w).is_ok());
    }
}
