use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Canonical, window-independent name of a vertex.
///
/// `anchor` is the height `m` of the ray vertex `x_m` where the geodesic from
/// the vertex meets the ray; `descent` lists the child labels walked down from
/// `x_m`. At a ray vertex the label `0` is reserved for the ray child
/// `x_{m-1}`, so the first label of an off-ray address is always at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexAddress {
    anchor: u64,
    descent: Vec<u32>,
}

impl VertexAddress {
    pub fn ray(m: u64) -> Self {
        VertexAddress {
            anchor: m,
            descent: Vec::new(),
        }
    }

    /// Builds an address, rejecting a first label of 0.
    pub fn new(anchor: u64, descent: Vec<u32>) -> Result<Self, Error> {
        if descent.first() == Some(&0) {
            return Err(Error::InvalidAddress(format!(
                "{anchor}/{}",
                join_labels(&descent)
            )));
        }
        Ok(VertexAddress { anchor, descent })
    }

    /// The base point `o = x_0`.
    pub fn origin() -> Self {
        Self::ray(0)
    }

    pub fn anchor(&self) -> u64 {
        self.anchor
    }

    pub fn descent(&self) -> &[u32] {
        &self.descent
    }

    pub fn is_ray(&self) -> bool {
        self.descent.is_empty()
    }

    pub fn height(&self) -> i64 {
        self.anchor as i64 - self.descent.len() as i64
    }

    /// The successor with the given label.
    pub fn child(&self, label: u32) -> Self {
        if self.is_ray() && label == 0 && self.anchor >= 1 {
            return Self::ray(self.anchor - 1);
        }
        let mut descent = self.descent.clone();
        descent.push(label);
        VertexAddress {
            anchor: self.anchor,
            descent,
        }
    }

    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    /// `p^k(x)`; ancestors past the anchor climb the ray.
    pub fn ancestor(&self, k: u64) -> Self {
        let d = self.descent.len() as u64;
        if k <= d {
            VertexAddress {
                anchor: self.anchor,
                descent: self.descent[..(d - k) as usize].to_vec(),
            }
        } else {
            Self::ray(self.anchor + (k - d))
        }
    }

    /// `self ⪰ other`: `self` lies on the geodesic from `other` to the ray.
    pub fn is_above(&self, other: &VertexAddress) -> bool {
        let dh = self.height() - other.height();
        dh >= 0 && other.ancestor(dh as u64) == *self
    }

    /// Lowest common ancestor `x ∧ y` and `η(x, y)`, the height of the
    /// smallest triangle containing both points.
    pub fn confluent(&self, other: &VertexAddress) -> (VertexAddress, u64) {
        let c = if self.anchor != other.anchor {
            Self::ray(self.anchor.max(other.anchor))
        } else {
            let common = self
                .descent
                .iter()
                .zip(&other.descent)
                .take_while(|(a, b)| a == b)
                .count();
            VertexAddress {
                anchor: self.anchor,
                descent: self.descent[..common].to_vec(),
            }
        };
        let hc = c.height();
        let eta = (hc - self.height()).max(hc - other.height()) as u64;
        (c, eta)
    }

    pub fn distance(&self, other: &VertexAddress) -> u64 {
        let (c, _) = self.confluent(other);
        let hc = c.height();
        ((hc - self.height()) + (hc - other.height())) as u64
    }
}

fn join_labels(labels: &[u32]) -> String {
    labels
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.descent.is_empty() {
            write!(f, "{}", self.anchor)
        } else {
            write!(f, "{}/{}", self.anchor, join_labels(&self.descent))
        }
    }
}

impl FromStr for VertexAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::AddressParse(s.to_string());
        let s = s.trim();
        let (anchor, rest) = match s.split_once('/') {
            Some((a, r)) => (a, Some(r)),
            None => (s, None),
        };
        let anchor: u64 = anchor.parse().map_err(|_| bad())?;
        let descent = match rest {
            None => Vec::new(),
            Some(r) => r
                .split('.')
                .map(|c| c.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?,
        };
        if rest.is_some() && descent.is_empty() {
            return Err(bad());
        }
        VertexAddress::new(anchor, descent).map_err(|_| bad())
    }
}

impl Serialize for VertexAddress {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexAddress {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(a("3"), VertexAddress::ray(3));
        assert_eq!(a("0/1.0.1").to_string(), "0/1.0.1");
        assert_eq!(a("0/1.0.1").height(), -3);
        assert!("2/0".parse::<VertexAddress>().is_err());
        assert!("2/".parse::<VertexAddress>().is_err());
        assert!("x".parse::<VertexAddress>().is_err());
    }

    #[test]
    fn ancestors_climb_the_ray() {
        let o = VertexAddress::origin();
        assert_eq!(o.ancestor(2), a("2"));
        assert_eq!(a("0/1").ancestor(1), o);
        assert_eq!(a("0/1").ancestor(0), a("0/1"));
        assert_eq!(a("1/1.0").ancestor(3), a("2"));
        assert_eq!(a("1").child(0), a("0"));
        assert_eq!(a("1").child(1), a("1/1"));
    }

    #[test]
    fn confluent_cases() {
        let o = VertexAddress::origin();
        assert_eq!(o.confluent(&o), (o.clone(), 0));
        assert_eq!(a("0/1").confluent(&a("0/2")), (o.clone(), 1));
        assert_eq!(o.confluent(&o.parent()), (a("1"), 1));
        // sibling of o below x_1, and a cousin at distance 4
        assert_eq!(o.confluent(&a("1/1")), (a("1"), 1));
        assert_eq!(o.confluent(&a("2/1.0")), (a("2"), 2));
        assert_eq!(o.distance(&a("2/1.0")), 4);
        assert!(a("2").is_above(&a("1/1")));
        assert!(!a("1/1").is_above(&a("2")));
    }
}
