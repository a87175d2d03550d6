use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::address::VertexAddress;
use crate::error::{Error, Result};

/// One piece of the height rule: `nu` applies to heights in `[h_ge, h_lt)`,
/// a missing bound meaning unbounded on that side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_ge: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_lt: Option<i64>,
    pub nu: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub addr: VertexAddress,
    pub nu: u32,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    rule: Vec<Segment>,
    #[serde(default)]
    overrides: Vec<Override>,
}

/// Total valence rule: piecewise-constant in height plus finitely many
/// per-vertex overrides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValenceSpec {
    segments: Vec<Segment>,
    overrides: BTreeMap<VertexAddress, u32>,
}

impl ValenceSpec {
    pub fn new(mut segments: Vec<Segment>, overrides: Vec<Override>) -> Result<Self> {
        segments.sort_by_key(|s| s.h_ge.unwrap_or(i64::MIN));
        let spec = ValenceSpec {
            segments,
            overrides: overrides.into_iter().map(|o| (o.addr, o.nu)).collect(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `𝔗_b`: every vertex has `b + 1` neighbours.
    pub fn homogeneous(b: u32) -> Result<Self> {
        Self::new(
            vec![Segment {
                h_ge: None,
                h_lt: None,
                nu: b + 1,
            }],
            vec![],
        )
    }

    /// `𝔖_{a,b}`: valence `a + 1` below height 1 and `b + 1` from height 1 up.
    pub fn two_level(a: u32, b: u32) -> Result<Self> {
        Self::new(
            vec![
                Segment {
                    h_ge: None,
                    h_lt: Some(1),
                    nu: a + 1,
                },
                Segment {
                    h_ge: Some(1),
                    h_lt: None,
                    nu: b + 1,
                },
            ],
            vec![],
        )
    }

    /// Valence 3 everywhere except `x_0`, which gets `j + 2` neighbours.
    pub fn spiked(j: u32) -> Result<Self> {
        Self::new(
            vec![Segment {
                h_ge: None,
                h_lt: None,
                nu: 3,
            }],
            vec![Override {
                addr: VertexAddress::origin(),
                nu: j + 2,
            }],
        )
    }

    /// Parses a preset (`Tb:2`, `Sab:2,4`, `spike:6`).
    pub fn preset(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("unknown preset {s:?}"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<u32> = args
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind, nums.as_slice()) {
            ("Tb", [b]) => Self::homogeneous(*b),
            ("Sab", [a, b]) => Self::two_level(*a, *b),
            ("spike", [j]) if *j >= 1 => Self::spiked(*j),
            _ => Err(bad()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::new(file.rule, file.overrides)
    }

    pub fn to_json(&self) -> String {
        let file = SpecFile {
            rule: self.segments.clone(),
            overrides: self
                .overrides
                .iter()
                .map(|(addr, nu)| Override {
                    addr: addr.clone(),
                    nu: *nu,
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("spec serializes")
    }

    fn validate(&self) -> Result<()> {
        let segs = &self.segments;
        if segs.is_empty() {
            return Err(Error::InvalidSpec("empty height rule".into()));
        }
        if segs[0].h_ge.is_some() {
            return Err(Error::InvalidSpec("height rule does not cover -inf".into()));
        }
        if segs[segs.len() - 1].h_lt.is_some() {
            return Err(Error::InvalidSpec("height rule does not cover +inf".into()));
        }
        for pair in segs.windows(2) {
            match (pair[0].h_lt, pair[1].h_ge) {
                (Some(hi), Some(lo)) if hi == lo => {}
                _ => {
                    return Err(Error::InvalidSpec(
                        "height rule segments must tile the integers".into(),
                    ))
                }
            }
        }
        for s in segs {
            if let (Some(lo), Some(hi)) = (s.h_ge, s.h_lt) {
                if lo >= hi {
                    return Err(Error::InvalidSpec(format!("empty segment [{lo}, {hi})")));
                }
            }
            if s.nu < 3 {
                return Err(Error::InvalidValence {
                    at: format!("heights {:?}..{:?}", s.h_ge, s.h_lt),
                    nu: s.nu,
                });
            }
        }
        for (addr, &nu) in &self.overrides {
            if nu < 3 {
                return Err(Error::InvalidValence {
                    at: addr.to_string(),
                    nu,
                });
            }
            self.check_address(addr)?;
        }
        Ok(())
    }

    pub fn height_rule(&self, h: i64) -> u32 {
        self.segments
            .iter()
            .find(|s| s.h_ge.is_none_or(|lo| h >= lo) && s.h_lt.is_none_or(|hi| h < hi))
            .map(|s| s.nu)
            .expect("validated rule is total")
    }

    pub fn valence(&self, x: &VertexAddress) -> u32 {
        self.overrides
            .get(x)
            .copied()
            .unwrap_or_else(|| self.height_rule(x.height()))
    }

    pub fn has_overrides(&self) -> bool {
        !self.overrides.is_empty()
    }

    /// `Some(b)` when the spec describes the homogeneous tree `𝔗_b`.
    pub fn homogeneous_branching(&self) -> Option<u32> {
        (self.segments.len() == 1 && self.overrides.is_empty()).then(|| self.segments[0].nu - 1)
    }

    /// Labels usable for successors of `x` that are not on the ray.
    pub fn off_ray_labels(&self, x: &VertexAddress) -> std::ops::Range<u32> {
        let succ = self.valence(x) - 1;
        if x.is_ray() {
            if x.anchor() == 0 {
                1..succ + 1
            } else {
                1..succ
            }
        } else {
            0..succ
        }
    }

    /// Checks that every label along the address exists in the tree.
    pub fn check_address(&self, x: &VertexAddress) -> Result<()> {
        let mut cur = VertexAddress::ray(x.anchor());
        for &label in x.descent() {
            if !self.off_ray_labels(&cur).contains(&label) {
                return Err(Error::InvalidAddress(x.to_string()));
            }
            cur = cur.child(label);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let t2 = ValenceSpec::preset("Tb:2").unwrap();
        assert_eq!(t2.height_rule(-100), 3);
        assert_eq!(t2.homogeneous_branching(), Some(2));
        let s = ValenceSpec::preset("Sab:2,4").unwrap();
        assert_eq!(s.height_rule(0), 3);
        assert_eq!(s.height_rule(1), 5);
        assert_eq!(s.homogeneous_branching(), None);
        let spike = ValenceSpec::preset("spike:6").unwrap();
        assert_eq!(spike.valence(&VertexAddress::origin()), 8);
        assert_eq!(spike.valence(&VertexAddress::ray(1)), 3);
        assert!(ValenceSpec::preset("bogus").is_err());
        assert!(ValenceSpec::preset("Tb:1").is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{ "rule": [{"h_lt": 1, "nu": 3}, {"h_ge": 1, "nu": 5}],
                        "overrides": [{"addr": "0", "nu": 8}] }"#;
        let spec = ValenceSpec::from_json(text).unwrap();
        assert_eq!(spec.valence(&VertexAddress::origin()), 8);
        assert_eq!(spec.valence(&VertexAddress::ray(2)), 5);
        assert_eq!(ValenceSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn rejects_gaps_and_small_valence() {
        let gap = r#"{ "rule": [{"h_lt": 0, "nu": 3}, {"h_ge": 1, "nu": 5}] }"#;
        assert!(ValenceSpec::from_json(gap).is_err());
        let small = r#"{ "rule": [{"nu": 2}] }"#;
        assert!(matches!(
            ValenceSpec::from_json(small),
            Err(Error::InvalidValence { .. })
        ));
        let bad_override = r#"{ "rule": [{"nu": 3}], "overrides": [{"addr": "0/3", "nu": 4}] }"#;
        assert!(ValenceSpec::from_json(bad_override).is_err());
    }

    #[test]
    fn labels_respect_the_reserved_ray_child() {
        let t2 = ValenceSpec::homogeneous(2).unwrap();
        assert_eq!(t2.off_ray_labels(&VertexAddress::ray(0)), 1..3);
        assert_eq!(t2.off_ray_labels(&VertexAddress::ray(3)), 1..2);
        assert_eq!(t2.off_ray_labels(&"0/1".parse().unwrap()), 0..2);
    }
}
