//! Maximal and integral operators with exact values and supremum certificates.

mod evaluator;
mod kernel;
mod norm;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use evaluator::Evaluator;
pub use kernel::{eval_k, kernel_kappa, kernel_tau};
pub use norm::{lp_norm, Exponent, NormValue};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::rational::{self, Rational};
use crate::tree::{ModTriangleRef, TreeWindow, TriangleRef, VertexAddress};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorKind {
    /// centred triangles `𝒯`
    TCentred,
    /// uncentred triangles `𝒰`
    UUncentred,
    /// centred bases `ℬ`
    BCentred,
    /// uncentred bases `ℬᵘ`
    BuUncentred,
    /// centred modified triangles `𝒯′`
    TMod,
    /// uncentred modified triangles `𝒰′`
    UMod,
    /// the integral operator `𝒦`
    KKernel,
    /// centred balls `ℳ`
    MHlCentred,
    /// uncentred balls `𝒩`
    NHlUncentred,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        OperatorKind::TCentred,
        OperatorKind::UUncentred,
        OperatorKind::BCentred,
        OperatorKind::BuUncentred,
        OperatorKind::TMod,
        OperatorKind::UMod,
        OperatorKind::KKernel,
        OperatorKind::MHlCentred,
        OperatorKind::NHlUncentred,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            OperatorKind::TCentred => "T",
            OperatorKind::UUncentred => "U",
            OperatorKind::BCentred => "B",
            OperatorKind::BuUncentred => "Bu",
            OperatorKind::TMod => "Tmod",
            OperatorKind::UMod => "Umod",
            OperatorKind::KKernel => "K",
            OperatorKind::MHlCentred => "M",
            OperatorKind::NHlUncentred => "N",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown operator {s:?}")))
    }
}

/// The set over which a supremum is attained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Triangle(TriangleRef),
    /// the base of the named triangle
    Base(TriangleRef),
    Modified(ModTriangleRef),
    Ball { center: VertexAddress, radius: u32 },
}

impl Witness {
    pub fn vertex(&self) -> &VertexAddress {
        match self {
            Witness::Triangle(t) | Witness::Base(t) => &t.vertex,
            Witness::Modified(m) => &m.inner.vertex,
            Witness::Ball { center, .. } => center,
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            Witness::Triangle(t) | Witness::Base(t) => t.height,
            Witness::Modified(m) => m.inner.height,
            Witness::Ball { radius, .. } => *radius,
        }
    }
}

/// An exact windowed supremum together with a bound on every candidate the
/// window could not see. When `certified`, `value` is the supremum over the
/// whole infinite tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedValue {
    pub value: Rational,
    pub witness: Option<Witness>,
    pub certified: bool,
    pub tail_bound: Rational,
}

impl CertifiedValue {
    pub fn new(value: Rational, witness: Option<Witness>, tail_bound: Rational) -> Self {
        CertifiedValue {
            certified: value >= tail_bound,
            value,
            witness,
            tail_bound,
        }
    }

    pub fn exact(value: Rational) -> Self {
        Self::new(value, None, rational::zero())
    }

    /// Upper bound on the true supremum.
    pub fn upper_bound(&self) -> &Rational {
        rational::max_of(&self.value, &self.tail_bound)
    }
}

/// Evaluates `kind` at every vertex of `region`, in address order. Per-vertex
/// failures are reported in place.
pub fn batch_eval(
    w: &TreeWindow,
    kind: OperatorKind,
    f: &SparseFunction,
    region: &[VertexAddress],
) -> Result<BTreeMap<VertexAddress, Result<CertifiedValue>>> {
    let ev = Evaluator::new(w, f)?;
    let out: Vec<_> = region
        .par_iter()
        .map(|x| (x.clone(), ev.eval_at(kind, x)))
        .collect();
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_tags_round_trip() {
        for k in OperatorKind::ALL {
            assert_eq!(k.tag().parse::<OperatorKind>().unwrap(), k);
        }
        assert!("Z".parse::<OperatorKind>().is_err());
    }
}
