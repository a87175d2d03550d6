//! Level sets of maximal functions and their decomposition into maximal
//! triangles.

mod family;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

pub use family::{
    check_cf_failure_modified, check_cordoba_fefferman, overlap_constant, overlap_profile,
    random_maximal_family, CfFailureReport, CfReport, FamilyMember, OverlapConstant,
    OverlapProfile, TriangleFamily,
};

use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::ops::{CertifiedValue, Evaluator, OperatorKind};
use crate::rational::{self, int, Rational};
use crate::tree::{TreeWindow, TriangleRef, VertexAddress, VertexId};

/// `{x : value(x) > α}`. A value counts as outside when its upper bound is at
/// most `α`; anything in between cannot be decided.
pub fn level_set(
    values: &BTreeMap<VertexAddress, CertifiedValue>,
    alpha: &Rational,
) -> Result<BTreeSet<VertexAddress>> {
    let mut out = BTreeSet::new();
    for (x, v) in values {
        if v.value > *alpha {
            out.insert(x.clone());
        } else if v.upper_bound() > alpha {
            return Err(Error::UncertifiedInput(x.to_string()));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemberStats {
    pub vertex: VertexAddress,
    pub height: u32,
    pub volume: u64,
    pub base_size: u64,
    #[serde(serialize_with = "rational::as_str::serialize")]
    pub average: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionChecks {
    pub disjoint_bases: bool,
    pub union_equals_levelset: bool,
    /// `None` when the bound does not apply (bases, or a tree without a
    /// constant branching number).
    pub dal_basso_bounds: Option<bool>,
}

impl DecompositionChecks {
    pub fn all_pass(&self) -> bool {
        self.disjoint_bases && self.union_equals_levelset && self.dal_basso_bounds != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    #[serde(serialize_with = "rational::as_str::serialize")]
    pub alpha: Rational,
    pub kind: OperatorKind,
    pub triangles: Vec<MemberStats>,
    pub level_set_size: u64,
    #[serde(skip)]
    pub level_set: Vec<VertexId>,
    pub checks: DecompositionChecks,
}

impl DecompositionReport {
    pub fn family(&self) -> TriangleFamily {
        TriangleFamily::maximal(
            self.triangles
                .iter()
                .map(|m| FamilyMember::Triangle(TriangleRef::new(m.vertex.clone(), m.height)))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Largest `R` with `threshold(R)` exceeding the bound.
fn height_bound(ratio: &Rational, size: impl Fn(u32) -> Rational) -> u32 {
    let mut h = 0;
    while size(h + 1) < *ratio {
        h += 1;
    }
    h
}

fn min_triangle_size(b: u32, r: u32) -> Rational {
    // (b^{R+1} - 1) / (b - 1)
    let b = int(b);
    (rational::pow_int(&b, r + 1) - int(1)) / (b - int(1))
}

/// Widens `[lo, hi]` to a buildable window: apex on the ray, nonempty.
fn proper(lo: i64, hi: i64, top: i64, h: u32) -> (i64, i64, u32) {
    let hi = hi.max(top);
    (lo.min(hi - 1), hi, h)
}

/// Heights `(h_min, h_max, H)` that a window must span so that every
/// triangle with average above `α` lies inside it. `H` bounds the height of
/// such triangles.
pub fn required_window(
    spec_branching: Option<u32>,
    f: &SparseFunction,
    alpha: &Rational,
    kind: OperatorKind,
) -> Result<(i64, i64, u32)> {
    if *alpha <= rational::zero() {
        return Err(Error::NonPositiveAlpha(rational::format(alpha)));
    }
    let heights: Vec<i64> = f.iter().map(|(x, _)| x.height()).collect();
    let (lo, hi) = match (heights.iter().min(), heights.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Ok((-1, 0, 0)),
    };
    // the apex must also sit above every support point
    let top = f.iter().map(|(x, _)| x.anchor() as i64).max().unwrap_or(0);
    let ratio = f.l1() / alpha;
    // every vertex off the ray has at least b >= 2 successors
    let b = spec_branching.unwrap_or(2);
    match kind {
        OperatorKind::UUncentred => {
            let h = height_bound(&ratio, |r| min_triangle_size(b, r));
            Ok(proper(lo - h as i64, hi + h as i64, top, h))
        }
        OperatorKind::BuUncentred => {
            let h = height_bound(&ratio, |r| rational::pow_int(&int(b), r));
            Ok(proper(lo, hi + h as i64, top, h))
        }
        k => Err(Error::InvalidSpec(format!("no decomposition for operator {k}"))),
    }
}

/// Writes the level set `{𝒰f > α}` (or `{ℬᵘf > α}`) as the union of its
/// inclusion-maximal triangles.
pub fn decompose_maximal(
    w: &TreeWindow,
    f: &SparseFunction,
    alpha: &Rational,
    kind: OperatorKind,
) -> Result<DecompositionReport> {
    let bases = match kind {
        OperatorKind::UUncentred => false,
        OperatorKind::BuUncentred => true,
        k => return Err(Error::InvalidSpec(format!("no decomposition for operator {k}"))),
    };
    let branching = w.spec().homogeneous_branching();
    let (need_lo, need_hi, h_bound) = required_window(branching, f, alpha, kind)?;
    let ev = Evaluator::new(w, f)?;
    let spans = w.h_min() <= need_lo && w.h_max() >= need_hi;
    if !spans && ev.escape_bound(bases) > *alpha {
        return Err(Error::WindowTooSmall {
            required_h_min: need_lo.min(w.h_min()),
            required_h_max: need_hi.max(w.h_max()),
            height_bound: h_bound,
        });
    }

    let avg = |v: VertexId, r: u32| {
        if bases {
            ev.base_average(v, r)
        } else {
            ev.triangle_average(v, r)
        }
    };

    // tallest qualifying triangle at each support ancestor
    let mut best: BTreeMap<VertexId, u32> = BTreeMap::new();
    for v in ev.support_ancestors() {
        if let Some(r) = (0..=w.depth_below(v)).rev().find(|&r| avg(v, r) > *alpha) {
            best.insert(v, r);
        }
    }
    let base_of = |v: VertexId, r: u32| w.height(v) - r as i64;
    let mut members: Vec<(VertexId, u32)> = Vec::new();
    for (&v, &r) in &best {
        let mut cur = w.parent(v);
        let mut dominated = false;
        while let Some(u) = cur {
            if let Some(&ru) = best.get(&u) {
                if base_of(u, ru) <= base_of(v, r) {
                    dominated = true;
                    break;
                }
            }
            cur = w.parent(u);
        }
        if !dominated {
            members.push((v, r));
        }
    }
    members.sort_by_key(|&(v, r)| (std::cmp::Reverse(w.height(v)), v, r));

    let mut union: HashSet<VertexId> = HashSet::new();
    let mut base_pts: HashSet<VertexId> = HashSet::new();
    let mut disjoint_bases = true;
    let mut triangles = Vec::with_capacity(members.len());
    for &(v, r) in &members {
        union.extend(w.triangle_ids(v, r));
        let base = w.shell_ids(v, r);
        for b in &base {
            disjoint_bases &= base_pts.insert(*b);
        }
        triangles.push(MemberStats {
            vertex: w.address_of(v),
            height: r,
            volume: w.volume(v, r),
            base_size: w.shell_size(v, r),
            average: avg(v, r),
        });
    }

    let level: Vec<VertexId> = w
        .ids()
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter(|&x| ev.eval_id(kind, x).value > *alpha)
        .collect();
    let union_equals_levelset = level.len() == union.len() && level.iter().all(|x| union.contains(x));

    let dal_basso_bounds = match (bases, branching) {
        (false, Some(b)) => Some(members.iter().all(|&(v, r)| {
            let mass = ev.triangle_mass(v, r as i64);
            let vol = int(w.volume(v, r));
            &mass / (alpha * int(b + 1)) <= vol && vol < &mass / alpha
        })),
        _ => None,
    };

    Ok(DecompositionReport {
        alpha: alpha.clone(),
        kind,
        level_set_size: level.len() as u64,
        level_set: level,
        triangles,
        checks: DecompositionChecks {
            disjoint_bases,
            union_equals_levelset,
            dal_basso_bounds,
        },
    })
}

/// Builds a window of the required size and decomposes there.
pub fn decompose_auto(
    spec: &crate::tree::ValenceSpec,
    f: &SparseFunction,
    alpha: &Rational,
    kind: OperatorKind,
    cap: usize,
) -> Result<DecompositionReport> {
    let (lo, hi, _) = required_window(spec.homogeneous_branching(), f, alpha, kind)?;
    let w = TreeWindow::build_with_cap(spec.clone(), hi, lo, cap)?;
    decompose_maximal(&w, f, alpha, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ValenceSpec;

    fn t2(lo: i64, hi: i64) -> TreeWindow {
        TreeWindow::build(ValenceSpec::homogeneous(2).unwrap(), hi, lo).unwrap()
    }

    fn delta_o() -> SparseFunction {
        SparseFunction::delta("0".parse().unwrap())
    }

    #[test]
    fn delta_tenth_gives_three_triangles() {
        let w = t2(-3, 3);
        let rep = decompose_maximal(&w, &delta_o(), &rational::ratio(1, 10), OperatorKind::UUncentred).unwrap();
        assert_eq!(rep.level_set_size, 15);
        let got: Vec<_> = rep.triangles.iter().map(|t| (t.vertex.to_string(), t.height, t.volume)).collect();
        assert_eq!(got, vec![("2".into(), 2, 7), ("1".into(), 2, 7), ("0".into(), 2, 7)]);
        assert!(rep.checks.all_pass());
        assert_eq!(rep.checks.dal_basso_bounds, Some(true));
    }

    #[test]
    fn bases_at_a_tenth() {
        let w = t2(-1, 4);
        let rep = decompose_maximal(&w, &delta_o(), &rational::ratio(1, 10), OperatorKind::BuUncentred).unwrap();
        assert_eq!(rep.level_set_size, 15);
        assert!(rep.checks.all_pass());
    }

    #[test]
    fn large_alpha_is_empty() {
        let w = t2(-2, 2);
        for a in [rational::one(), int(2)] {
            let rep = decompose_maximal(&w, &delta_o(), &a, OperatorKind::UUncentred).unwrap();
            assert!(rep.triangles.is_empty());
            assert_eq!(rep.level_set_size, 0);
        }
    }

    #[test]
    fn sibling_pair_merges_into_one_triangle() {
        let w = t2(-3, 3);
        let mut f = delta_o();
        f.set("1/1".parse().unwrap(), rational::one());
        let rep = decompose_maximal(&w, &f, &rational::ratio(1, 2), OperatorKind::UUncentred).unwrap();
        assert_eq!(rep.triangles.len(), 1);
        assert_eq!(rep.triangles[0].vertex.to_string(), "1");
        assert_eq!(rep.triangles[0].height, 1);
        assert_eq!(rep.triangles[0].average, rational::ratio(2, 3));
    }

    #[test]
    fn narrow_window_is_rejected() {
        let w = t2(-1, 1);
        let err = decompose_maximal(&w, &delta_o(), &rational::ratio(1, 100), OperatorKind::UUncentred).unwrap_err();
        assert!(matches!(err, Error::WindowTooSmall { height_bound: 5, .. }), "{err:?}");
    }

    #[test]
    fn level_set_rejects_undecided_values() {
        let mut m = BTreeMap::new();
        m.insert(VertexAddress::origin(), CertifiedValue::new(rational::ratio(1, 4), None, rational::one()));
        assert!(level_set(&m, &rational::ratio(1, 2)).is_err());
        assert!(level_set(&m, &rational::one()).unwrap().is_empty());
        assert_eq!(level_set(&m, &rational::ratio(1, 8)).unwrap().len(), 1);
    }
}
