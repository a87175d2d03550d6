use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::Exponent;
use crate::rational::{self, int, Rational};
use crate::tree::{ModTriangleRef, TreeWindow, TriangleRef, VertexAddress, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyMember {
    Triangle(TriangleRef),
    Modified(ModTriangleRef),
}

impl FamilyMember {
    pub fn contains_member(&self, other: &FamilyMember) -> bool {
        use FamilyMember::*;
        match (self, other) {
            (Triangle(a), Triangle(b)) => b.is_subset_of(a),
            (Modified(a), Modified(b)) => {
                b.inner.is_subset_of(&a.inner) && a.contains(&b.top())
            }
            (Triangle(a), Modified(b)) => b.inner.is_subset_of(a) && a.contains(&b.top()),
            (Modified(a), Triangle(b)) => b.is_subset_of(&a.inner),
        }
    }

    /// Window ids of the member's points.
    pub fn points(&self, w: &TreeWindow) -> Result<Vec<VertexId>> {
        match self {
            FamilyMember::Triangle(t) => w.triangle_points(t),
            FamilyMember::Modified(m) => {
                let mut pts = w.triangle_points(&m.inner)?;
                if m.inner.height > 0 {
                    pts.push(w.id_of(&m.top())?);
                }
                Ok(pts)
            }
        }
    }
}

impl std::fmt::Display for FamilyMember {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyMember::Triangle(t) => t.fmt(f),
            FamilyMember::Modified(m) => m.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TriangleFamily {
    pub members: Vec<FamilyMember>,
    /// Set when no member is claimed to contain another.
    pub maximal: bool,
}

impl TriangleFamily {
    pub fn new(members: Vec<FamilyMember>) -> Self {
        TriangleFamily { members, maximal: false }
    }

    pub fn maximal(members: Vec<FamilyMember>) -> Self {
        TriangleFamily { members, maximal: true }
    }

    /// First pair `(small, big)` with `small ⊆ big`, if any.
    pub fn containment(&self) -> Option<(&FamilyMember, &FamilyMember)> {
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                if b.contains_member(a) {
                    return Some((a, b));
                }
                if a.contains_member(b) {
                    return Some((b, a));
                }
            }
        }
        None
    }
}

/// Covering multiplicities of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapProfile {
    pub omega: BTreeMap<VertexAddress, u32>,
    /// `k -> |Ω_k|`
    pub omega_k_sizes: BTreeMap<u32, u64>,
    pub union_size: u64,
}

impl OverlapProfile {
    /// `Σ_T |T|`
    pub fn total_size(&self) -> u64 {
        self.omega_k_sizes.iter().map(|(k, n)| *k as u64 * n).sum()
    }

    /// `|Ω_k| ≤ 2^{2-k} |G|` for every `k`.
    pub fn satisfies_level_decay(&self) -> bool {
        self.omega_k_sizes.iter().all(|(&k, &n)| {
            // n * 2^k <= 4 |G|
            int(n) * rational::pow2(k) <= int(4 * self.union_size)
        })
    }
}

pub fn overlap_profile(w: &TreeWindow, family: &TriangleFamily) -> Result<OverlapProfile> {
    let mut counts: HashMap<VertexId, u32> = HashMap::new();
    for m in &family.members {
        for v in m.points(w)? {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let mut omega_k_sizes = BTreeMap::new();
    for &k in counts.values() {
        *omega_k_sizes.entry(k).or_insert(0) += 1;
    }
    Ok(OverlapProfile {
        union_size: counts.len() as u64,
        omega: counts.into_iter().map(|(v, k)| (w.address_of(v), k)).collect(),
        omega_k_sizes,
    })
}

/// `A_r = 4 Σ_{k≥1} k^r 2^{-k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapConstant {
    /// Exact value for integer `r`.
    #[serde(serialize_with = "rational::opt_str::serialize")]
    pub exact: Option<Rational>,
    /// Upper bound (the value itself, rounded, when exact).
    pub upper: f64,
}

pub fn overlap_constant(r: &Exponent) -> Result<OverlapConstant> {
    match r {
        Exponent::Int(0) | Exponent::Inf => Err(Error::InvalidExponent(r.to_string())),
        Exponent::Int(n) => {
            // S_n = Σ k^n 2^{-k} satisfies S_n = 1 + Σ_{i<n} C(n,i) S_i
            let n = *n as usize;
            let mut s: Vec<Rational> = vec![rational::one()];
            let mut binom: Vec<u64> = vec![1];
            for m in 1..=n {
                let mut next = vec![1u64; m + 1];
                for i in 1..m {
                    next[i] = binom[i - 1] + binom[i];
                }
                binom = next;
                let mut acc = rational::one();
                for (i, si) in s.iter().enumerate() {
                    acc += int(binom[i]) * si;
                }
                s.push(acc);
            }
            let a = int(4) * &s[n];
            Ok(OverlapConstant {
                upper: rational::to_f64(&a),
                exact: Some(a),
            })
        }
        Exponent::Real(q) => {
            if *q < 1.0 {
                return Err(Error::InvalidExponent(r.to_string()));
            }
            let term = |k: f64| k.powf(*q) * (-k).exp2();
            // past K the term ratio stays below ((K+2)/(K+1))^q / 2 < 1
            let mut k_cut = (2.0 * q / std::f64::consts::LN_2).ceil() as u64 + 60;
            loop {
                let ratio = ((k_cut as f64 + 2.0) / (k_cut as f64 + 1.0)).powf(*q) / 2.0;
                if ratio < 0.75 {
                    break;
                }
                k_cut += 10;
            }
            let partial: f64 = (1..=k_cut).map(|k| term(k as f64)).sum();
            let ratio = ((k_cut as f64 + 2.0) / (k_cut as f64 + 1.0)).powf(*q) / 2.0;
            let tail = term(k_cut as f64 + 1.0) / (1.0 - ratio);
            // a relative margin absorbs rounding in the partial sum
            Ok(OverlapConstant {
                exact: None,
                upper: 4.0 * (partial + tail) * (1.0 + 1e-12),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfReport {
    /// `‖Σ 1_T‖_r^r` and `A_r^r |G|`, exact for integer `r`.
    #[serde(serialize_with = "rational::opt_str::serialize")]
    pub lhs_pow: Option<Rational>,
    #[serde(serialize_with = "rational::opt_str::serialize")]
    pub rhs_pow: Option<Rational>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn float_norm(p: &OverlapProfile, r: f64) -> f64 {
    p.omega_k_sizes
        .iter()
        .map(|(&k, &n)| n as f64 * (k as f64).powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// `‖Σ_T 1_T‖_r ≤ A_r ‖1_G‖_r` for a family with no nested members.
pub fn check_cordoba_fefferman(w: &TreeWindow, family: &TriangleFamily, r: &Exponent) -> Result<CfReport> {
    if family.members.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some((a, b)) = family.containment() {
        return Err(Error::NotMaximalFamily(a.to_string(), b.to_string()));
    }
    let a = overlap_constant(r)?;
    let prof = overlap_profile(w, family)?;
    let g = prof.union_size;
    match r {
        Exponent::Int(n) => {
            let lhs_pow: Rational = prof
                .omega_k_sizes
                .iter()
                .map(|(&k, &c)| int(c) * rational::pow_int(&int(k), *n))
                .sum();
            let a_exact = a.exact.expect("integer exponent");
            let rhs_pow = rational::pow_int(&a_exact, *n) * int(g);
            let lhs = float_norm(&prof, *n as f64);
            let rhs = rational::to_f64(&a_exact) * (g as f64).powf(1.0 / *n as f64);
            Ok(CfReport {
                pass: lhs_pow <= rhs_pow,
                lhs_pow: Some(lhs_pow),
                rhs_pow: Some(rhs_pow),
                lhs,
                rhs,
                ratio: lhs / rhs,
            })
        }
        Exponent::Real(q) => {
            let lhs = float_norm(&prof, *q);
            let rhs = a.upper * (g as f64).powf(1.0 / q);
            Ok(CfReport {
                lhs_pow: None,
                rhs_pow: None,
                lhs,
                rhs,
                ratio: lhs / rhs,
                pass: lhs <= rhs * (1.0 + 1e-9),
            })
        }
        Exponent::Inf => Err(Error::InvalidExponent(r.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfFailureReport {
    pub successors: u32,
    /// `‖Σ 1_{T'}‖_r^r`, exact for integer `r`.
    #[serde(serialize_with = "rational::opt_str::serialize")]
    pub lhs_pow: Option<Rational>,
    pub lhs_pow_f64: f64,
    pub union_size: u64,
    /// `(‖Σ 1_{T'}‖_r / ‖1_{G'}‖_r)^r`
    #[serde(serialize_with = "rational::opt_str::serialize")]
    pub ratio: Option<Rational>,
    pub ratio_f64: f64,
    /// The same quotient when the spiked vertex is credited one more successor.
    pub ratio_plus_one_f64: f64,
}

/// Overlap of `{T'_1(y) : y a successor of the spiked vertex x}` where `x` is
/// the vertex with largest valence in the window. Every member holds `x`.
pub fn check_cf_failure_modified(w: &TreeWindow, spike: &VertexAddress, r: &Exponent) -> Result<CfFailureReport> {
    let x = w.id_of(spike)?;
    let members: Vec<FamilyMember> = w
        .children(x)
        .map(|y| FamilyMember::Modified(ModTriangleRef::new(w.address_of(y), 1)))
        .collect();
    let fam = TriangleFamily::new(members);
    let prof = overlap_profile(w, &fam)?;
    let n = w.successor_count(x);
    let g = prof.union_size;
    let q = match r {
        Exponent::Int(k) => *k as f64,
        Exponent::Real(q) => *q,
        Exponent::Inf => return Err(Error::InvalidExponent(r.to_string())),
    };
    let lhs_pow = match r {
        Exponent::Int(k) => Some(
            prof.omega_k_sizes
                .iter()
                .map(|(&m, &c)| int(c) * rational::pow_int(&int(m), *k))
                .sum::<Rational>(),
        ),
        _ => None,
    };
    let lhs_pow_f64 = prof
        .omega_k_sizes
        .iter()
        .map(|(&m, &c)| c as f64 * (m as f64).powf(q))
        .sum::<f64>();
    // the non-shared points per member stay fixed when a successor is added
    let per = (g - 1) as f64 / n as f64;
    let n1 = n as f64 + 1.0;
    Ok(CfFailureReport {
        successors: n,
        ratio: lhs_pow.as_ref().map(|l| l / int(g)),
        ratio_f64: lhs_pow_f64 / g as f64,
        ratio_plus_one_f64: (per * n1 + n1.powf(q)) / (per * n1 + 1.0),
        lhs_pow,
        lhs_pow_f64,
        union_size: g,
    })
}

/// Random antichain of in-window triangles: sample, then drop any sample
/// comparable with one already kept.
pub fn random_maximal_family(w: &TreeWindow, attempts: usize, seed: u64) -> TriangleFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept: Vec<FamilyMember> = Vec::new();
    for _ in 0..attempts {
        let v = VertexId(rng.gen_range(0..w.len() as u32));
        let r = rng.gen_range(0..=w.depth_below(v));
        let t = FamilyMember::Triangle(TriangleRef::new(w.address_of(v), r));
        if kept.iter().all(|k| !k.contains_member(&t) && !t.contains_member(k)) {
            kept.push(t);
        }
    }
    TriangleFamily::maximal(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::ValenceSpec;

    fn tri(a: &str, r: u32) -> FamilyMember {
        FamilyMember::Triangle(TriangleRef::new(a.parse().unwrap(), r))
    }

    #[test]
    fn integer_constants() {
        for (r, a) in [(1, 8), (2, 24), (3, 104)] {
            assert_eq!(overlap_constant(&Exponent::Int(r)).unwrap().exact, Some(int(a)));
        }
        assert!(overlap_constant(&Exponent::Real(0.5)).is_err());
    }

    #[test]
    fn real_constant_brackets_neighbours() {
        let a = overlap_constant(&Exponent::Real(1.5)).unwrap().upper;
        assert!(a > 8.0 && a < 24.0, "{a}");
        // partial sums approach from below
        let direct: f64 = 4.0 * (1..200).map(|k| (k as f64).powf(1.5) * (-(k as f64)).exp2()).sum::<f64>();
        assert!(a >= direct && a - direct < 1e-9);
    }

    #[test]
    fn two_incomparable_triangles() {
        let w = TreeWindow::build(ValenceSpec::homogeneous(2).unwrap(), 3, -3).unwrap();
        let fam = TriangleFamily::maximal(vec![tri("0", 1), tri("1", 1)]);
        let p = overlap_profile(&w, &fam).unwrap();
        assert_eq!(p.union_size, 5);
        assert_eq!(p.omega_k_sizes, BTreeMap::from([(1, 4), (2, 1)]));
        assert_eq!(p.omega[&"0".parse().unwrap()], 2);
        let r1 = check_cordoba_fefferman(&w, &fam, &Exponent::Int(1)).unwrap();
        assert_eq!((r1.lhs_pow, r1.rhs_pow), (Some(int(6)), Some(int(40))));
        let r2 = check_cordoba_fefferman(&w, &fam, &Exponent::Int(2)).unwrap();
        assert_eq!((r2.lhs_pow, r2.rhs_pow), (Some(int(8)), Some(int(2880))));
        assert!(r2.pass);
    }

    #[test]
    fn nested_family_is_rejected() {
        let w = TreeWindow::build(ValenceSpec::homogeneous(2).unwrap(), 3, -3).unwrap();
        let fam = TriangleFamily::maximal(vec![tri("0", 1), tri("1", 2)]);
        assert!(matches!(
            check_cordoba_fefferman(&w, &fam, &Exponent::Int(1)),
            Err(Error::NotMaximalFamily(_, _))
        ));
    }

    #[test]
    fn spike_counts() {
        for (j, lhs, g) in [(1u32, 10, 7), (6, 70, 22)] {
            let w = TreeWindow::build(ValenceSpec::spiked(j).unwrap(), 1, -2).unwrap();
            let rep = check_cf_failure_modified(&w, &"0".parse().unwrap(), &Exponent::Int(2)).unwrap();
            assert_eq!(rep.successors, j + 1);
            assert_eq!(rep.lhs_pow, Some(int(lhs)));
            assert_eq!(rep.union_size, g);
            let r1 = check_cf_failure_modified(&w, &"0".parse().unwrap(), &Exponent::Int(1)).unwrap();
            assert_eq!(r1.lhs_pow, Some(int(4 * (j as i64 + 1))));
        }
    }

    #[test]
    fn random_families_are_antichains() {
        let w = TreeWindow::build(ValenceSpec::homogeneous(2).unwrap(), 3, -3).unwrap();
        let fam = random_maximal_family(&w, 40, 7);
        assert!(!fam.members.is_empty());
        assert!(fam.containment().is_none());
        assert_eq!(fam, random_maximal_family(&w, 40, 7));
    }
}
