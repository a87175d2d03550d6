#![allow(dead_code)]

use std::collections::HashSet;

use num_traits::Signed;
use treemax_core::rational::{self, int, Rational};
use treemax_core::{SparseFunction, TreeWindow, ValenceSpec, VertexId};

pub fn window(preset: &str, lo: i64, hi: i64) -> TreeWindow {
    TreeWindow::build(ValenceSpec::preset(preset).unwrap(), hi, lo).unwrap()
}

/// Builds a function from `(vertex index, num, den)` triples, indices taken
/// modulo the window size.
pub fn function_from(w: &TreeWindow, picks: &[(usize, i64, u64)]) -> SparseFunction {
    let mut f = SparseFunction::new();
    for &(i, n, d) in picks {
        let v = VertexId((i % w.len()) as u32);
        f.add(w.address_of(v), rational::ratio(n, d.max(1)));
    }
    f
}

pub fn abs_at(w: &TreeWindow, f: &SparseFunction, v: VertexId) -> Rational {
    f.get(&w.address_of(v)).abs()
}

fn mass(w: &TreeWindow, f: &SparseFunction, pts: &[VertexId]) -> Rational {
    pts.iter().map(|&v| abs_at(w, f, v)).sum()
}

fn better(best: &mut Rational, v: Rational) {
    if v > *best {
        *best = v;
    }
}

/// Ancestor of `v` at distance `k`, or `None` when it leaves the window.
pub fn up(w: &TreeWindow, v: VertexId, k: u32) -> Option<VertexId> {
    let mut cur = v;
    for _ in 0..k {
        cur = w.parent(cur)?;
    }
    Some(cur)
}

/// Each operator by enumerating every admissible set of the window.
pub struct Brute<'a> {
    pub w: &'a TreeWindow,
    pub f: &'a SparseFunction,
}

impl Brute<'_> {
    fn all_triangles(&self) -> Vec<(VertexId, u32, Vec<VertexId>)> {
        let mut out = Vec::new();
        for v in self.w.ids() {
            for r in 0..=self.w.depth_below(v) {
                out.push((v, r, self.w.triangle_ids(v, r)));
            }
        }
        out
    }

    pub fn t(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for r in 0..=self.w.depth_below(x) {
            let pts = self.w.triangle_ids(x, r);
            better(&mut best, mass(self.w, self.f, &pts) / int(pts.len() as u64));
        }
        best
    }

    pub fn b(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for r in 0..=self.w.depth_below(x) {
            let pts = self.w.shell_ids(x, r);
            better(&mut best, mass(self.w, self.f, &pts) / int(pts.len() as u64));
        }
        best
    }

    pub fn u(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for (_, _, pts) in self.all_triangles() {
            if pts.contains(&x) {
                better(&mut best, mass(self.w, self.f, &pts) / int(pts.len() as u64));
            }
        }
        best
    }

    pub fn bu(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for (v, r, pts) in self.all_triangles() {
            if pts.contains(&x) {
                let base = self.w.shell_ids(v, r);
                better(&mut best, mass(self.w, self.f, &base) / int(base.len() as u64));
            }
        }
        best
    }

    fn modified(&self, v: VertexId, r: u32) -> (Rational, u64, Option<VertexId>) {
        let pts = self.w.triangle_ids(v, r);
        let top = up(self.w, v, r);
        if r == 0 {
            return (mass(self.w, self.f, &pts), 1, top);
        }
        let m = mass(self.w, self.f, &pts) + top.map(|t| abs_at(self.w, self.f, t)).unwrap_or_default();
        (m, pts.len() as u64 + 1, top)
    }

    pub fn tmod(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for r in 0..=self.w.depth_below(x) {
            let (m, n, _) = self.modified(x, r);
            better(&mut best, m / int(n));
        }
        best
    }

    pub fn umod(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for (v, r, pts) in self.all_triangles() {
            let (m, n, top) = self.modified(v, r);
            if pts.contains(&x) || top == Some(x) {
                better(&mut best, m / int(n));
            }
        }
        best
    }

    pub fn k(&self, x: VertexId) -> Rational {
        let mut acc = rational::zero();
        for (a, val) in self.f.iter() {
            let y = self.w.id_of(a).unwrap();
            // smallest triangle holding both points, found by search
            let mut v = x;
            loop {
                let hv = self.w.height(v);
                let eta = (hv - self.w.height(x)).max(hv - self.w.height(y)) as u32;
                if eta <= self.w.depth_below(v) && self.w.triangle_ids(v, eta).contains(&y) {
                    acc += val / int(self.w.triangle_ids(v, eta).len() as u64);
                    break;
                }
                v = self.w.parent(v).unwrap();
            }
        }
        acc
    }

    pub fn m(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for r in 0..=self.w.ball_radius_limit(x) {
            let pts = self.w.ball_ids(x, r).unwrap();
            better(&mut best, mass(self.w, self.f, &pts) / int(pts.len() as u64));
        }
        best
    }

    pub fn n(&self, x: VertexId) -> Rational {
        let mut best = rational::zero();
        for c in self.w.ids() {
            for r in 0..=self.w.ball_radius_limit(c) {
                let pts = self.w.ball_ids(c, r).unwrap();
                if pts.contains(&x) {
                    better(&mut best, mass(self.w, self.f, &pts) / int(pts.len() as u64));
                }
            }
        }
        best
    }
}

/// Points with a triangle average above `alpha`, by enumeration.
pub fn brute_level_set(w: &TreeWindow, f: &SparseFunction, alpha: &Rational, bases: bool) -> HashSet<VertexId> {
    let mut out = HashSet::new();
    for v in w.ids() {
        for r in 0..=w.depth_below(v) {
            let pts = w.triangle_ids(v, r);
            let avg_set = if bases { w.shell_ids(v, r) } else { pts.clone() };
            let avg = mass(w, f, &avg_set) / int(avg_set.len() as u64);
            if avg > *alpha {
                out.extend(pts);
            }
        }
    }
    out
}

/// Inclusion-maximal triangles among all in-window triangles whose average
/// (over the triangle, or over its base) exceeds `alpha`.
pub fn brute_maximal_family(
    w: &TreeWindow,
    f: &SparseFunction,
    alpha: &Rational,
    bases: bool,
) -> std::collections::BTreeSet<(String, u32)> {
    let mut good: Vec<(VertexId, u32, HashSet<VertexId>)> = Vec::new();
    for v in w.ids() {
        for r in 0..=w.depth_below(v) {
            let pts = w.triangle_ids(v, r);
            let avg_set = if bases { w.shell_ids(v, r) } else { pts.clone() };
            if mass(w, f, &avg_set) / int(avg_set.len() as u64) > *alpha {
                good.push((v, r, pts.into_iter().collect()));
            }
        }
    }
    let mut out = std::collections::BTreeSet::new();
    for (i, (v, r, s)) in good.iter().enumerate() {
        let inside_other = good
            .iter()
            .enumerate()
            .any(|(j, (_, _, t))| j != i && t.len() > s.len() && s.is_subset(t));
        if !inside_other {
            out.insert((w.address_of(*v).to_string(), *r));
        }
    }
    out
}
