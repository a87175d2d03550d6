use std::collections::HashMap;
use std::sync::OnceLock;

use super::{CertifiedValue, OperatorKind, Witness};
use crate::error::{Error, Result};
use crate::function::SparseFunction;
use crate::rational::{self, int, pow2, Rational};
use crate::tree::{ModTriangleRef, TreeWindow, TriangleRef, VertexAddress, VertexId};

const NO_SLOT: u32 = u32::MAX;

/// Best average over `R >= k` for one vertex; `r` is the smallest maximiser.
#[derive(Clone, Debug)]
struct Suffix {
    value: Rational,
    r: u32,
}

/// Shell masses of `|f|` below one vertex whose subtree meets the support.
#[derive(Debug)]
struct Profile {
    /// mass of `T_R(v)`
    cum: Vec<Rational>,
    /// mass of `s^R(v)`
    shell: Vec<Rational>,
    best_tri: Vec<Suffix>,
    best_base: Vec<Suffix>,
    best_mod: Vec<Suffix>,
}

/// A candidate supremum; ties prefer smaller height, then lower vertex.
#[derive(Clone, Debug)]
struct Cand {
    value: Rational,
    r: u32,
    vertex_height: i64,
    vertex: VertexId,
}

impl Cand {
    fn beats(&self, other: &Cand) -> bool {
        match self.value.cmp(&other.value) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                (self.r, self.vertex_height, self.vertex)
                    < (other.r, other.vertex_height, other.vertex)
            }
        }
    }
}

fn offer(best: &mut Option<Cand>, c: Cand) {
    if best.as_ref().is_none_or(|b| c.beats(b)) {
        *best = Some(c);
    }
}

fn suffix_best(len: usize, avg: impl Fn(usize) -> Rational) -> Vec<Suffix> {
    let mut out: Vec<Suffix> = Vec::with_capacity(len);
    for r in (0..len).rev() {
        let a = avg(r);
        let keep_new = out.last().is_none_or(|s| a >= s.value);
        let s = if keep_new {
            Suffix { value: a, r: r as u32 }
        } else {
            out.last().unwrap().clone()
        };
        out.push(s);
    }
    out.reverse();
    out
}

fn suffix_max(vals: Vec<Rational>) -> Vec<Rational> {
    let mut out = vals;
    for i in (0..out.len().saturating_sub(1)).rev() {
        if out[i + 1] > out[i] {
            out[i] = out[i + 1].clone();
        }
    }
    out
}

/// Prepared evaluation state for one function on one window.
///
/// Only vertices above some support point can carry mass in a triangle, so
/// shell masses are kept for that ancestor set alone. Everything the window
/// cannot see is covered by explicit tail bounds that use only `ν ≥ 3`.
pub struct Evaluator<'w> {
    w: &'w TreeWindow,
    signed: Vec<(VertexId, Rational)>,
    abs: HashMap<VertexId, Rational>,
    l1: Rational,
    slot: Vec<u32>,
    profiles: Vec<Profile>,
    // tails for candidates whose vertex lies above the apex, indexed by the
    // minimal depth below the apex that the candidate must reach
    above_tri: Vec<Rational>,
    above_base: Vec<Rational>,
    above_mod: Vec<Rational>,
    // best modified triangle whose adjoined top point is the key
    top_best: HashMap<VertexId, Cand>,
    ball_best: OnceLock<Vec<Vec<Suffix>>>,
}

impl<'w> Evaluator<'w> {
    pub fn new(w: &'w TreeWindow, f: &SparseFunction) -> Result<Self> {
        let signed = f.resolve(w)?;
        let abs: HashMap<VertexId, Rational> = signed
            .iter()
            .map(|(v, x)| (*v, rational::abs(x)))
            .collect();
        let l1 = f.l1();

        let mut slot = vec![NO_SLOT; w.len()];
        let mut members: Vec<VertexId> = Vec::new();
        let mut shells: Vec<Vec<Rational>> = Vec::new();
        for (&y, m) in &abs {
            let mut cur = Some(y);
            let mut k = 0usize;
            while let Some(v) = cur {
                let s = &mut slot[v.index()];
                if *s == NO_SLOT {
                    *s = members.len() as u32;
                    members.push(v);
                    shells.push(vec![rational::zero(); w.depth_below(v) as usize + 1]);
                }
                shells[*s as usize][k] += m;
                cur = w.parent(v);
                k += 1;
            }
        }

        let abs_ref = &abs;
        let f_at = |v: Option<VertexId>| -> Rational {
            v.and_then(|v| abs_ref.get(&v).cloned())
                .unwrap_or_else(rational::zero)
        };

        let mut profiles = Vec::with_capacity(members.len());
        for (v, shell) in members.iter().zip(shells) {
            let v = *v;
            let len = shell.len();
            let mut cum = Vec::with_capacity(len);
            let mut acc = rational::zero();
            for s in &shell {
                acc += s;
                cum.push(acc.clone());
            }
            let best_tri = suffix_best(len, |r| &cum[r] / int(w.volume(v, r as u32)));
            let best_base = suffix_best(len, |r| &shell[r] / int(w.shell_size(v, r as u32)));
            let tops: Vec<Rational> = (0..len)
                .map(|r| f_at(w.ancestor_id(v, r as u32)))
                .collect();
            let best_mod = suffix_best(len, |r| {
                if r == 0 {
                    cum[0].clone()
                } else {
                    (&cum[r] + &tops[r]) / int(w.volume(v, r as u32) + 1)
                }
            });
            profiles.push(Profile {
                cum,
                shell,
                best_tri,
                best_base,
                best_mod,
            });
        }

        let mut ev = Evaluator {
            w,
            signed,
            abs,
            l1,
            slot,
            profiles,
            above_tri: Vec::new(),
            above_base: Vec::new(),
            above_mod: Vec::new(),
            top_best: HashMap::new(),
            ball_best: OnceLock::new(),
        };
        ev.prepare_tails();
        ev.prepare_tops();
        Ok(ev)
    }

    fn prepare_tails(&mut self) {
        let w = self.w;
        let apex = w.apex();
        let d = w.depth_below(apex) as usize;
        let Some(p) = self.profile(apex) else {
            self.above_tri = vec![rational::zero(); d + 1];
            self.above_base = vec![rational::zero(); d + 1];
            self.above_mod = vec![rational::zero(); d + 1];
            return;
        };
        // A triangle with vertex x_m, m > h_max, reaching depth R' below the
        // apex also holds the ray segment and a sibling branch with at least
        // 2^{R'+1} - 1 vertices (2^{R'} on its base row).
        let mut tri = Vec::with_capacity(d + 1);
        let mut base = Vec::with_capacity(d + 1);
        let mut modi = Vec::with_capacity(d + 1);
        for r in 0..=d {
            let vol = int(w.volume(apex, r as u32)) + pow2(r as u32 + 1);
            tri.push(&p.cum[r] / &vol);
            modi.push(&p.cum[r] / (vol + int(1)));
            let bsz = int(w.shell_size(apex, r as u32)) + pow2(r as u32);
            base.push(&p.shell[r] / bsz);
        }
        self.above_tri = suffix_max(tri);
        self.above_base = suffix_max(base);
        self.above_mod = suffix_max(modi);
    }

    fn prepare_tops(&mut self) {
        let w = self.w;
        let mut top_best: HashMap<VertexId, Cand> = HashMap::new();
        for v in w.ids() {
            let Some(p) = self.profile(v) else { continue };
            let mut cur = v;
            for r in 1..p.cum.len() {
                let Some(u) = w.parent(cur) else { break };
                cur = u;
                let value = (&p.cum[r] + self.f_abs(u)) / int(w.volume(v, r as u32) + 1);
                let cand = Cand {
                    value,
                    r: r as u32,
                    vertex_height: w.height(v),
                    vertex: v,
                };
                match top_best.get_mut(&u) {
                    Some(b) => {
                        if cand.beats(b) {
                            *b = cand;
                        }
                    }
                    None => {
                        top_best.insert(u, cand);
                    }
                }
            }
        }
        self.top_best = top_best;
    }

    pub fn window(&self) -> &TreeWindow {
        self.w
    }

    /// `‖f‖₁`.
    pub fn l1(&self) -> &Rational {
        &self.l1
    }

    pub fn support(&self) -> impl Iterator<Item = (VertexId, &Rational)> {
        self.signed.iter().map(|(v, x)| (*v, x))
    }

    /// Vertices lying above some support point.
    pub fn support_ancestors(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.w
            .ids()
            .filter(|v| self.slot[v.index()] != NO_SLOT)
    }

    fn profile(&self, v: VertexId) -> Option<&Profile> {
        let s = self.slot[v.index()];
        (s != NO_SLOT).then(|| &self.profiles[s as usize])
    }

    fn f_abs(&self, v: VertexId) -> Rational {
        self.abs.get(&v).cloned().unwrap_or_else(rational::zero)
    }

    /// `Σ_{T_R(v)} |f|`, zero when `r < 0`.
    pub fn triangle_mass(&self, v: VertexId, r: i64) -> Rational {
        if r < 0 {
            return rational::zero();
        }
        match self.profile(v) {
            Some(p) => p.cum[r as usize].clone(),
            None => rational::zero(),
        }
    }

    /// `Σ_{s^R(v)} |f|`.
    pub fn shell_mass(&self, v: VertexId, r: u32) -> Rational {
        match self.profile(v) {
            Some(p) => p.shell[r as usize].clone(),
            None => rational::zero(),
        }
    }

    /// Mass of `|f|` in the subtree of `v` inside the window.
    pub fn subtree_mass(&self, v: VertexId) -> Rational {
        self.triangle_mass(v, self.w.depth_below(v) as i64)
    }

    fn tri_witness(&self, c: &Cand) -> Witness {
        Witness::Triangle(TriangleRef::new(self.w.address_of(c.vertex), c.r))
    }

    fn point_cand(&self, x: VertexId) -> Cand {
        Cand {
            value: self.f_abs(x),
            r: 0,
            vertex_height: self.w.height(x),
            vertex: x,
        }
    }

    pub fn eval_at(&self, kind: OperatorKind, x: &VertexAddress) -> Result<CertifiedValue> {
        let id = self.w.id_of(x)?;
        Ok(self.eval_id(kind, id))
    }

    pub fn eval_id(&self, kind: OperatorKind, x: VertexId) -> CertifiedValue {
        match kind {
            OperatorKind::TCentred => self.t_centred(x),
            OperatorKind::UUncentred => self.u_uncentred(x),
            OperatorKind::BCentred => self.b_centred(x),
            OperatorKind::BuUncentred => self.bu_uncentred(x),
            OperatorKind::TMod => self.t_mod(x),
            OperatorKind::UMod => self.u_mod(x),
            OperatorKind::KKernel => CertifiedValue::exact(self.kernel_at(x)),
            OperatorKind::MHlCentred => self.m_centred(x),
            OperatorKind::NHlUncentred => self.n_uncentred(x),
        }
    }

    pub fn t_centred(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        match self.profile(x) {
            Some(p) => {
                let s = &p.best_tri[0];
                let c = Cand {
                    value: s.value.clone(),
                    r: s.r,
                    vertex_height: w.height(x),
                    vertex: x,
                };
                // deeper triangles keep the subtree mass and grow
                let tail = p.cum.last().unwrap() / int(w.volume_beyond(x));
                CertifiedValue::new(c.value.clone(), Some(self.tri_witness(&c)), tail)
            }
            None => CertifiedValue::new(
                rational::zero(),
                Some(self.tri_witness(&self.point_cand(x))),
                rational::zero(),
            ),
        }
    }

    pub fn b_centred(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        let c = match self.profile(x) {
            Some(p) => Cand {
                value: p.best_base[0].value.clone(),
                r: p.best_base[0].r,
                vertex_height: w.height(x),
                vertex: x,
            },
            None => self.point_cand(x),
        };
        // shells below the window carry no mass
        let wit = Witness::Base(TriangleRef::new(w.address_of(c.vertex), c.r));
        CertifiedValue::new(c.value, Some(wit), rational::zero())
    }

    fn best_over_ancestors(&self, x: VertexId, pick: impl Fn(&Profile) -> &Vec<Suffix>) -> Cand {
        let w = self.w;
        let mut best = Some(self.point_cand(x));
        let mut cur = Some(x);
        let mut k = 0usize;
        while let Some(v) = cur {
            if let Some(p) = self.profile(v) {
                let s = &pick(p)[k];
                offer(
                    &mut best,
                    Cand {
                        value: s.value.clone(),
                        r: s.r,
                        vertex_height: w.height(v),
                        vertex: v,
                    },
                );
            }
            cur = w.parent(v);
            k += 1;
        }
        best.unwrap()
    }

    pub fn u_uncentred(&self, x: VertexId) -> CertifiedValue {
        let best = self.best_over_ancestors(x, |p| &p.best_tri);
        // Triangles with vertex in the window but base below it keep the
        // subtree mass of their vertex and are beaten by the deepest in-window
        // triangle at that vertex; only vertices above the apex remain.
        let t = (self.w.h_max() - self.w.height(x)) as usize;
        let tail = self.above_tri[t].clone();
        CertifiedValue::new(best.value.clone(), Some(self.tri_witness(&best)), tail)
    }

    pub fn bu_uncentred(&self, x: VertexId) -> CertifiedValue {
        let best = self.best_over_ancestors(x, |p| &p.best_base);
        let t = (self.w.h_max() - self.w.height(x)) as usize;
        let tail = self.above_base[t].clone();
        let wit = Witness::Base(TriangleRef::new(self.w.address_of(best.vertex), best.r));
        CertifiedValue::new(best.value, Some(wit), tail)
    }

    fn mod_witness(&self, c: &Cand) -> Witness {
        Witness::Modified(ModTriangleRef::new(self.w.address_of(c.vertex), c.r))
    }

    /// `|f|` along the path from `x` to the apex.
    fn path_values(&self, x: VertexId) -> (Vec<VertexId>, Vec<(usize, Rational)>) {
        let mut path = Vec::new();
        let mut hits = Vec::new();
        let mut cur = Some(x);
        while let Some(v) = cur {
            if let Some(m) = self.abs.get(&v) {
                hits.push((path.len(), m.clone()));
            }
            path.push(v);
            cur = self.w.parent(v);
        }
        (path, hits)
    }

    pub fn t_mod(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        let d = w.depth_below(x);
        let (path, hits) = self.path_values(x);
        let mut best = Some(self.point_cand(x));
        for r in 1..=d {
            let top = path
                .get(r as usize)
                .map(|&u| self.f_abs(u))
                .unwrap_or_else(rational::zero);
            let value = (self.triangle_mass(x, r as i64) + top) / int(w.volume(x, r) + 1);
            offer(
                &mut best,
                Cand {
                    value,
                    r,
                    vertex_height: w.height(x),
                    vertex: x,
                },
            );
        }
        let far_top = hits
            .iter()
            .filter(|(j, _)| *j > d as usize)
            .map(|(_, m)| m.clone())
            .max()
            .unwrap_or_else(rational::zero);
        let tail = (self.subtree_mass(x) + far_top) / int(w.volume_beyond(x) + 1);
        let best = best.unwrap();
        CertifiedValue::new(best.value.clone(), Some(self.mod_witness(&best)), tail)
    }

    pub fn u_mod(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        let (path, hits) = self.path_values(x);
        let mut best = Some(self.point_cand(x));
        let mut tail = rational::zero();

        // x inside T_R(v) for v = p^k(x), R >= k
        for (k, &v) in path.iter().enumerate() {
            let dv = w.depth_below(v) as usize;
            match self.profile(v) {
                Some(p) => {
                    let s = &p.best_mod[k];
                    offer(
                        &mut best,
                        Cand {
                            value: s.value.clone(),
                            r: s.r,
                            vertex_height: w.height(v),
                            vertex: v,
                        },
                    );
                }
                None => {
                    for (j, m) in &hits {
                        if *j <= k {
                            continue;
                        }
                        let r = j - k;
                        if r >= k && r <= dv {
                            let value = m / int(w.volume(v, r as u32) + 1);
                            offer(
                                &mut best,
                                Cand {
                                    value,
                                    r: r as u32,
                                    vertex_height: w.height(v),
                                    vertex: v,
                                },
                            );
                        }
                    }
                }
            }
            let far_top = hits
                .iter()
                .filter(|(j, _)| j - k.min(*j) > dv && *j > k)
                .map(|(_, m)| m.clone())
                .max()
                .unwrap_or_else(rational::zero);
            let t = (self.subtree_mass(v) + far_top) / int(w.volume_beyond(v) + 1);
            if t > tail {
                tail = t;
            }
        }

        // x as the adjoined point p^R(v)
        if let Some(c) = self.top_best.get(&x) {
            offer(&mut best, c.clone());
        }
        let fx = self.f_abs(x);
        if fx > rational::zero() {
            let rlim = w.depth_below(x) / 2;
            for r in 1..=rlim {
                for v in w.shell_ids(x, r) {
                    let value = (&fx + self.triangle_mass(v, r as i64)) / int(w.volume(v, r) + 1);
                    offer(
                        &mut best,
                        Cand {
                            value,
                            r,
                            vertex_height: w.height(v),
                            vertex: v,
                        },
                    );
                }
            }
        }
        // adjoined point x with T_R(v) reaching below the window
        let rb = w.depth_below(x) / 2 + 1;
        let t = self.subtree_mass(x) / pow2(rb + 1);
        if t > tail {
            tail = t;
        }
        let t = self.above_mod[(w.h_max() - w.height(x)) as usize].clone();
        if t > tail {
            tail = t;
        }

        let best = best.unwrap();
        CertifiedValue::new(best.value.clone(), Some(self.mod_witness(&best)), tail)
    }

    /// Mass and size of `B_r(c)`, assembled from triangles along the path up.
    fn ball_stats(&self, c: VertexId, r: u32) -> (Rational, u64) {
        let w = self.w;
        let mut mass = rational::zero();
        let mut size = 0u64;
        let mut prev: Option<VertexId> = None;
        let mut cur = c;
        for j in 0..=r {
            let reach = (r - j) as i64;
            mass += self.triangle_mass(cur, reach);
            size += w.volume(cur, reach as u32);
            if let Some(p) = prev {
                mass -= self.triangle_mass(p, reach - 1);
                if reach >= 1 {
                    size -= w.volume(p, reach as u32 - 1);
                }
            }
            if j < r {
                prev = Some(cur);
                cur = w.parent(cur).expect("ball inside window");
            }
        }
        (mass, size)
    }

    pub fn ball_average(&self, c: VertexId, r: u32) -> Result<Rational> {
        if r > self.w.ball_radius_limit(c) {
            return Err(Error::BallOutOfWindow {
                center: self.w.address_of(c).to_string(),
                radius: r,
            });
        }
        let (m, s) = self.ball_stats(c, r);
        Ok(m / int(s))
    }

    fn ball_suffixes(&self, c: VertexId) -> Vec<Suffix> {
        let lim = self.w.ball_radius_limit(c) as usize;
        let (top_mass, _) = self.ball_stats(c, lim as u32);
        if top_mass == rational::zero() {
            return Vec::new();
        }
        suffix_best(lim + 1, |r| {
            let (m, s) = self.ball_stats(c, r as u32);
            m / int(s)
        })
    }

    pub fn m_centred(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        let lim = w.ball_radius_limit(x);
        let mut best: Option<(Rational, u32)> = None;
        let mut last_size = 1u64;
        for r in 0..=lim {
            let (m, s) = self.ball_stats(x, r);
            last_size = s;
            let avg = m / int(s);
            if best.as_ref().is_none_or(|(b, _)| avg > *b) {
                best = Some((avg, r));
            }
        }
        let (value, radius) = best.unwrap();
        // B_r(x) holds T_r(x) and r ancestors, and grows strictly with r
        let next = lim as u64 + 1;
        let lower = (int(last_size) + int(1)).max(pow2(next as u32 + 1) - int(1) + int(next));
        let tail = &self.l1 / lower;
        let wit = Witness::Ball {
            center: w.address_of(x),
            radius,
        };
        CertifiedValue::new(value, Some(wit), tail)
    }

    pub fn n_uncentred(&self, x: VertexId) -> CertifiedValue {
        let w = self.w;
        let table = self
            .ball_best
            .get_or_init(|| w.ids().map(|c| self.ball_suffixes(c)).collect());
        let reach = (w.h_max() - w.h_min()) as u32 / 2;
        let mut best = Some(Cand {
            value: self.f_abs(x),
            r: 0,
            vertex_height: w.height(x),
            vertex: x,
        });
        let mut frontier = vec![(x, None::<VertexId>)];
        let mut dist = 0u32;
        while !frontier.is_empty() && dist <= reach {
            let mut next = Vec::new();
            for &(c, from) in &frontier {
                if let Some(s) = table[c.index()].get(dist as usize) {
                    offer(
                        &mut best,
                        Cand {
                            value: s.value.clone(),
                            r: s.r,
                            vertex_height: w.height(c),
                            vertex: c,
                        },
                    );
                }
                for nb in w.parent(c).into_iter().chain(w.children(c)) {
                    if Some(nb) != from {
                        next.push((nb, Some(c)));
                    }
                }
            }
            frontier = next;
            dist += 1;
        }
        // an out-of-window ball through x has radius above half the distance
        // from x to the nearer window edge
        let edge = (w.h_max() - w.height(x)).min(w.height(x) - w.h_min()) as u32;
        let rc = edge / 2 + 1;
        let tail = &self.l1 / (pow2(rc + 1) - int(1) + int(rc));
        let best = best.unwrap();
        let wit = Witness::Ball {
            center: w.address_of(best.vertex),
            radius: best.r,
        };
        CertifiedValue::new(best.value, Some(wit), tail)
    }

    /// `Σ_y κ(x, y) f(y)` with the signed values of `f`.
    pub fn kernel_at(&self, x: VertexId) -> Rational {
        self.signed
            .iter()
            .map(|(y, fy)| {
                let (c, eta) = self.w.confluent_id(x, *y);
                fy / int(self.w.volume(c, eta))
            })
            .sum()
    }

    /// Escape bound for level sets: an upper bound on the `|f|`-average of
    /// every triangle (`bases == false`) or base (`bases == true`) that is not
    /// fully inside the window.
    pub fn escape_bound(&self, bases: bool) -> Rational {
        if bases {
            // bases below the window carry no mass
            return self.above_base[0].clone();
        }
        let mut b = self.above_tri[0].clone();
        for v in self.support_ancestors() {
            let t = self.subtree_mass(v) / int(self.w.volume_beyond(v));
            if t > b {
                b = t;
            }
        }
        b
    }

    /// `|f|`-average of `T_R(v)`.
    pub fn triangle_average(&self, v: VertexId, r: u32) -> Rational {
        self.triangle_mass(v, r as i64) / int(self.w.volume(v, r))
    }

    /// `|f|`-average of `s^R(v)`.
    pub fn base_average(&self, v: VertexId, r: u32) -> Rational {
        self.shell_mass(v, r) / int(self.w.shell_size(v, r))
    }
}
