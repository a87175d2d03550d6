use std::collections::VecDeque;
use std::ops::Range;

use super::address::VertexAddress;
use super::spec::ValenceSpec;
use super::triangle::TriangleRef;
use crate::error::{Error, Result};

pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

const NONE: u32 = u32::MAX;

/// Dense index of a vertex inside one [`TreeWindow`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The ray vertex `x_{h_max}` together with all of its descendants of height
/// at least `h_min`, laid out breadth-first so that every horocycle and every
/// sibling group occupies a contiguous id range.
#[derive(Clone, Debug)]
pub struct TreeWindow {
    spec: ValenceSpec,
    h_max: i64,
    h_min: i64,
    height: Vec<i32>,
    parent: Vec<u32>,
    label: Vec<u32>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
    // ids of ray vertices x_m, indexed by m - ray_lo
    ray_lo: i64,
    ray_ids: Vec<u32>,
    // id range of each horocycle, indexed by h_max - h
    levels: Vec<Range<u32>>,
    // |s^j(v)| and |T_j(v)| for j = 0..=h(v) - h_min
    profile_offset: Vec<usize>,
    shell: Vec<u64>,
    volume: Vec<u64>,
}

impl TreeWindow {
    pub fn build(spec: ValenceSpec, h_max: i64, h_min: i64) -> Result<Self> {
        Self::build_with_cap(spec, h_max, h_min, DEFAULT_VERTEX_CAP)
    }

    pub fn build_with_cap(spec: ValenceSpec, h_max: i64, h_min: i64, cap: usize) -> Result<Self> {
        if h_min >= h_max {
            return Err(Error::EmptyHeightRange { h_min, h_max });
        }
        if h_max < 0 {
            return Err(Error::NegativeApex(h_max));
        }
        let mut w = TreeWindow {
            spec,
            h_max,
            h_min,
            height: vec![h_max as i32],
            parent: vec![NONE],
            label: vec![0],
            first_child: Vec::new(),
            child_count: Vec::new(),
            ray_lo: h_min.max(0),
            ray_ids: vec![NONE; (h_max - h_min.max(0) + 1) as usize],
            levels: Vec::new(),
            profile_offset: Vec::new(),
            shell: Vec::new(),
            volume: Vec::new(),
        };
        w.ray_ids[(h_max - w.ray_lo) as usize] = 0;
        let overrides = w.spec.has_overrides();

        let mut id = 0usize;
        while id < w.height.len() {
            let h = w.height[id] as i64;
            if h == h_min {
                w.first_child.push(NONE);
                w.child_count.push(0);
                id += 1;
                continue;
            }
            let on_ray = w.is_ray(VertexId(id as u32));
            let nu = if on_ray {
                w.spec.valence(&VertexAddress::ray(h as u64))
            } else if overrides {
                w.spec.valence(&w.address_of(VertexId(id as u32)))
            } else {
                w.spec.height_rule(h)
            };
            let succ = nu - 1;
            if w.height.len() + succ as usize > cap {
                return Err(Error::VertexCap { cap });
            }
            let labels: Vec<u32> = if on_ray && h >= 1 {
                (0..succ).collect()
            } else if on_ray {
                (1..=succ).collect()
            } else {
                (0..succ).collect()
            };
            w.first_child.push(w.height.len() as u32);
            w.child_count.push(succ);
            for l in labels {
                let cid = w.height.len() as u32;
                w.height.push((h - 1) as i32);
                w.parent.push(id as u32);
                w.label.push(l);
                if on_ray && h >= 1 && l == 0 && h > w.ray_lo {
                    w.ray_ids[(h - 1 - w.ray_lo) as usize] = cid;
                }
            }
            id += 1;
        }

        let mut levels = Vec::with_capacity((h_max - h_min + 1) as usize);
        let mut start = 0u32;
        for (i, &h) in w.height.iter().enumerate() {
            if i > 0 && h != w.height[i - 1] {
                levels.push(start..i as u32);
                start = i as u32;
            }
        }
        levels.push(start..w.height.len() as u32);
        w.levels = levels;
        w.compute_profiles();
        Ok(w)
    }

    fn compute_profiles(&mut self) {
        let n = self.height.len();
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for &h in &self.height {
            offset.push(total);
            total += (h as i64 - self.h_min) as usize + 1;
        }
        offset.push(total);
        let mut shell = vec![0u64; total];
        for v in (0..n).rev() {
            let depth = offset[v + 1] - offset[v];
            shell[offset[v]] = 1;
            let fc = self.first_child[v];
            if fc == NONE {
                continue;
            }
            for c in fc..fc + self.child_count[v] {
                let co = offset[c as usize];
                for j in 1..depth {
                    shell[offset[v] + j] += shell[co + j - 1];
                }
            }
        }
        let mut volume = shell.clone();
        for v in 0..n {
            for i in offset[v] + 1..offset[v + 1] {
                volume[i] += volume[i - 1];
            }
        }
        self.profile_offset = offset;
        self.shell = shell;
        self.volume = volume;
    }

    pub fn spec(&self) -> &ValenceSpec {
        &self.spec
    }

    pub fn h_max(&self) -> i64 {
        self.h_max
    }

    pub fn h_min(&self) -> i64 {
        self.h_min
    }

    pub fn len(&self) -> usize {
        self.height.len()
    }

    pub fn is_empty(&self) -> bool {
        self.height.is_empty()
    }

    pub fn apex(&self) -> VertexId {
        VertexId(0)
    }

    pub fn ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.height.len() as u32).map(VertexId)
    }

    pub fn height(&self, v: VertexId) -> i64 {
        self.height[v.index()] as i64
    }

    /// Largest `R` such that `T_R(v)` lies in the window.
    pub fn depth_below(&self, v: VertexId) -> u32 {
        (self.height(v) - self.h_min) as u32
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        let p = self.parent[v.index()];
        (p != NONE).then_some(VertexId(p))
    }

    pub fn ancestor_id(&self, v: VertexId, k: u32) -> Option<VertexId> {
        let mut cur = v;
        for _ in 0..k {
            cur = self.parent(cur)?;
        }
        Some(cur)
    }

    pub fn children(&self, v: VertexId) -> impl Iterator<Item = VertexId> {
        let fc = self.first_child[v.index()];
        let range = if fc == NONE {
            0..0
        } else {
            fc..fc + self.child_count[v.index()]
        };
        range.map(VertexId)
    }

    pub fn successor_count(&self, v: VertexId) -> u32 {
        self.child_count[v.index()]
    }

    /// Ids of the horocycle `ℌ_h` inside the window.
    pub fn horocycle(&self, h: i64) -> impl Iterator<Item = VertexId> {
        let range = if h < self.h_min || h > self.h_max {
            0..0
        } else {
            self.levels[(self.h_max - h) as usize].clone()
        };
        range.map(VertexId)
    }

    pub fn is_ray(&self, v: VertexId) -> bool {
        let h = self.height(v);
        h >= self.ray_lo && self.ray_ids[(h - self.ray_lo) as usize] == v.0
    }

    pub fn ray_id(&self, m: i64) -> Option<VertexId> {
        if m < self.ray_lo || m > self.h_max {
            return None;
        }
        let id = self.ray_ids[(m - self.ray_lo) as usize];
        (id != NONE).then_some(VertexId(id))
    }

    pub fn address_of(&self, v: VertexId) -> VertexAddress {
        let mut labels = Vec::new();
        let mut cur = v;
        while !self.is_ray(cur) {
            labels.push(self.label[cur.index()]);
            cur = self.parent(cur).expect("off-ray vertex has a parent");
        }
        labels.reverse();
        VertexAddress::new(self.height(cur) as u64, labels).expect("window labels are canonical")
    }

    pub fn id_of(&self, x: &VertexAddress) -> Result<VertexId> {
        self.spec.check_address(x)?;
        let out = || Error::VertexOutOfWindow(x.to_string());
        if x.height() < self.h_min {
            return Err(out());
        }
        let mut cur = self.ray_id(x.anchor() as i64).ok_or_else(out)?;
        for (i, &l) in x.descent().iter().enumerate() {
            let fc = self.first_child[cur.index()];
            // the ray child occupies slot 0 below x_m for m >= 1
            let slot = if i == 0 && self.height(cur) == 0 { l - 1 } else { l };
            if fc == NONE || slot >= self.child_count[cur.index()] {
                return Err(out());
            }
            cur = VertexId(fc + slot);
        }
        Ok(cur)
    }

    pub fn contains(&self, x: &VertexAddress) -> bool {
        self.id_of(x).is_ok()
    }

    /// `|s^j(v)|`, for `j` up to [`depth_below`](Self::depth_below).
    pub fn shell_size(&self, v: VertexId, j: u32) -> u64 {
        debug_assert!(j <= self.depth_below(v));
        self.shell[self.profile_offset[v.index()] + j as usize]
    }

    /// `|T_R(v)|`, for `R` up to [`depth_below`](Self::depth_below).
    pub fn volume(&self, v: VertexId, r: u32) -> u64 {
        debug_assert!(r <= self.depth_below(v));
        self.volume[self.profile_offset[v.index()] + r as usize]
    }

    /// Sound lower bound on `|T_R(v)|` for any `R` past the window bottom.
    pub fn volume_beyond(&self, v: VertexId) -> u64 {
        let d = self.depth_below(v);
        self.volume(v, d) + 2 * self.shell_size(v, d)
    }

    /// Confluent of two window vertices and the height `η` of the smallest
    /// triangle containing both.
    pub fn confluent_id(&self, x: VertexId, y: VertexId) -> (VertexId, u32) {
        let (mut a, mut b) = (x, y);
        while self.height(a) < self.height(b) {
            a = self.parent(a).expect("below apex");
        }
        while self.height(b) < self.height(a) {
            b = self.parent(b).expect("below apex");
        }
        while a != b {
            a = self.parent(a).expect("common ancestor exists");
            b = self.parent(b).expect("common ancestor exists");
        }
        let hc = self.height(a);
        let eta = (hc - self.height(x)).max(hc - self.height(y)) as u32;
        (a, eta)
    }

    pub fn ancestor(&self, x: &VertexAddress, k: u64) -> Result<VertexAddress> {
        self.spec.check_address(x)?;
        Ok(x.ancestor(k))
    }

    pub fn confluent(&self, x: &VertexAddress, y: &VertexAddress) -> Result<(VertexAddress, u64)> {
        self.spec.check_address(x)?;
        self.spec.check_address(y)?;
        Ok(x.confluent(y))
    }

    fn triangle_id(&self, t: &TriangleRef) -> Result<VertexId> {
        let out = || Error::TriangleOutOfWindow {
            vertex: t.vertex.to_string(),
            height: t.height,
        };
        let v = self.id_of(&t.vertex).map_err(|e| match e {
            Error::VertexOutOfWindow(_) => out(),
            e => e,
        })?;
        if t.height > self.depth_below(v) {
            return Err(out());
        }
        Ok(v)
    }

    pub fn triangle_volume(&self, t: &TriangleRef) -> Result<u64> {
        let v = self.triangle_id(t)?;
        Ok(self.volume(v, t.height))
    }

    pub fn triangle_base(&self, t: &TriangleRef) -> Result<Vec<VertexAddress>> {
        let v = self.triangle_id(t)?;
        Ok(self
            .shell_ids(v, t.height)
            .into_iter()
            .map(|u| self.address_of(u))
            .collect())
    }

    /// Ids of `s^j(v)`, in id order.
    pub fn shell_ids(&self, v: VertexId, j: u32) -> Vec<VertexId> {
        let mut layer = vec![v];
        for _ in 0..j {
            layer = layer.iter().flat_map(|&u| self.children(u)).collect();
        }
        layer
    }

    /// Ids of `T_R(v)`.
    pub fn triangle_ids(&self, v: VertexId, r: u32) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut layer = vec![v];
        for _ in 0..r {
            layer = layer.iter().flat_map(|&u| self.children(u)).collect();
            out.extend_from_slice(&layer);
        }
        out
    }

    pub fn triangle_points(&self, t: &TriangleRef) -> Result<Vec<VertexId>> {
        let v = self.triangle_id(t)?;
        Ok(self.triangle_ids(v, t.height))
    }

    /// Largest radius `r` with `B_r(x)` inside the window.
    pub fn ball_radius_limit(&self, v: VertexId) -> u32 {
        (self.h_max - self.height(v)).min(self.height(v) - self.h_min) as u32
    }

    /// Ids of `B_r(v)` by breadth-first search.
    pub fn ball_ids(&self, v: VertexId, r: u32) -> Result<Vec<VertexId>> {
        if r > self.ball_radius_limit(v) {
            return Err(Error::BallOutOfWindow {
                center: self.address_of(v).to_string(),
                radius: r,
            });
        }
        let mut seen = vec![v];
        let mut queue = VecDeque::from([(v, None::<VertexId>, 0u32)]);
        while let Some((u, from, d)) = queue.pop_front() {
            if d == r {
                continue;
            }
            let nbrs = self.parent(u).into_iter().chain(self.children(u));
            for w in nbrs {
                if Some(w) != from {
                    seen.push(w);
                    queue.push_back((w, Some(u), d + 1));
                }
            }
        }
        Ok(seen)
    }

    pub fn ball_volume(&self, x: &VertexAddress, r: u32) -> Result<u64> {
        let v = self.id_of(x)?;
        Ok(self.ball_ids(v, r)?.len() as u64)
    }
}
