use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use treemax_core::tree::DEFAULT_VERTEX_CAP;
use treemax_core::{SparseFunction, TreeWindow, ValenceSpec, VertexAddress};

/// Settings shared by all subcommands. Values from `--config` win over flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tree: Option<String>,
    pub window: Option<String>,
    pub op: Option<String>,
    pub f: Option<String>,
    pub region: Option<String>,
    pub alpha: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub vertex_cap: Option<usize>,
}

impl RunConfig {
    pub fn overlay(mut self, path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(self) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        macro_rules! take {
            ($($field:ident),*) => { $( if file.$field.is_some() { self.$field = file.$field; } )* };
        }
        take!(tree, window, op, f, region, alpha, seed, trials, out, vertex_cap);
        Ok(self)
    }

    /// `TREEMAX_VERTEX_CAP` beats the config file, which beats the default.
    pub fn cap(&self) -> Result<usize> {
        match std::env::var("TREEMAX_VERTEX_CAP") {
            Ok(v) => v.trim().parse().map_err(|_| anyhow!("TREEMAX_VERTEX_CAP must be an integer, got {v:?}")),
            Err(_) => Ok(self.vertex_cap.unwrap_or(DEFAULT_VERTEX_CAP)),
        }
    }

    pub fn spec(&self) -> Result<ValenceSpec> {
        let t = self.tree.as_deref().unwrap_or("Tb:2");
        if Path::new(t).is_file() {
            let text = std::fs::read_to_string(t)?;
            return Ok(ValenceSpec::from_json(&text)?);
        }
        Ok(ValenceSpec::preset(t)?)
    }

    pub fn window_range(&self) -> Result<Option<(i64, i64)>> {
        self.window.as_deref().map(parse_window).transpose()
    }

    pub fn function(&self) -> Result<SparseFunction> {
        let f = self.f.as_deref().ok_or_else(|| anyhow!("--f is required"))?;
        if let Some(addr) = f.strip_prefix("delta:") {
            return Ok(SparseFunction::delta(addr.parse()?));
        }
        let text = std::fs::read_to_string(f).with_context(|| format!("reading function file {f}"))?;
        Ok(SparseFunction::from_json(&text)?)
    }
}

pub fn parse_window(s: &str) -> Result<(i64, i64)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| anyhow!("window must look like lo..hi, got {s:?}"))?;
    let lo: i64 = lo.trim().parse().with_context(|| format!("bad window bound {lo:?}"))?;
    let hi: i64 = hi.trim().parse().with_context(|| format!("bad window bound {hi:?}"))?;
    if lo >= hi {
        bail!("window {s:?} is empty");
    }
    Ok((lo, hi))
}

/// `all`, `H<j>`, `H<j>:r<d>` (horocycle `j` within distance `d` of the
/// origin), or a comma-separated address list.
pub fn parse_region(w: &TreeWindow, s: &str) -> Result<Vec<VertexAddress>> {
    let s = s.trim();
    if s == "all" {
        return Ok(w.ids().map(|v| w.address_of(v)).collect());
    }
    if let Some(rest) = s.strip_prefix('H') {
        let (h, radius) = match rest.split_once(":r") {
            Some((h, r)) => (h, Some(r.parse::<u64>().with_context(|| format!("bad radius in {s:?}"))?)),
            None => (rest, None),
        };
        let h: i64 = h.parse().with_context(|| format!("bad horocycle in {s:?}"))?;
        let o = VertexAddress::origin();
        return Ok(w
            .horocycle(h)
            .map(|v| w.address_of(v))
            .filter(|x| radius.is_none_or(|r| x.distance(&o) <= r))
            .collect());
    }
    s.split(',')
        .map(|a| a.trim().parse::<VertexAddress>().map_err(Into::into))
        .collect()
}
