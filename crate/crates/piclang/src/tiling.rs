//! Local languages given by per-dimension tile sets, and their projections.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picture::{check_alphabet, coords, Picture, BORDER};

/// Tile set Δ_j: pairs (cell, j-successor) over Γ ∪ {#}.
///
/// Symbols are indices into Γ, with `Γ.len()` standing for `#`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileSet {
    pub j: usize,
    width: usize,
    allowed: Vec<bool>,
}

impl TileSet {
    pub fn new(j: usize, gamma_len: usize, tiles: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let width = gamma_len + 1;
        let mut allowed = vec![false; width * width];
        for (u, v) in tiles {
            allowed[u * width + v] = true;
        }
        TileSet { j, width, allowed }
    }

    /// Every pair over Γ ∪ {#}.
    pub fn full(j: usize, gamma_len: usize) -> Self {
        let w = gamma_len + 1;
        Self::new(j, gamma_len, (0..w).flat_map(|u| (0..w).map(move |v| (u, v))))
    }

    pub fn border(&self) -> usize {
        self.width - 1
    }

    pub fn allows(&self, u: usize, v: usize) -> bool {
        self.allowed[u * self.width + v]
    }

    pub fn insert(&mut self, u: usize, v: usize) {
        self.allowed[u * self.width + v] = true;
    }

    pub fn tiles(&self) -> Vec<(usize, usize)> {
        (0..self.width).flat_map(|u| (0..self.width).map(move |v| (u, v))).filter(|&(u, v)| self.allows(u, v)).collect()
    }

    pub fn len(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingSystem {
    sigma: Vec<String>,
    gamma: Vec<String>,
    pi: Vec<usize>,
    deltas: Vec<TileSet>,
}

#[derive(Serialize, Deserialize)]
struct TilingFile {
    sigma: Vec<String>,
    gamma: Vec<String>,
    pi: BTreeMap<String, String>,
    deltas: Vec<Vec<[String; 2]>>,
}

impl TilingSystem {
    pub fn new(sigma: Vec<String>, gamma: Vec<String>, pi: Vec<usize>, deltas: Vec<TileSet>) -> Result<Self> {
        check_alphabet(&sigma).map_err(|e| Error::Tiling(format!("Σ: {e}")))?;
        check_alphabet(&gamma).map_err(|e| Error::Tiling(format!("Γ: {e}")))?;
        if pi.len() != gamma.len() || pi.iter().any(|&s| s >= sigma.len()) {
            return Err(Error::Tiling("π must be a total map Γ → Σ".into()));
        }
        if (0..sigma.len()).any(|s| !pi.contains(&s)) {
            return Err(Error::Tiling("π must be surjective onto Σ".into()));
        }
        if deltas.is_empty() {
            return Err(Error::Tiling("at least one tile set is required".into()));
        }
        for (k, t) in deltas.iter().enumerate() {
            if t.j != k + 1 || t.width != gamma.len() + 1 {
                return Err(Error::Tiling(format!("tile set {} is malformed", k + 1)));
            }
        }
        Ok(TilingSystem { sigma, gamma, pi, deltas })
    }

    pub fn d(&self) -> usize {
        self.deltas.len()
    }

    pub fn sigma(&self) -> &[String] {
        &self.sigma
    }

    pub fn gamma(&self) -> &[String] {
        &self.gamma
    }

    /// π as indices: `pi()[γ]` is the Σ-index of π(γ).
    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn deltas(&self) -> &[TileSet] {
        &self.deltas
    }

    /// Name of a tile symbol index (the border index maps to `#`).
    pub fn tile_symbol(&self, u: usize) -> &str {
        if u == self.gamma.len() {
            BORDER
        } else {
            &self.gamma[u]
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: TilingFile = serde_json::from_str(text)?;
        let g = f.gamma.len();
        let gi = |s: &str| -> Result<usize> {
            if s == BORDER {
                return Ok(g);
            }
            f.gamma.iter().position(|x| x == s).ok_or_else(|| Error::Tiling(format!("unknown tile symbol {s:?}")))
        };
        let mut pi = Vec::with_capacity(g);
        for gam in &f.gamma {
            let s = f.pi.get(gam).ok_or_else(|| Error::Tiling(format!("π undefined on {gam:?}")))?;
            pi.push(
                f.sigma
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::Tiling(format!("π({gam}) = {s:?} not in Σ")))?,
            );
        }
        if f.pi.keys().any(|k| !f.gamma.contains(k)) {
            return Err(Error::Tiling("π mentions a symbol outside Γ".into()));
        }
        let deltas = f
            .deltas
            .iter()
            .enumerate()
            .map(|(k, ts)| {
                let pairs = ts.iter().map(|[u, v]| Ok((gi(u)?, gi(v)?))).collect::<Result<Vec<_>>>()?;
                Ok(TileSet::new(k + 1, g, pairs))
            })
            .collect::<Result<Vec<_>>>()?;
        TilingSystem::new(f.sigma, f.gamma, pi, deltas)
    }

    pub fn to_json(&self) -> String {
        let f = TilingFile {
            sigma: self.sigma.clone(),
            gamma: self.gamma.clone(),
            pi: self.gamma.iter().zip(&self.pi).map(|(g, &s)| (g.clone(), self.sigma[s].clone())).collect(),
            deltas: self
                .deltas
                .iter()
                .map(|t| {
                    t.tiles()
                        .into_iter()
                        .map(|(u, v)| [self.tile_symbol(u).to_string(), self.tile_symbol(v).to_string()])
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }
}

/// Maps the picture's symbols into Γ indices.
fn gamma_cells(p: &Picture, gamma: &[String]) -> Result<Vec<usize>> {
    let map = p.alphabet().iter().map(|s| gamma.iter().position(|g| g == s)).collect::<Vec<_>>();
    p.cells().iter().map(|&c| map[c].ok_or_else(|| Error::NotInAlphabet(p.alphabet()[c].clone()))).collect()
}

/// True iff every j-adjacent pair of the bordered picture is a tile of Δ_j.
pub fn is_locally_tiled(p: &Picture, gamma: &[String], deltas: &[TileSet]) -> Result<bool> {
    if deltas.len() != p.d() {
        return Err(Error::Tiling(format!("{} tile sets for a {}-picture", deltas.len(), p.d())));
    }
    let cells = gamma_cells(p, gamma)?;
    Ok(locally_tiled_cells(p.d(), p.n(), &cells, deltas))
}

fn locally_tiled_cells(d: usize, n: usize, cells: &[usize], deltas: &[TileSet]) -> bool {
    let stride = |j: usize| n.pow((d - 1 - j) as u32);
    for (r, &v) in cells.iter().enumerate() {
        let a = coords(d, n, r);
        for j in 0..d {
            let t = &deltas[j];
            let b = t.border();
            if a[j] == 1 && !t.allows(b, v) {
                return false;
            }
            let next = if a[j] == n { b } else { cells[r + stride(j)] };
            if !t.allows(v, next) {
                return false;
            }
        }
    }
    true
}

/// Backtracking search for a Γ-labeling projecting onto `p` that is locally tiled.
pub fn tiling_witness(ts: &TilingSystem, p: &Picture) -> Result<Option<Picture>> {
    if p.d() != ts.d() {
        return Err(Error::Tiling(format!("{}-picture given to a {}-dimensional system", p.d(), ts.d())));
    }
    let input = gamma_cells(p, &ts.sigma)?;
    let (d, n) = (p.d(), p.n());
    let candidates: Vec<Vec<usize>> =
        (0..ts.sigma.len()).map(|s| (0..ts.gamma.len()).filter(|&g| ts.pi[g] == s).collect()).collect();
    let mut search = Search { d, n, deltas: &ts.deltas, label: vec![0; input.len()] };
    if search.extend(0, &input, &candidates) {
        Ok(Some(Picture::from_indices(d, n, ts.gamma.clone(), search.label).expect("valid labeling")))
    } else {
        Ok(None)
    }
}

pub fn recognizes(ts: &TilingSystem, p: &Picture) -> Result<bool> {
    Ok(tiling_witness(ts, p)?.is_some())
}

struct Search<'a> {
    d: usize,
    n: usize,
    deltas: &'a [TileSet],
    label: Vec<usize>,
}

impl Search<'_> {
    /// Whether `v` at cell `r` is compatible with its already-labeled predecessors and the border.
    #[allow(clippy::needless_range_loop)]
    fn fits(&self, r: usize, a: &[usize], v: usize) -> bool {
        for j in 0..self.d {
            let t = &self.deltas[j];
            let b = t.border();
            let prev = if a[j] == 1 { b } else { self.label[r - self.n.pow((self.d - 1 - j) as u32)] };
            if !t.allows(prev, v) {
                return false;
            }
            if a[j] == self.n && !t.allows(v, b) {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, r: usize, input: &[usize], candidates: &[Vec<usize>]) -> bool {
        if r == input.len() {
            return true;
        }
        let a = coords(self.d, self.n, r);
        for &v in &candidates[input[r]] {
            if self.fits(r, &a, v) {
                self.label[r] = v;
                if self.extend(r + 1, input, candidates) {
                    return true;
                }
            }
        }
        false
    }
}

/// All locally tiled Γ-pictures of side n, in lexicographic order of cell lists.
pub fn enumerate_local_members(deltas: &[TileSet], gamma: &[String], n: usize, cap: u128) -> Result<Vec<Picture>> {
    let d = deltas.len();
    let len = n.pow(d as u32);
    let total = (gamma.len() as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if total.saturating_mul(n as u128) > cap {
        return Err(Error::Cap(format!("{total} candidate pictures of side {n} exceed the enumeration cap {cap}")));
    }
    // backtracking in lexicographic cell order yields members already sorted
    let mut out = Vec::new();
    let all: Vec<usize> = (0..gamma.len()).collect();
    let mut search = Search { d, n, deltas, label: vec![0; len] };
    enumerate_from(&mut search, 0, &all, &mut |cells| {
        out.push(Picture::from_indices(d, n, gamma.to_vec(), cells.to_vec()).expect("valid"));
    });
    Ok(out)
}

fn enumerate_from(s: &mut Search, r: usize, all: &[usize], emit: &mut dyn FnMut(&[usize])) {
    if r == s.label.len() {
        emit(&s.label);
        return;
    }
    let a = coords(s.d, s.n, r);
    for &v in all {
        if s.fits(r, &a, v) {
            s.label[r] = v;
            enumerate_from(s, r + 1, all, emit);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picture::make_picture;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn ab_system(tiles: &[(&str, &str)]) -> TilingSystem {
        let gamma = strs(&["a", "b"]);
        let idx = |s: &str| if s == "#" { 2 } else { gamma.iter().position(|g| g == s).unwrap() };
        let t = TileSet::new(1, 2, tiles.iter().map(|&(u, v)| (idx(u), idx(v))));
        TilingSystem::new(gamma.clone(), gamma, vec![0, 1], vec![t]).unwrap()
    }

    fn word(s: &str) -> Picture {
        let cells: Vec<String> = s.chars().map(|c| c.to_string()).collect();
        Picture::new(1, cells.len(), strs(&["a", "b"]), &cells).unwrap()
    }

    #[test]
    fn local_tiling_examples() {
        let ts = ab_system(&[("#", "a"), ("a", "b"), ("b", "#")]);
        let g = ts.gamma().to_vec();
        assert!(is_locally_tiled(&word("ab"), &g, ts.deltas()).unwrap());
        assert!(!is_locally_tiled(&word("aa"), &g, ts.deltas()).unwrap());
        let full = vec![TileSet::full(1, 2)];
        assert!(is_locally_tiled(&word("bba"), &g, &full).unwrap());
    }

    #[test]
    fn recognition_examples() {
        // (a,#) is absent, so "aba" cannot close and "ab" can
        let ts = ab_system(&[("#", "a"), ("a", "b"), ("b", "a"), ("b", "#")]);
        assert!(!recognizes(&ts, &word("aba")).unwrap());
        assert!(recognizes(&ts, &word("ab")).unwrap());
        let ts = ab_system(&[("#", "a"), ("a", "b"), ("b", "a"), ("a", "#")]);
        assert!(recognizes(&ts, &word("aba")).unwrap());
        assert_eq!(tiling_witness(&ts, &word("aba")).unwrap().unwrap().to_text(), word("aba").to_text());
        assert!(!recognizes(&ts, &word("ab")).unwrap());
        let empty = ab_system(&[]);
        assert!(!recognizes(&empty, &word("a")).unwrap());
        assert!(tiling_witness(&empty, &word("ab")).unwrap().is_none());
    }

    #[test]
    fn identity_system_accepts_everything() {
        let gamma = strs(&["0", "1"]);
        let ts = TilingSystem::new(gamma.clone(), gamma, vec![0, 1], vec![TileSet::full(1, 2), TileSet::full(2, 2)])
            .unwrap();
        let p = make_picture(2, 2, &["0", "1"], &["0", "1", "1", "0"]).unwrap();
        assert_eq!(tiling_witness(&ts, &p).unwrap().unwrap(), p);
    }

    #[test]
    fn enumeration_examples() {
        let ts = ab_system(&[("#", "a"), ("a", "b"), ("b", "#")]);
        let m = enumerate_local_members(ts.deltas(), ts.gamma(), 2, 1 << 20).unwrap();
        assert_eq!(m, vec![word("ab")]);
        let one = strs(&["a"]);
        let m = enumerate_local_members(&[TileSet::full(1, 1)], &one, 2, 1 << 20).unwrap();
        assert_eq!(m.len(), 1);
        assert!(enumerate_local_members(&[TileSet::new(1, 2, [])], ts.gamma(), 3, 1 << 20).unwrap().is_empty());
        assert!(enumerate_local_members(ts.deltas(), ts.gamma(), 30, 1 << 20).is_err());
    }

    #[test]
    fn construction_rejects_bad_projection() {
        let gamma = strs(&["a", "b"]);
        assert!(TilingSystem::new(strs(&["a", "b"]), gamma.clone(), vec![0, 0], vec![TileSet::full(1, 2)]).is_err());
        assert!(TilingSystem::new(strs(&["a"]), gamma, vec![0, 0], vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ts = ab_system(&[("#", "a"), ("a", "b"), ("b", "#")]);
        let back = TilingSystem::from_json(&ts.to_json()).unwrap();
        assert_eq!(back, ts);
    }
}
