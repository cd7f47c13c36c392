//! Permutations acting on tuples, and the spanning tree of alternated factorizations.

use std::fmt;

use crate::error::{Error, Result};

/// Largest `d` accepted by [`build_perm_tree`].
pub const MAX_TREE_D: usize = 6;

/// A permutation of `1..=d`, stored 0-based: `images[i] = α(i+1) − 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(d: usize) -> Self {
        Permutation { images: (0..d).collect() }
    }

    /// From 1-based images `α(1)..α(d)`.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &a in images {
            if a == 0 || a > d || seen[a - 1] {
                return Err(Error::OutOfRange(format!("{images:?} is not a permutation of 1..={d}")));
            }
            seen[a - 1] = true;
        }
        Ok(Permutation { images: images.iter().map(|a| a - 1).collect() })
    }

    /// The transposition `(i j)` of `1..=d`.
    pub fn transposition(d: usize, i: usize, j: usize) -> Self {
        let mut p = Self::identity(d);
        p.images.swap(i - 1, j - 1);
        p
    }

    pub fn d(&self) -> usize {
        self.images.len()
    }

    /// α(i), 1-based.
    pub fn at(&self, i: usize) -> usize {
        self.images[i - 1] + 1
    }

    /// 0-based image of a 0-based point.
    pub(crate) fn at0(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|a| a + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &a)| i == a)
    }

    /// `self ∘ other`, so that `x_{αβ} = (x_α)_β`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&b| self.images[b]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.d()];
        for (i, &a) in self.images.iter().enumerate() {
            inv[a] = i;
        }
        Permutation { images: inv }
    }

    /// All permutations of `1..=d` in lexicographic order of images.
    pub fn all(d: usize) -> Vec<Permutation> {
        use itertools::Itertools;
        (0..d).permutations(d).map(|images| Permutation { images }).collect()
    }

    /// Images written without separators (`4213`), comma-separated when d ≥ 10.
    pub fn compact(&self) -> String {
        let sep = if self.d() >= 10 { "," } else { "" };
        self.images.iter().map(|a| (a + 1).to_string()).collect::<Vec<_>>().join(sep)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

/// `x_α = (x_{α(1)}, …, x_{α(d)})`.
pub fn apply_permutation<T: Clone>(x: &[T], alpha: &Permutation) -> Result<Vec<T>> {
    if x.len() != alpha.d() {
        return Err(Error::OutOfRange(format!("tuple of length {} under a permutation of {}", x.len(), alpha.d())));
    }
    Ok(alpha.images.iter().map(|&a| x[a].clone()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermNode {
    pub perm: Permutation,
    pub parent: Option<usize>,
    /// `(i, j)` with `perm = parent·(i j)`; `i` is shared with the edge into the parent
    /// (or is `d` at the root).
    pub edge: Option<(usize, usize)>,
    pub children: Vec<usize>,
}

/// Spanning tree of `perm(d)` rooted at the identity whose root paths are
/// alternated factorizations. Nodes are stored in depth-first order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermTree {
    pub d: usize,
    pub nodes: Vec<PermNode>,
}

/// Left multiplication by `(u v)`: swaps the values u and v in the image list.
fn swap_values(p: &Permutation, u: usize, v: usize) -> Permutation {
    let (u, v) = (u - 1, v - 1);
    Permutation {
        images: p
            .images
            .iter()
            .map(|&a| {
                if a == u {
                    v
                } else if a == v {
                    u
                } else {
                    a
                }
            })
            .collect(),
    }
}

/// Raw tree as (perm, parent perm) pairs, parents before children.
fn raw_tree(d: usize) -> Vec<(Permutation, Option<Permutation>)> {
    if d == 2 {
        let id = Permutation::identity(2);
        return vec![(id.clone(), None), (Permutation::transposition(2, 1, 2), Some(id))];
    }
    let lift = |a: &Permutation| {
        let mut images = vec![0];
        images.extend(a.images.iter().map(|x| x + 1));
        Permutation { images }
    };
    let prev = raw_tree(d - 1);
    let mut out: Vec<_> = prev.iter().map(|(a, p)| (lift(a), p.as_ref().map(lift))).collect();
    for (a, _) in &prev {
        let beta = lift(a);
        let c = swap_values(&beta, 1, d);
        out.push((c.clone(), Some(beta)));
        for i in 2..d {
            out.push((swap_values(&c, d, i), Some(c.clone())));
        }
    }
    out
}

pub fn build_perm_tree(d: usize) -> Result<PermTree> {
    if !(2..=MAX_TREE_D).contains(&d) {
        return Err(Error::OutOfRange(format!("permutation tree needs 2 ≤ d ≤ {MAX_TREE_D}, got {d}")));
    }
    let raw = raw_tree(d);
    let index = |p: &Permutation| raw.iter().position(|(q, _)| q == p).expect("parent present");
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    for (k, (_, parent)) in raw.iter().enumerate() {
        if let Some(p) = parent {
            children[index(p)].push(k);
        }
    }
    // depth-first renumbering, children in construction order
    let mut order = Vec::new();
    let mut stack = vec![0usize];
    while let Some(k) = stack.pop() {
        order.push(k);
        stack.extend(children[k].iter().rev());
    }
    let mut pos = vec![0; raw.len()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let mut nodes: Vec<PermNode> = order
        .iter()
        .map(|&old| PermNode {
            perm: raw[old].0.clone(),
            parent: raw[old].1.as_ref().map(|p| pos[index(p)]),
            edge: None,
            children: children[old].iter().map(|&c| pos[c]).collect(),
        })
        .collect();
    for k in 1..nodes.len() {
        let p = nodes[k].parent.unwrap();
        let moved: Vec<usize> = (1..=d).filter(|&i| nodes[p].perm.at(i) != nodes[k].perm.at(i)).collect();
        let shared = match nodes[p].edge {
            Some((_, j)) => j,
            None => d,
        };
        let edge = match moved[..] {
            [a, b] if a == shared => (a, b),
            [a, b] if b == shared => (b, a),
            _ => {
                return Err(Error::Contract(format!(
                    "edge {} → {} is not an alternated step",
                    nodes[p].perm, nodes[k].perm
                )))
            }
        };
        nodes[k].edge = Some(edge);
    }
    Ok(PermTree { d, nodes })
}

impl PermTree {
    pub fn find(&self, p: &Permutation) -> Option<usize> {
        self.nodes.iter().position(|n| &n.perm == p)
    }

    /// Edge labels from the root to node `k`.
    pub fn path(&self, mut k: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        while let (Some(p), Some(e)) = (self.nodes[k].parent, self.nodes[k].edge) {
            out.push(e);
            k = p;
        }
        out.reverse();
        out
    }

    /// Node `k` together with all its ancestors, root first.
    pub fn ancestry(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![k];
        while let Some(p) = self.nodes[k].parent {
            out.push(p);
            k = p;
        }
        out.reverse();
        out
    }

    /// One line per node: `perm <images> parent <images> edge (i,j)`, root first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let (parent, edge) = match (n.parent, n.edge) {
                (Some(p), Some((i, j))) => (self.nodes[p].perm.compact(), format!("({i},{j})")),
                _ => ("-".to_string(), "-".to_string()),
            };
            out.push_str(&format!("perm {} parent {} edge {}\n", n.perm, parent, edge));
        }
        out
    }
}

/// A root path `(d u1)(u1 u2)…` whose consecutive factors share exactly one
/// element and where every three consecutive `u`s are pairwise distinct.
pub fn is_alternated(d: usize, path: &[(usize, usize)]) -> bool {
    let mut us = vec![d];
    for &(i, j) in path {
        if i == j || i != *us.last().unwrap() {
            return false;
        }
        us.push(j);
    }
    us.windows(3).all(|w| w[0] != w[1] && w[1] != w[2] && w[0] != w[2])
}
