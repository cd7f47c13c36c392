//! Membership in Mirror (first two coordinates exchanged) and Sym (invariance
//! under coordinate permutations and reflections).

use crate::error::{Error, Result};
use crate::picture::{coords, rank, Picture};

fn need_two(p: &Picture) -> Result<()> {
    if p.d() < 2 {
        return Err(Error::Contract(format!("dimension {} < 2", p.d())));
    }
    Ok(())
}

/// p(a) = p(a₁₂) for every cell, a₁₂ being a with its first two components swapped.
pub fn mirror_member(p: &Picture) -> Result<bool> {
    need_two(p)?;
    let (d, n) = (p.d(), p.n());
    Ok((0..p.cells().len()).all(|r| {
        let mut a = coords(d, n, r);
        a.swap(0, 1);
        p.cells()[r] == p.cells()[rank(n, &a)]
    }))
}

/// Orbits of `[1,n]^d` under coordinate permutations and the reflections
/// a_i ↦ n+1−a_i, as sorted lists of cell ranks, ordered by their first element.
pub fn sym_orbits(d: usize, n: usize) -> Vec<Vec<usize>> {
    let len = n.pow(d as u32);
    let mut parent: Vec<usize> = (0..len).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let union = |parent: &mut Vec<usize>, x: usize, y: usize| {
        let (a, b) = (find(parent, x), find(parent, y));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    };
    // adjacent transpositions and single reflections generate the group
    for r in 0..len {
        let a = coords(d, n, r);
        for i in 0..d {
            if i + 1 < d {
                let mut b = a.clone();
                b.swap(i, i + 1);
                union(&mut parent, r, rank(n, &b));
            }
            let mut b = a.clone();
            b[i] = n + 1 - b[i];
            union(&mut parent, r, rank(n, &b));
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for r in 0..len {
        let root = find(&mut parent, r);
        groups.entry(root).or_default().push(r);
    }
    groups.into_values().collect()
}

/// Whether p is constant on every orbit of [`sym_orbits`].
pub fn sym_member(p: &Picture) -> Result<bool> {
    need_two(p)?;
    let cells = p.cells();
    Ok(sym_orbits(p.d(), p.n()).iter().all(|o| o.iter().all(|&r| cells[r] == cells[o[0]])))
}
