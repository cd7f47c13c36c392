//! d-simulations of a (d−1)-ary relation: families `(T_α, Q_α)` that move the
//! value `Q(x⁻)` to the sorted position `Q_α(x_α)`.
//!
//! [`propagate_simulation`] builds a family from the universal formulas F1–F6
//! instantiated along the permutation tree, by union-find over the atoms.
//! [`check_simulation`] then evaluates the axioms A1–A6 and the transport
//! property on the whole domain.

use crate::error::{Error, Result};
use crate::sorted::coding::{tuples, Relation};
use crate::sorted::perm::{apply_permutation, build_perm_tree, PermTree, Permutation};

#[derive(Clone, Debug)]
pub struct Simulation {
    pub tree: PermTree,
    /// Indexed like `tree.nodes`.
    pub t: Vec<Relation>,
    pub q: Vec<Relation>,
    /// Classes forced both true and false by the formulas.
    pub conflicts: usize,
}

struct Classes {
    parent: Vec<usize>,
}

impl Classes {
    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut v = v;
        while self.parent[v] != r {
            let next = self.parent[v];
            self.parent[v] = r;
            v = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a] = b;
        }
    }
}

fn bumped(x: &[usize], i: usize) -> Vec<usize> {
    let mut y = x.to_vec();
    y[i - 1] += 1;
    y
}

fn with(x: &[usize], i: usize, v: usize) -> Vec<usize> {
    let mut y = x.to_vec();
    y[i - 1] = v;
    y
}

/// Builds `(T_α, Q_α)` for `q ⊆ [1,n]^{d−1}` from F1–F6; unconstrained atoms are false.
pub fn propagate_simulation(d: usize, q: &Relation) -> Result<Simulation> {
    if q.d + 1 != d {
        return Err(Error::Contract(format!("a {d}-simulation simulates a {}-ary relation, got arity {}", d - 1, q.d)));
    }
    let n = q.n;
    let tree = build_perm_tree(d)?;
    let m = tree.nodes.len();
    let size = n.pow(d as u32);
    let shape = Relation::empty(d, n);
    // node ids: T atoms, then Q atoms, then the two constants
    let t_id = |k: usize, x: &[usize]| k * size + shape.rank(x);
    let q_id = |k: usize, x: &[usize]| (m + k) * size + shape.rank(x);
    let (yes, no) = (2 * m * size, 2 * m * size + 1);
    let mut uf = Classes { parent: (0..2 * m * size + 2).collect() };
    let qv = |x: &[usize]| if q.get(&x[..d - 1]) { yes } else { no };
    for x in tuples(d, n) {
        // F1, F4
        if x[d - 1] == 1 {
            uf.union(t_id(0, &x), qv(&x));
        }
        uf.union(q_id(0, &x), qv(&x));
        for k in 1..m {
            let (i, j) = tree.nodes[k].edge.unwrap();
            let p = tree.nodes[k].parent.unwrap();
            // F2
            if x[i - 1] < n && x[j - 1] < n {
                uf.union(t_id(k, &bumped(&x, i)), t_id(k, &bumped(&x, j)));
            }
            // F3
            if x[i - 1] == 1 {
                uf.union(t_id(p, &x), t_id(k, &x));
            }
            // F5
            if x[j - 1] == 1 {
                uf.union(q_id(k, &x), t_id(k, &x));
            }
            // F6, cyclic successor
            let next = if x[j - 1] == n { 1 } else { x[j - 1] + 1 };
            uf.union(q_id(k, &x), q_id(k, &with(&x, j, next)));
        }
    }
    let conflicts = usize::from(uf.find(yes) == uf.find(no));
    let truth = uf.find(yes);
    let mut t = vec![shape.clone(); m];
    let mut qs = t.clone();
    for x in tuples(d, n) {
        for k in 0..m {
            let tv = uf.find(t_id(k, &x)) == truth;
            t[k].set(&x, tv);
            let qv = uf.find(q_id(k, &x)) == truth;
            qs[k].set(&x, qv);
        }
    }
    Ok(Simulation { tree, t, q: qs, conflicts })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimulationReport {
    /// Violations of A1..A6, in order.
    pub axioms: [usize; 6],
    /// Tuples and permutations with `Q_α(x_α) ≠ Q(x⁻)`.
    pub transport: usize,
}

impl SimulationReport {
    pub fn total(&self) -> usize {
        self.axioms.iter().sum::<usize>() + self.transport
    }
}

pub fn check_simulation(sim: &Simulation, q: &Relation) -> SimulationReport {
    let d = sim.tree.d;
    let n = q.n;
    let mut rep = SimulationReport::default();
    let qx = |x: &[usize]| q.get(&x[..d - 1]);
    for x in tuples(d, n) {
        if x[d - 1] == 1 && sim.t[0].get(&x) != qx(&x) {
            rep.axioms[0] += 1;
        }
        if sim.q[0].get(&x) != qx(&x) {
            rep.axioms[3] += 1;
        }
        for (k, node) in sim.tree.nodes.iter().enumerate().skip(1) {
            let (i, j) = node.edge.unwrap();
            let p = node.parent.unwrap();
            let swapped = apply_permutation(&x, &Permutation::transposition(d, i, j)).unwrap();
            if sim.t[k].get(&x) != sim.t[k].get(&swapped) {
                rep.axioms[1] += 1;
            }
            if x[i - 1] == 1 && sim.t[p].get(&x) != sim.t[k].get(&x) {
                rep.axioms[2] += 1;
            }
            if x[j - 1] == 1 && sim.q[k].get(&x) != sim.t[k].get(&x) {
                rep.axioms[4] += 1;
            }
            if (1..=n).any(|v| sim.q[k].get(&with(&x, j, v)) != sim.q[k].get(&x)) {
                rep.axioms[5] += 1;
            }
        }
        for (k, node) in sim.tree.nodes.iter().enumerate() {
            let xa = apply_permutation(&x, &node.perm).unwrap();
            if sim.q[k].get(&xa) != qx(&x) {
                rep.transport += 1;
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_relations_are_simulated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=3 {
            for n in 1..=4 {
                let q = Relation::from_fn(d - 1, n, |_| rng.random_bool(0.5));
                let sim = propagate_simulation(d, &q).unwrap();
                assert_eq!(sim.conflicts, 0);
                assert_eq!(check_simulation(&sim, &q), SimulationReport::default(), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn easy_case_buffer() {
        // d = 2: Q_21(x, y) = Q(y)
        let q = Relation::from_fn(1, 3, |x| x[0] == 2);
        let sim = propagate_simulation(2, &q).unwrap();
        let k = sim.tree.find(&Permutation::from_images(&[2, 1]).unwrap()).unwrap();
        for x in tuples(2, 3) {
            assert_eq!(sim.q[k].get(&x), x[1] == 2);
        }
    }

    #[test]
    fn tampering_is_detected() {
        let q = Relation::from_fn(2, 3, |x| x[0] < x[1]);
        let mut sim = propagate_simulation(3, &q).unwrap();
        let last = sim.q.len() - 1;
        let b = sim.q[last].bits[4];
        sim.q[last].bits[4] = !b;
        assert!(check_simulation(&sim, &q).total() > 0);
        assert!(propagate_simulation(2, &q).is_err());
    }
}
