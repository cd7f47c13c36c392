//! Relations on `[1,n]^d` as bit tables, and the permutation-indexed coding
//! `R_α = {x nondecreasing : R(x_{α⁻¹})}` of a single relation.

use crate::error::{Error, Result};
use crate::sorted::perm::{apply_permutation, Permutation};

/// A d-ary relation on `[1,n]`, indexed by the lexicographic rank of its tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub d: usize,
    pub n: usize,
    pub bits: Vec<bool>,
}

/// All tuples of `[1,n]^d` in lexicographic order.
pub fn tuples(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out.into_iter().flat_map(|t| (1..=n).map(move |v| [t.clone(), vec![v]].concat())).collect();
    }
    out
}

pub fn is_nondecreasing(x: &[usize]) -> bool {
    x.windows(2).all(|w| w[0] <= w[1])
}

impl Relation {
    pub fn empty(d: usize, n: usize) -> Self {
        Relation { d, n, bits: vec![false; n.pow(d as u32)] }
    }

    pub fn from_fn(d: usize, n: usize, mut f: impl FnMut(&[usize]) -> bool) -> Self {
        Relation { d, n, bits: tuples(d, n).iter().map(|x| f(x)).collect() }
    }

    pub fn rank(&self, x: &[usize]) -> usize {
        x.iter().fold(0, |acc, &v| acc * self.n + (v - 1))
    }

    pub fn get(&self, x: &[usize]) -> bool {
        self.bits[self.rank(x)]
    }

    pub fn set(&mut self, x: &[usize], v: bool) {
        let r = self.rank(x);
        self.bits[r] = v;
    }
}

/// The family `(R_α)` in the order of [`Permutation::all`].
pub fn code_relation(r: &Relation) -> Vec<Relation> {
    Permutation::all(r.d)
        .iter()
        .map(|a| {
            let inv = a.inverse();
            Relation::from_fn(r.d, r.n, |x| is_nondecreasing(x) && r.get(&apply_permutation(x, &inv).unwrap()))
        })
        .collect()
}

/// The three equivalent characterizations of a family that codes one relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodingVerdict {
    /// Some R generates the family.
    pub generated: bool,
    /// `x_α = x_β ⇒ R_α(x_α) = R_β(x_β)`.
    pub overlap_consistent: bool,
    /// `x = x_τ ⇒ R_α(x) = R_{ατ}(x)` for transpositions τ.
    pub transposition_coherent: bool,
}

impl CodingVerdict {
    pub fn agree(&self) -> bool {
        self.generated == self.overlap_consistent && self.overlap_consistent == self.transposition_coherent
    }
}

/// Evaluates the three conditions on a family contained in the nondecreasing tuples.
pub fn coding_conditions(family: &[Relation]) -> Result<CodingVerdict> {
    let Some(first) = family.first() else {
        return Err(Error::Contract("empty family".into()));
    };
    let (d, n) = (first.d, first.n);
    let perms = Permutation::all(d);
    if family.len() != perms.len() || family.iter().any(|r| r.d != d || r.n != n) {
        return Err(Error::Contract(format!("a family for d={d} has {} members of one shape", perms.len())));
    }
    let all = tuples(d, n);
    if family.iter().any(|r| all.iter().any(|x| r.get(x) && !is_nondecreasing(x))) {
        return Err(Error::Contract("family members must lie within the nondecreasing tuples".into()));
    }
    let xa: Vec<Vec<Vec<usize>>> =
        all.iter().map(|x| perms.iter().map(|a| apply_permutation(x, a).unwrap()).collect()).collect();
    // 1: search R tuple by tuple, the constraints on different tuples being independent
    let generated = all.iter().enumerate().all(|(t, _)| {
        [false, true].iter().any(|&v| {
            perms.iter().enumerate().all(|(k, _)| !is_nondecreasing(&xa[t][k]) || family[k].get(&xa[t][k]) == v)
        })
    });
    let mut overlap_consistent = true;
    for xs in &xa {
        for a in 0..perms.len() {
            for b in 0..perms.len() {
                if xs[a] == xs[b] && family[a].get(&xs[a]) != family[b].get(&xs[b]) {
                    overlap_consistent = false;
                }
            }
        }
    }
    let mut transposition_coherent = true;
    for x in &all {
        for (k, a) in perms.iter().enumerate() {
            for i in 1..=d {
                for j in i + 1..=d {
                    if x[i - 1] == x[j - 1] {
                        let at = a.compose(&Permutation::transposition(d, i, j));
                        let m = perms.iter().position(|p| p == &at).unwrap();
                        if family[k].get(x) != family[m].get(x) {
                            transposition_coherent = false;
                        }
                    }
                }
            }
        }
    }
    Ok(CodingVerdict { generated, overlap_consistent, transposition_coherent })
}

/// Decodes a coherent family: `R(x) = R_α(x_α)` for any α sorting x.
pub fn decode_family(family: &[Relation]) -> Relation {
    let (d, n) = (family[0].d, family[0].n);
    let perms = Permutation::all(d);
    Relation::from_fn(d, n, |x| {
        perms.iter().enumerate().any(|(k, a)| {
            let y = apply_permutation(x, a).unwrap();
            is_nondecreasing(&y) && family[k].get(&y)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coded_relations_satisfy_all_three() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=3 {
            for n in 1..=3 {
                let r = Relation::from_fn(d, n, |_| rng.random_bool(0.5));
                let fam = code_relation(&r);
                let v = coding_conditions(&fam).unwrap();
                assert!(v.generated && v.overlap_consistent && v.transposition_coherent);
                assert_eq!(decode_family(&fam), r);
            }
        }
    }

    #[test]
    fn a_broken_diagonal_breaks_all_three() {
        let r = Relation::from_fn(2, 2, |x| x[0] == 1);
        let mut fam = code_relation(&r);
        // (1,1) is sorted by both permutations; disagreeing there is incoherent
        let v = !fam[1].get(&[1, 1]);
        fam[1].set(&[1, 1], v);
        let verdict = coding_conditions(&fam).unwrap();
        assert_eq!(
            verdict,
            CodingVerdict { generated: false, overlap_consistent: false, transposition_coherent: false }
        );
        // off the diagonal the copies are independent
        let mut fam = code_relation(&r);
        fam[1].set(&[1, 2], true);
        assert!(coding_conditions(&fam).unwrap().transposition_coherent);
    }

    #[test]
    fn members_outside_the_sorted_tuples_are_rejected() {
        let mut fam = code_relation(&Relation::empty(2, 2));
        fam[0].set(&[2, 1], true);
        assert!(coding_conditions(&fam).is_err());
    }
}
