//! ESO(∀^d) → ESO(∀^d, arity d) on coordinate structures.
//!
//! Each argument tuple τ of a guessed symbol R of arity k > d becomes a d-ary
//! symbol R_j with R_j(x̄) ⇔ R(τ(x̄)). Agreement clauses force the family to
//! come from a single R: for each pair τ, σ the equations τ(ā) = σ(b̄) are
//! solved over the cyclic successor, giving b̄ as terms in ā plus side
//! conditions "n divides δ", and R_τ(ā) ↔ R_σ(b̄) is asserted under them.
//! Positions a tuple does not read are pinned by R_j(x̄) ↔ R_j(x̄[x_q := suc x_q]).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{and, atom, iff, implies, prenex_universal, Atom, EsoSentence, Formula, Term};
use crate::normalize::Fresh;
use crate::picture::EncodingKind;

/// A term x_p + c.
type Lin = (usize, usize);

fn lin(xs: &[String], t: &Term) -> Result<Lin> {
    if t.sucs.iter().any(|&i| i != 0) {
        return Err(Error::Fragment("indexed successors in a coordinate sentence".into()));
    }
    let p = xs
        .iter()
        .position(|x| x == &t.var)
        .ok_or_else(|| Error::Fragment(format!("variable {} is not in the universal prefix", t.var)))?;
    Ok((p, t.sucs.len()))
}

fn term(xs: &[String], (p, c): Lin) -> Term {
    let mut t = Term::var(&xs[p]);
    for _ in 0..c {
        t = t.suc(0);
    }
    t
}

/// Weighted union-find: value(v) = value(root(v)) + w(v).
struct Classes {
    parent: Vec<usize>,
    w: Vec<i64>,
    /// Differences that must vanish modulo n.
    cycles: Vec<i64>,
}

impl Classes {
    fn new(k: usize) -> Self {
        Classes { parent: (0..k).collect(), w: vec![0; k], cycles: Vec::new() }
    }

    fn find(&mut self, v: usize) -> (usize, i64) {
        if self.parent[v] == v {
            return (v, 0);
        }
        let (r, wp) = self.find(self.parent[v]);
        self.parent[v] = r;
        self.w[v] += wp;
        (r, self.w[v])
    }

    /// Records value(u) − value(v) = diff.
    fn relate(&mut self, u: usize, v: usize, diff: i64) {
        let (ru, wu) = self.find(u);
        let (rv, wv) = self.find(v);
        if ru == rv {
            let delta = (wu - wv) - diff;
            if delta != 0 {
                self.cycles.push(delta.abs());
            }
            return;
        }
        // value(ru) = value(rv) + wv + diff − wu
        self.parent[ru] = rv;
        self.w[ru] = wv + diff - wu;
    }
}

/// Argument terms for R_τ and R_σ describing every (ā, b̄) with τ(ā) = σ(b̄),
/// plus the divisibility side conditions.
fn unify(d: usize, tau: &[Lin], sigma: &[Lin]) -> (Vec<Lin>, Vec<Lin>, Vec<i64>) {
    let mut uf = Classes::new(2 * d);
    for (&(p, c), &(q, e)) in tau.iter().zip(sigma) {
        // a_p + c = b_q + e
        uf.relate(p, d + q, e as i64 - c as i64);
    }
    let mut members: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    for v in 0..2 * d {
        let (r, w) = uf.find(v);
        members.entry(r).or_default().push((v, w));
    }
    let mut out = vec![(0, 0); 2 * d];
    for ms in members.values() {
        let low = ms.iter().map(|&(_, w)| w).min().unwrap();
        // the class is named after its first ā-variable; b-only classes are
        // positions σ never reads and keep their own name
        let name = ms.iter().map(|&(v, _)| v).find(|&v| v < d).unwrap_or_else(|| ms[0].0 - d);
        let anchored = ms.iter().any(|&(v, _)| v < d);
        for &(v, w) in ms {
            out[v] = if anchored { (name, (w - low) as usize) } else { (v - d, 0) };
        }
    }
    let b = out.split_off(d);
    let mut cycles = uf.cycles;
    cycles.sort_unstable();
    cycles.dedup();
    (out, b, cycles)
}

/// Replaces guessed symbols of arity above the prefix length by families of
/// prefix-arity symbols, one per argument tuple, tied by agreement clauses.
pub fn reduce_arities(s: &EsoSentence) -> Result<EsoSentence> {
    if s.sig.kind != EncodingKind::Coordinate {
        return Err(Error::Fragment("arity reduction is defined on coordinate sentences".into()));
    }
    let (xs, matrix) = prenex_universal(&s.body)
        .ok_or_else(|| Error::Fragment("expected a prenex universal body with quantifier-free matrix".into()))?;
    let d = xs.len();
    let big: Vec<&(String, usize)> = s.guessed.iter().filter(|&&(_, k)| k > d).collect();
    if big.is_empty() {
        return Ok(s.clone());
    }
    let mut fresh = Fresh::for_sentence(s);
    // occurrence tuples per big symbol, in order of first appearance
    let mut tuples: BTreeMap<String, Vec<Vec<Lin>>> = BTreeMap::new();
    let mut err = None;
    matrix.for_each_atom(&mut |a| {
        if let Atom::Rel(r, ts) = a {
            if big.iter().any(|(g, _)| g == r) {
                match ts.iter().map(|t| lin(&xs, t)).collect::<Result<Vec<_>>>() {
                    Ok(tau) => {
                        let list = tuples.entry(r.clone()).or_default();
                        if !list.contains(&tau) {
                            list.push(tau);
                        }
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut names: BTreeMap<(String, Vec<Lin>), String> = BTreeMap::new();
    let mut guessed = Vec::new();
    let mut clauses = Vec::new();
    let vars: Vec<Term> = xs.iter().map(|x| Term::var(x)).collect();
    let at =
        |r: &str, args: &[Lin]| Formula::Atom(Atom::Rel(r.to_string(), args.iter().map(|&l| term(&xs, l)).collect()));
    for (g, k) in &s.guessed {
        if *k <= d {
            guessed.push((g.clone(), *k));
            continue;
        }
        let Some(list) = tuples.get(g) else { continue };
        let fam: Vec<String> = (0..list.len()).map(|j| fresh.name(&format!("{g}_{}", j + 1))).collect();
        for (j, tau) in list.iter().enumerate() {
            names.insert((g.clone(), tau.clone()), fam[j].clone());
            guessed.push((fam[j].clone(), d));
            let id: Vec<Lin> = (0..d).map(|p| (p, 0)).collect();
            for q in (0..d).filter(|q| !tau.iter().any(|&(p, _)| p == *q)) {
                let mut moved = id.clone();
                moved[q] = (q, 1);
                clauses.push(iff(at(&fam[j], &id), at(&fam[j], &moved)));
            }
        }
        for j in 0..list.len() {
            for l in j..list.len() {
                let (a, b, cycles) = unify(d, &list[j], &list[l]);
                let identity = a.iter().enumerate().all(|(p, &t)| t == (p, 0)) && a == b;
                if j == l && identity && cycles.is_empty() {
                    continue;
                }
                let guard = and(cycles
                    .iter()
                    .map(|&delta| atom(Atom::Eq(term(&xs, (0, delta as usize)), vars[0].clone())))
                    .collect::<Vec<_>>());
                clauses.push(implies(guard, iff(at(&fam[j], &a), at(&fam[l], &b))));
            }
        }
    }
    let new_matrix = matrix.map_atoms(&mut |a| match a {
        Atom::Rel(r, ts) if big.iter().any(|(g, _)| g == r) => {
            let tau: Vec<Lin> = ts.iter().map(|t| lin(&xs, t).expect("checked above")).collect();
            Formula::Atom(Atom::Rel(names[&(r.clone(), tau)].clone(), vars.clone()))
        }
        other => atom(other.clone()),
    });
    clauses.insert(0, new_matrix);
    s.with_body(guessed, Formula::Forall(xs.clone(), Box::new(and(clauses))))
}
