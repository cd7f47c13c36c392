//! Rewriting ESO(∀^d, arity d) coordinate sentences over (d−1)-pictures into
//! the sorted fragment, where guessed atoms read `x` or one `x^(i)` and input
//! atoms read `x_1..x_{d−1}`.
//!
//! Stages, in their fixed order: [`flatten_atoms`], [`decompose_successors`],
//! [`fold_relations`], [`eliminate_comparisons`], [`simulate_input_relations`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::logic::{and, atom, iff, implies, is_sorted, not, or, prenex_universal, Atom, EsoSentence, Formula, Term};
use crate::normalize::Fresh;
use crate::picture::EncodingKind;
use crate::sorted::perm::{build_perm_tree, Permutation, MAX_TREE_D};

/// Largest universal prefix accepted by [`sort_pipeline`].
pub const MAX_PIPELINE_D: usize = 4;

/// A term `x_var + shift` under the cyclic successor.
type Lin = (usize, usize);

struct Prefix {
    xs: Vec<String>,
}

impl Prefix {
    fn d(&self) -> usize {
        self.xs.len()
    }

    fn lin(&self, t: &Term) -> Result<Lin> {
        let v = self
            .xs
            .iter()
            .position(|x| x == &t.var)
            .ok_or_else(|| Error::Fragment(format!("variable {} is not universally quantified", t.var)))?;
        Ok((v, t.depth()))
    }

    fn lins(&self, ts: &[Term]) -> Result<Vec<Lin>> {
        ts.iter().map(|t| self.lin(t)).collect()
    }

    fn term(&self, (v, c): Lin) -> Term {
        (0..c).fold(Term::var(&self.xs[v]), |t, _| t.suc(0))
    }

    fn x(&self) -> Vec<Term> {
        self.xs.iter().map(|x| Term::var(x)).collect()
    }

    /// `x^(i)`, 0-based i.
    fn bump(&self, i: usize) -> Vec<Term> {
        let mut v = self.x();
        v[i] = v[i].clone().suc(0);
        v
    }

    fn at(&self, r: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom::Rel(r.to_string(), args))
    }

    fn min(&self, i: usize) -> Formula {
        atom(Atom::Min(Term::var(&self.xs[i])))
    }

    fn max(&self, i: usize) -> Formula {
        atom(Atom::Max(Term::var(&self.xs[i])))
    }

    fn eq(&self, a: usize, b: usize) -> Formula {
        if a == b {
            Formula::True
        } else {
            atom(Atom::Eq(Term::var(&self.xs[a]), Term::var(&self.xs[b])))
        }
    }

    fn lt(&self, a: usize, b: usize) -> Formula {
        atom(Atom::Lt(Term::var(&self.xs[a]), Term::var(&self.xs[b])))
    }

    /// `x` is nondecreasing.
    fn sorted(&self) -> Formula {
        and((0..self.d().saturating_sub(1)).map(|a| or([self.lt(a, a + 1), self.eq(a, a + 1)])).collect::<Vec<_>>())
    }
}

fn split(s: &EsoSentence) -> Result<(Prefix, Formula)> {
    if s.sig.kind != EncodingKind::Coordinate {
        return Err(Error::Fragment("the sorted pipeline works on coordinate sentences".into()));
    }
    let (xs, m) = prenex_universal(&s.body)
        .ok_or_else(|| Error::Fragment("expected a prenex universal body with quantifier-free matrix".into()))?;
    if xs.len() < 2 {
        return Err(Error::Fragment(format!("need at least two universal variables, found {}", xs.len())));
    }
    if let Some((g, k)) = s.guessed.iter().find(|&&(_, k)| k > xs.len()) {
        return Err(Error::Fragment(format!(
            "{g} has arity {k} above the prefix length {}; reduce arities first",
            xs.len()
        )));
    }
    Ok((Prefix { xs }, m.clone()))
}

fn rebuild(s: &EsoSentence, p: &Prefix, guessed: Vec<(String, usize)>, clauses: Vec<Formula>) -> Result<EsoSentence> {
    s.with_body(guessed, Formula::Forall(p.xs.clone(), Box::new(and(clauses))))
}

/// Applies `f` to atoms; errors raised inside are reported after the walk.
fn try_map_atoms(m: &Formula, f: &mut dyn FnMut(&Atom) -> Result<Formula>) -> Result<Formula> {
    let mut err = None;
    let out = m.map_atoms(&mut |a| match f(a) {
        Ok(g) => g,
        Err(e) => {
            err.get_or_insert(e);
            Formula::True
        }
    });
    err.map_or(Ok(out), Err)
}

fn distinct(ls: &[Lin]) -> bool {
    ls.iter().enumerate().all(|(i, a)| ls[..i].iter().all(|b| b.0 != a.0))
}

// ---------------------------------------------------------------------------
// flattening

struct Flattener<'a> {
    s: &'a EsoSentence,
    p: Prefix,
    fresh: Fresh,
    guessed: Vec<(String, usize)>,
    defs: Vec<Formula>,
    reified: BTreeMap<String, String>,
    patterns: BTreeMap<(String, Vec<(usize, i64)>), String>,
}

impl Flattener<'_> {
    fn new_symbol(&mut self, base: &str, arity: usize) -> String {
        let r = self.fresh.name(base);
        self.guessed.push((r.clone(), arity));
        r
    }

    fn is_guessed(&self, r: &str) -> bool {
        self.guessed.iter().any(|(g, _)| g == r)
    }

    /// Input atoms not of the form Q(x_ι) for an injection ι become guessed copies of Q.
    fn reify_inputs(&mut self, m: &Formula) -> Result<Formula> {
        let k = self.s.sig.input_arity();
        try_map_atoms(m, &mut |a| match a {
            Atom::Rel(q, ts) if self.s.sig.is_input(q) => {
                let ls = self.p.lins(ts)?;
                if ls.iter().all(|l| l.1 == 0) && distinct(&ls) {
                    return Ok(atom(a.clone()));
                }
                if k > self.p.d() {
                    return Err(Error::Fragment(format!("input arity {k} exceeds the prefix length")));
                }
                let r = match self.reified.get(q) {
                    Some(r) => r.clone(),
                    None => {
                        let r = self.new_symbol(&format!("{q}_r"), k);
                        let x = self.p.x()[..k].to_vec();
                        self.defs.push(iff(self.p.at(&r, x.clone()), self.p.at(q, x)));
                        self.reified.insert(q.clone(), r.clone());
                        r
                    }
                };
                Ok(self.p.at(&r, ts.clone()))
            }
            _ => Ok(atom(a.clone())),
        })
    }

    /// Comparisons and min/max over successor terms become guessed relation atoms.
    fn reify_comparisons(&mut self, m: &Formula) -> Formula {
        m.map_atoms(&mut |a| {
            let (key, arity, ts) = match a {
                Atom::Eq(s, t) if s.depth() + t.depth() > 0 => ("eq", 2, vec![s.clone(), t.clone()]),
                Atom::Lt(s, t) if s.depth() + t.depth() > 0 => ("lt", 2, vec![s.clone(), t.clone()]),
                Atom::Min(t) if t.depth() > 0 => ("min", 1, vec![t.clone()]),
                Atom::Max(t) if t.depth() > 0 => ("max", 1, vec![t.clone()]),
                _ => return atom(a.clone()),
            };
            let r = match self.reified.get(key) {
                Some(r) => r.clone(),
                None => {
                    let r = self.new_symbol(&format!("P_{key}"), arity);
                    let (x0, x1) = (Term::var(&self.p.xs[0]), Term::var(&self.p.xs[1]));
                    let (args, meaning) = match key {
                        "eq" => (vec![x0.clone(), x1.clone()], Atom::Eq(x0, x1)),
                        "lt" => (vec![x0.clone(), x1.clone()], Atom::Lt(x0, x1)),
                        "min" => (vec![x0.clone()], Atom::Min(x0)),
                        _ => (vec![x0.clone()], Atom::Max(x0)),
                    };
                    self.defs.push(iff(self.p.at(&r, args), atom(meaning)));
                    self.reified.insert(key.to_string(), r.clone());
                    r
                }
            };
            self.p.at(&r, ts)
        })
    }

    /// Guessed atoms repeating a variable become atoms of a lower-arity definitional symbol.
    fn separate_variables(&mut self, m: &Formula) -> Result<Formula> {
        try_map_atoms(m, &mut |a| match a {
            Atom::Rel(r, ts) if self.is_guessed(r) => {
                let ls = self.p.lins(ts)?;
                if distinct(&ls) {
                    return Ok(atom(a.clone()));
                }
                // slot of the first occurrence of each variable
                let reps: Vec<usize> = (0..ls.len()).filter(|&s| ls[..s].iter().all(|b| b.0 != ls[s].0)).collect();
                let rep_of = |s: usize| reps.iter().copied().find(|&r| ls[r].0 == ls[s].0).unwrap();
                // the shape: which representative each slot follows, and at which offset
                let shape: Vec<(usize, i64)> = (0..ls.len())
                    .map(|s| {
                        (reps.iter().position(|&r| r == rep_of(s)).unwrap(), ls[s].1 as i64 - ls[rep_of(s)].1 as i64)
                    })
                    .collect();
                let key = (r.clone(), shape);
                let def = match self.patterns.get(&key) {
                    Some(def) => def.clone(),
                    None => {
                        let def = self.new_symbol(&format!("{r}_f"), reps.len());
                        // slot s is read by prefix variable s
                        let mut guards = Vec::new();
                        for s in 0..ls.len() {
                            let rs = rep_of(s);
                            if s == rs {
                                continue;
                            }
                            let diff = ls[s].1 as i64 - ls[rs].1 as i64;
                            guards.push(if diff >= 0 {
                                atom(Atom::Eq(self.p.term((s, 0)), self.p.term((rs, diff as usize))))
                            } else {
                                atom(Atom::Eq(self.p.term((s, (-diff) as usize)), self.p.term((rs, 0))))
                            });
                        }
                        let lhs = self.p.at(&def, reps.iter().map(|&s| self.p.term((s, 0))).collect());
                        let rhs = self.p.at(r, (0..ls.len()).map(|s| self.p.term((s, 0))).collect());
                        self.defs.push(implies(and(guards), iff(lhs, rhs)));
                        self.patterns.insert(key, def.clone());
                        def
                    }
                };
                Ok(self.p.at(&def, reps.iter().map(|&s| ts[s].clone()).collect()))
            }
            _ => Ok(atom(a.clone())),
        })
    }
}

/// Guessed atoms get pairwise distinct variables and arity exactly d; input
/// atoms take the form Q(x_ι) for an injection ι; comparisons and min/max
/// read plain variables.
pub fn flatten_atoms(s: &EsoSentence) -> Result<EsoSentence> {
    let (p, m) = split(s)?;
    let d = p.d();
    let mut f = Flattener {
        s,
        p,
        fresh: Fresh::for_sentence(s),
        guessed: s.guessed.clone(),
        defs: Vec::new(),
        reified: BTreeMap::new(),
        patterns: BTreeMap::new(),
    };
    let m = f.reify_inputs(&m)?;
    let m = f.reify_comparisons(&m);
    let m = f.separate_variables(&m)?;
    let mut parts = vec![m];
    parts.append(&mut f.defs);
    let mut clauses = Vec::new();
    for g in parts {
        let g = f.separate_variables(&g)?;
        clauses.push(f.reify_comparisons(&g));
    }
    clauses.append(&mut f.defs);
    let Flattener { p, guessed, .. } = f;
    // dummy arguments up to arity d
    let short: BTreeMap<String, usize> = guessed.iter().filter(|&&(_, k)| k < d).cloned().collect();
    let mut out = Vec::new();
    for c in &clauses {
        out.push(try_map_atoms(c, &mut |a| match a {
            Atom::Rel(r, ts) if short.contains_key(r) => {
                let ls = p.lins(ts)?;
                let mut args = ts.clone();
                args.extend((0..d).filter(|v| ls.iter().all(|l| l.0 != *v)).map(|v| p.term((v, 0))));
                Ok(p.at(r, args))
            }
            _ => Ok(atom(a.clone())),
        })?);
    }
    for (r, &k) in &short {
        for q in k..d {
            out.push(iff(p.at(r, p.x()), p.at(r, p.bump(q))));
        }
    }
    let guessed = guessed.into_iter().map(|(g, k)| (g, k.max(d))).collect();
    rebuild(s, &p, guessed, out)
}

// ---------------------------------------------------------------------------
// successors

/// Every guessed atom becomes R(x_π) or R(x^(i)); atoms R(x^(i)) are further
/// split on max(x_i) so that the cyclic wrap never reaches a sorted copy.
pub fn decompose_successors(s: &EsoSentence) -> Result<EsoSentence> {
    let (p, m) = split(s)?;
    let d = p.d();
    let mut fresh = Fresh::for_sentence(s);
    let mut guessed = s.guessed.clone();
    let mut copies: BTreeMap<(String, Vec<usize>), String> = BTreeMap::new();
    let mut chain = Vec::new();
    let is_guessed = |r: &str| s.is_guessed(r);
    let m = try_map_atoms(&m, &mut |a| {
        match a {
            Atom::Rel(r, ts) if is_guessed(r) => {
                let ls = p.lins(ts)?;
                if ls.len() != d || !distinct(&ls) {
                    return Err(Error::Fragment(format!(
                        "atom {} is not flattened",
                        crate::logic::render::render_atom(a)
                    )));
                }
                let c: Vec<usize> = ls.iter().map(|l| l.1).collect();
                let identity = ls.iter().enumerate().all(|(i, l)| l.0 == i);
                if c.iter().all(|&k| k == 0) || (identity && c.iter().sum::<usize>() == 1) {
                    return Ok(atom(a.clone()));
                }
                // R_c(x) ⇔ R(suc^{c_1} x_1, …, suc^{c_d} x_d), built by lowering the last nonzero shift
                let mut cur = c.clone();
                let mut names = Vec::new();
                while cur.iter().any(|&k| k > 0) {
                    let key = (r.clone(), cur.clone());
                    let fresh_copy = !copies.contains_key(&key);
                    let name = copies
                        .entry(key)
                        .or_insert_with(|| {
                            let tag = cur.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("_");
                            fresh.name(&format!("{r}_{tag}"))
                        })
                        .clone();
                    let k = cur.iter().rposition(|&k| k > 0).unwrap();
                    cur[k] -= 1;
                    names.push((name, fresh_copy, k));
                }
                let mut lower = r.clone();
                for (name, fresh_copy, k) in names.iter().rev() {
                    if *fresh_copy {
                        guessed.push((name.clone(), d));
                        chain.push(iff(p.at(name, p.x()), p.at(&lower, p.bump(*k))));
                    }
                    lower = name.clone();
                }
                Ok(p.at(&names[0].0, ls.iter().map(|l| p.term((l.0, 0))).collect()))
            }
            Atom::Rel(q, ts) if s.sig.is_input(q) => {
                let ls = p.lins(ts)?;
                if ls.iter().any(|l| l.1 > 0) || !distinct(&ls) {
                    return Err(Error::Fragment(format!(
                        "input atom {} is not flattened",
                        crate::logic::render::render_atom(a)
                    )));
                }
                Ok(atom(a.clone()))
            }
            _ if a.terms().iter().any(|t| t.depth() > 0) => Err(Error::Fragment(format!(
                "atom {} reads a successor; flatten first",
                crate::logic::render::render_atom(a)
            ))),
            _ => Ok(atom(a.clone())),
        }
    })?;
    // split R(x^(i)) on max(x_i): at the wrap, R(x^(i)) reads the value at x_i := min
    let mut wrapped: BTreeMap<(String, usize), String> = BTreeMap::new();
    let mut wrap_defs = Vec::new();
    let mut unwrap = |f: &Formula, guessed: &mut Vec<(String, usize)>| {
        f.map_atoms(&mut |a| {
            let Atom::Rel(r, ts) = a else { return atom(a.clone()) };
            let Some(i) = ts.iter().position(|t| t.depth() == 1) else { return atom(a.clone()) };
            let z = wrapped
                .entry((r.clone(), i))
                .or_insert_with(|| {
                    let z = fresh.name(&format!("{r}_z{}", i + 1));
                    guessed.push((z.clone(), d));
                    wrap_defs.push(implies(p.min(i), iff(p.at(&z, p.x()), p.at(r, p.x()))));
                    wrap_defs.push(implies(not(p.max(i)), iff(p.at(&z, p.bump(i)), p.at(&z, p.x()))));
                    z
                })
                .clone();
            or([and([p.max(i), p.at(&z, p.x())]), and([not(p.max(i)), atom(a.clone())])])
        })
    };
    let mut clauses = vec![unwrap(&m, &mut guessed)];
    for c in &chain {
        clauses.push(unwrap(c, &mut guessed));
    }
    clauses.append(&mut wrap_defs);
    rebuild(s, &p, guessed, clauses)
}

// ---------------------------------------------------------------------------
// folding

/// Replaces each guessed R by the family `(R_α)`, `R_α(x) ⇔ x nondecreasing ∧ R(x_{α⁻¹})`,
/// tied by transposition coherence, and relativizes the matrix to sorted tuples.
pub fn fold_relations(s: &EsoSentence) -> Result<EsoSentence> {
    let (p, m) = split(s)?;
    let d = p.d();
    if d > MAX_TREE_D {
        return Err(Error::Cap(format!("folding over {d}! permutations")));
    }
    let perms = Permutation::all(d);
    let index = |a: &Permutation| perms.iter().position(|b| b == a).unwrap();
    let mut fresh = Fresh::for_sentence(s);
    let mut family: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut guessed = Vec::new();
    for (r, k) in &s.guessed {
        if *k != d {
            return Err(Error::Fragment(format!("{r} has arity {k}, expected {d}; flatten first")));
        }
        let names: Vec<String> = perms.iter().map(|a| fresh.name(&format!("{r}_p{}", a.compact()))).collect();
        guessed.extend(names.iter().map(|g| (g.clone(), d)));
        family.insert(r.clone(), names);
    }
    let mut clauses = Vec::new();
    for names in family.values() {
        for (k, a) in perms.iter().enumerate() {
            clauses.push(implies(p.at(&names[k], p.x()), p.sorted()));
            for i in 0..d {
                for j in i + 1..d {
                    let at = index(&a.compose(&Permutation::transposition(d, i + 1, j + 1)));
                    if at > k {
                        clauses.push(implies(p.eq(i, j), iff(p.at(&names[k], p.x()), p.at(&names[at], p.x()))));
                    }
                }
            }
        }
    }
    for a in &perms {
        let inv = a.inverse();
        let body = try_map_atoms(&m, &mut |at| match at {
            Atom::Rel(r, ts) if family.contains_key(r) => {
                let ls = p.lins(ts)?;
                let names = &family[r];
                let shifted: Vec<usize> = (0..d).filter(|&i| ls[i].1 > 0).collect();
                if shifted.is_empty() {
                    // R(x_β) ↦ R_{β⁻¹α}(x)
                    let beta = Permutation::from_images(&ls.iter().map(|l| l.0 + 1).collect::<Vec<_>>())
                        .map_err(|_| Error::Fragment(format!("{r} repeats a variable")))?;
                    return Ok(p.at(&names[index(&beta.inverse().compose(a))], p.x()));
                }
                if shifted.len() != 1 || ls[shifted[0]].1 != 1 || ls.iter().enumerate().any(|(v, l)| l.0 != v) {
                    return Err(Error::Fragment(format!(
                        "{} is neither R(x_β) nor R(x^(i))",
                        crate::logic::render::render_atom(at)
                    )));
                }
                // R(x^(i)) under x ∈ sby(α), with y = x_α and j = α⁻¹(i): y_j is bumped
                // into the last position k of its block of equal components
                let j = inv.at0(shifted[0]);
                let swap = |k: usize| index(&a.compose(&Permutation::transposition(d, j + 1, k + 1)));
                let mut cases = vec![and([p.eq(j, d - 1), p.at(&names[swap(d - 1)], p.bump(d - 1))])];
                for k in j..d - 1 {
                    cases.push(and([p.eq(j, k), p.lt(k, k + 1), p.at(&names[swap(k)], p.bump(k))]));
                }
                Ok(or(cases))
            }
            other => {
                let mut bad = None;
                let moved = other.map_terms(&mut |t| match p.lin(t) {
                    Ok((v, c)) => p.term((inv.at0(v), c)),
                    Err(e) => {
                        bad = Some(e);
                        t.clone()
                    }
                });
                bad.map_or(Ok(atom(moved)), Err)
            }
        })?;
        clauses.push(implies(p.sorted(), body));
    }
    rebuild(s, &p, guessed, clauses)
}

// ---------------------------------------------------------------------------
// comparisons

/// Replaces `=` and `<` between prefix variables by guessed relations pinned
/// down with min/max and single successors.
pub fn eliminate_comparisons(s: &EsoSentence) -> Result<EsoSentence> {
    let (p, m) = split(s)?;
    let d = p.d();
    let mut pairs: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut err = None;
    m.for_each_atom(&mut |a| {
        if let Atom::Eq(x, y) | Atom::Lt(x, y) = a {
            match (p.lin(x), p.lin(y)) {
                (Ok((u, 0)), Ok((v, 0))) if u != v => {
                    *pairs.entry((u.min(v), u.max(v))).or_default() |= matches!(a, Atom::Lt(..));
                }
                (Ok((_, 0)), Ok((_, 0))) => {}
                _ => err = Some(Error::Fragment("comparison over successor terms; flatten first".into())),
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    if pairs.is_empty() {
        return Ok(s.clone());
    }
    let mut fresh = Fresh::for_sentence(s);
    let mut guessed = s.guessed.clone();
    let mut names: BTreeMap<(usize, usize), [String; 4]> = BTreeMap::new();
    let mut clauses = Vec::new();
    for (&(a, b), &strict) in &pairs {
        let tag = format!("{}_{}", a + 1, b + 1);
        let [e, dd, l, g] = ["E", "D", "L", "G"].map(|k| fresh.name(&format!("{k}_{tag}")));
        guessed.push((e.clone(), d));
        guessed.push((dd.clone(), d));
        let (ex, lx, gx) = (p.at(&e, p.x()), p.at(&l, p.x()), p.at(&g, p.x()));
        // E(x) ⇔ x_a = x_b, with D(x) ⇔ x_a = x_b + 1 as the diagonal step
        clauses.push(implies(p.min(a), iff(ex.clone(), p.min(b))));
        clauses.push(implies(p.min(b), iff(ex.clone(), p.min(a))));
        clauses.push(implies(and([not(p.max(a)), not(p.max(b))]), iff(ex.clone(), p.at(&dd, p.bump(a)))));
        clauses.push(implies(not(p.max(b)), iff(p.at(&dd, p.x()), p.at(&e, p.bump(b)))));
        if strict {
            guessed.push((l.clone(), d));
            guessed.push((g.clone(), d));
            clauses.push(implies(and([or([ex.clone(), lx.clone()]), not(p.max(b))]), p.at(&l, p.bump(b))));
            clauses.push(implies(and([or([ex.clone(), gx.clone()]), not(p.max(a))]), p.at(&g, p.bump(a))));
            clauses.push(implies(lx.clone(), and([not(gx.clone()), not(ex.clone())])));
            clauses.push(implies(gx, not(ex)));
        }
        names.insert((a, b), [e, dd, l, g]);
    }
    let body = m.map_atoms(&mut |at| {
        let (x, y, strict) = match at {
            Atom::Eq(x, y) => (x, y, false),
            Atom::Lt(x, y) => (x, y, true),
            _ => return atom(at.clone()),
        };
        let (u, v) = (p.lin(x).unwrap().0, p.lin(y).unwrap().0);
        if u == v {
            return Formula::from(!strict);
        }
        let [e, _, l, g] = &names[&(u.min(v), u.max(v))];
        let r = match (strict, u < v) {
            (false, _) => e,
            (true, true) => l,
            (true, false) => g,
        };
        p.at(r, p.x())
    });
    clauses.insert(0, body);
    rebuild(s, &p, guessed, clauses)
}

// ---------------------------------------------------------------------------
// input relations

/// Replaces input atoms `Q(x_ι)` by `Q_γ(x)` for the permutation γ with
/// `Q_γ(x) ⇔ Q(x_ι)`, generated by a d-simulation along the permutation tree.
pub fn simulate_input_relations(s: &EsoSentence) -> Result<EsoSentence> {
    let (p, m) = split(s)?;
    let d = p.d();
    let k = s.sig.input_arity();
    let mut targets: BTreeSet<(String, Permutation)> = BTreeSet::new();
    let mut err = None;
    m.for_each_atom(&mut |a| match a {
        Atom::Rel(q, ts) if s.sig.is_input(q) => match p.lins(ts) {
            Ok(ls) if ls.iter().enumerate().all(|(i, l)| *l == (i, 0)) => {}
            Ok(ls) if k + 1 == d && ls.iter().all(|l| l.1 == 0) && distinct(&ls) => {
                let missing = (0..d).find(|v| ls.iter().all(|l| l.0 != *v)).unwrap();
                let mut images: Vec<usize> = ls.iter().map(|l| l.0 + 1).collect();
                images.push(missing + 1);
                let alpha = Permutation::from_images(&images).unwrap();
                targets.insert((q.clone(), alpha.inverse()));
            }
            Ok(_) => {
                err = Some(Error::Fragment(format!(
                    "input atom {} is not Q(x_ι) with d = k + 1",
                    crate::logic::render::render_atom(a)
                )))
            }
            Err(e) => err = Some(e),
        },
        Atom::Eq(..) | Atom::Lt(..) => err = Some(Error::Fragment("comparisons must be eliminated first".into())),
        _ => {}
    });
    if let Some(e) = err {
        return Err(e);
    }
    if targets.is_empty() {
        return Ok(s.clone());
    }
    let tree = build_perm_tree(d)?;
    let mut fresh = Fresh::for_sentence(s);
    let mut guessed = s.guessed.clone();
    let mut clauses = Vec::new();
    let mut q_names: BTreeMap<(String, Permutation), String> = BTreeMap::new();
    let letters: BTreeSet<String> = targets.iter().map(|(q, _)| q.clone()).collect();
    let down: Vec<Term> = p.x()[..d - 1].to_vec();
    for q in letters {
        let wanted: Vec<usize> = targets.iter().filter(|(r, _)| r == &q).map(|(_, g)| tree.find(g).unwrap()).collect();
        let mut nodes: Vec<usize> = wanted.iter().flat_map(|&w| tree.ancestry(w)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let t_names: BTreeMap<usize, String> = nodes
            .iter()
            .map(|&k| {
                let t = fresh.name(&format!("{q}_T{}", tree.nodes[k].perm.compact()));
                guessed.push((t.clone(), d));
                (k, t)
            })
            .collect();
        // F1
        clauses.push(implies(p.min(d - 1), iff(p.at(&t_names[&0], p.x()), p.at(&q, down.clone()))));
        for &k in &nodes[1..] {
            let (i, j) = tree.nodes[k].edge.unwrap();
            let (i, j) = (i - 1, j - 1);
            let parent = tree.nodes[k].parent.unwrap();
            let t = &t_names[&k];
            // F2, F3
            clauses.push(implies(and([not(p.max(i)), not(p.max(j))]), iff(p.at(t, p.bump(i)), p.at(t, p.bump(j)))));
            clauses.push(implies(p.min(i), iff(p.at(&t_names[&parent], p.x()), p.at(t, p.x()))));
            if wanted.contains(&k) {
                let qn = fresh.name(&format!("{q}_{}", tree.nodes[k].perm.compact()));
                guessed.push((qn.clone(), d));
                // F5, F6
                clauses.push(implies(p.min(j), iff(p.at(&qn, p.x()), p.at(t, p.x()))));
                clauses.push(iff(p.at(&qn, p.x()), p.at(&qn, p.bump(j))));
                q_names.insert((q.clone(), tree.nodes[k].perm.clone()), qn);
            }
        }
    }
    let body = m.map_atoms(&mut |a| match a {
        Atom::Rel(q, ts) if s.sig.is_input(q) => {
            let ls = p.lins(ts).unwrap();
            if ls.iter().enumerate().all(|(i, l)| *l == (i, 0)) {
                return atom(a.clone());
            }
            let missing = (0..d).find(|v| ls.iter().all(|l| l.0 != *v)).unwrap();
            let mut images: Vec<usize> = ls.iter().map(|l| l.0 + 1).collect();
            images.push(missing + 1);
            let gamma = Permutation::from_images(&images).unwrap().inverse();
            p.at(&q_names[&(q.clone(), gamma)], p.x())
        }
        _ => atom(a.clone()),
    });
    clauses.insert(0, body);
    rebuild(s, &p, guessed, clauses)
}

// ---------------------------------------------------------------------------

/// Runs the five stages on an ESO(∀^d, arity ≤ d) sentence over k-pictures,
/// d = k + 1. A shorter universal prefix is padded with unused variables.
pub fn sort_pipeline(s: &EsoSentence, k: usize) -> Result<EsoSentence> {
    if s.sig.kind != EncodingKind::Coordinate || s.sig.input_arity() != k {
        return Err(Error::Fragment(format!("expected a coordinate sentence over {k}-pictures")));
    }
    let d = k + 1;
    if d > MAX_PIPELINE_D {
        return Err(Error::Cap(format!("sorting with {d} variables exceeds the bound {MAX_PIPELINE_D}")));
    }
    let (xs, m) = prenex_universal(&s.body)
        .ok_or_else(|| Error::Fragment("expected a prenex universal body with quantifier-free matrix".into()))?;
    if xs.len() > d {
        return Err(Error::Fragment(format!("{} universal variables, at most {d} allowed", xs.len())));
    }
    if xs.len() == d && is_sorted(s, k, d)? {
        return Ok(s.clone());
    }
    let mut xs = xs;
    let used = s.body.all_vars();
    let mut c = 1;
    while xs.len() < d {
        let v = format!("x{c}");
        c += 1;
        if !used.contains(&v) && !xs.contains(&v) {
            xs.push(v);
        }
    }
    let padded = s.with_body(s.guessed.clone(), Formula::Forall(xs, Box::new(m.clone())))?;
    let out = simulate_input_relations(&eliminate_comparisons(&fold_relations(&decompose_successors(
        &flatten_atoms(&padded)?,
    )?)?)?)?;
    if !is_sorted(&out, k, d)? {
        return Err(Error::Contract("pipeline output is not sorted".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{classify_fragment, parse_sentence, Signature};
    use crate::model_check::check_eso;
    use crate::picture::{coordinate_structure, Picture};
    use proptest::prelude::*;

    fn agree(a: &EsoSentence, b: &EsoSentence, max_n: usize) -> std::result::Result<(), String> {
        let al = a.sig.alphabet.clone();
        for n in 1..=max_n {
            for p in Picture::enumerate(a.sig.d, n, &al) {
                let st = coordinate_structure(&p);
                let (x, y) = (check_eso(&st, a).unwrap(), check_eso(&st, b).unwrap());
                if x != y {
                    return Err(format!("{a}\n{b}\non {}: {x} vs {y}", p.inline()));
                }
            }
        }
        Ok(())
    }

    fn words(text: &str) -> EsoSentence {
        parse_sentence(text, &Signature::coordinate(1, &["a", "b"])).unwrap()
    }

    fn has(s: &EsoSentence, g: &str) -> bool {
        s.guessed.iter().any(|(h, k)| h == g && *k == s.body.all_vars().len())
    }

    #[test]
    fn flatten_separates_repeated_variables() {
        let sig = Signature::coordinate(3, &["a", "b"]);
        let s = parse_sentence(
            "(exists-rel ((R 4)) (forall (x1 x2 x3 x4) (iff (R (suc (suc x1)) x2 (suc x1) (suc (suc (suc x2)))) (Q_a x1 x2 x3))))",
            &sig,
        )
        .unwrap();
        let t = flatten_atoms(&s).unwrap();
        assert!(has(&t, "R_f"), "{t}");
        agree(&s, &t, 2).unwrap();
    }

    #[test]
    fn flatten_lifts_unary_symbols() {
        let s = words("(exists-rel ((U 1)) (forall (x y) (and (iff (U x) (Q_a x)) (or (U y) (Q_b y)))))");
        let t = flatten_atoms(&s).unwrap();
        assert_eq!(t.arity_of("U"), Some(2));
        agree(&s, &t, 4).unwrap();
        let flat = words("(exists-rel ((R 2)) (forall (x y) (or (R y x) (Q_a x))))");
        assert_eq!(flatten_atoms(&flat).unwrap(), flat);
    }

    #[test]
    fn flatten_reifies_successor_comparisons() {
        let s =
            words("(forall (x y) (and (not (= (suc x) x)) (implies (< x (suc y)) (or (Q_a (suc y)) (min (suc x))))))");
        let t = flatten_atoms(&s).unwrap();
        agree(&s, &t, 4).unwrap();
    }

    #[test]
    fn decompose_builds_shift_chains() {
        let s = words("(exists-rel ((R 2)) (forall (x y) (iff (R (suc x) (suc y)) (Q_a x))))");
        let t = decompose_successors(&flatten_atoms(&s).unwrap()).unwrap();
        assert!(has(&t, "R_1_0") && has(&t, "R_1_1"), "{t}");
        agree(&s, &t, 3).unwrap();
        let flat = words("(exists-rel ((R 2)) (forall (x y) (or (R y x) (Q_a x))))");
        assert_eq!(decompose_successors(&flat).unwrap(), flat);
    }

    #[test]
    fn decompose_handles_the_wrap() {
        // R(suc x, y) at x = max reads R(min, y)
        let s = words("(exists-rel ((R 2)) (forall (x y) (and (iff (R x y) (Q_a x)) (iff (R (suc x) y) (Q_b x)))))");
        let t = decompose_successors(&flatten_atoms(&s).unwrap()).unwrap();
        agree(&s, &t, 4).unwrap();
    }

    #[test]
    fn fold_binary_relations() {
        let s = words(
            "(exists-rel ((R 2)) (forall (x y) (and (iff (R x y) (R y x)) (implies (Q_a x) (R (suc x) y)) (or (R x (suc y)) (Q_b y)))))",
        );
        let t = fold_relations(&decompose_successors(&flatten_atoms(&s).unwrap()).unwrap()).unwrap();
        assert!(has(&t, "R_p12") && has(&t, "R_p21"));
        agree(&s, &t, 4).unwrap();
    }

    #[test]
    fn comparisons_become_guessed() {
        let s = words("(forall (x y) (or (< x y) (= x y) (< y x)))");
        let t = eliminate_comparisons(&s).unwrap();
        let mut no_cmp = true;
        t.body.for_each_atom(&mut |a| no_cmp &= !matches!(a, Atom::Eq(..) | Atom::Lt(..)));
        assert!(no_cmp);
        for n in 1..=4 {
            let p = Picture::new(1, n, vec!["a".into(), "b".into()], &vec!["a"; n]).unwrap();
            assert!(check_eso(&coordinate_structure(&p), &t).unwrap());
        }
        let s = words("(forall (x y) (implies (= x y) (iff (Q_a x) (Q_a y))))");
        agree(&s, &eliminate_comparisons(&s).unwrap(), 4).unwrap();
        let plain = words("(forall (x y) (Q_a x))");
        assert_eq!(eliminate_comparisons(&plain).unwrap(), plain);
    }

    #[test]
    fn input_transport_easy_case() {
        let s = words("(forall (x y) (iff (Q_a x) (Q_a y)))");
        let t = simulate_input_relations(&s).unwrap();
        assert!(has(&t, "Q_a_T12") && has(&t, "Q_a_T21") && has(&t, "Q_a_21"), "{t}");
        assert!(is_sorted(&t, 1, 2).unwrap());
        agree(&s, &t, 4).unwrap();
    }

    #[test]
    fn pipeline_examples() {
        let s = words("(forall (x y) (iff (Q_a x) (Q_a y)))");
        let t = sort_pipeline(&s, 1).unwrap();
        assert!(classify_fragment(&t).sorted);
        agree(&s, &t, 4).unwrap();
        let sorted = words("(exists-rel ((R 2)) (forall (x y) (and (R x y) (R x (suc y)) (Q_a x))))");
        assert_eq!(sort_pipeline(&sorted, 1).unwrap(), sorted);
        let one = words("(forall (x) (or (Q_a x) (max x)))");
        agree(&one, &sort_pipeline(&one, 1).unwrap(), 4).unwrap();
        assert!(sort_pipeline(&words("(forall (x y z) (= x z))"), 1).is_err());
    }

    #[test]
    fn pipeline_on_two_dimensional_inputs() {
        let sig = Signature::coordinate(2, &["0", "1"]);
        let s = parse_sentence(
            "(exists-rel ((R 3)) (forall (x y z) (and (iff (Q_1 x y) (Q_1 y x)) (iff (R x y z) (R z y x)))))",
            &sig,
        )
        .unwrap();
        let t = sort_pipeline(&s, 2).unwrap();
        assert!(classify_fragment(&t).sorted);
        agree(&s, &t, 2).unwrap();
    }

    fn word_atom() -> impl Strategy<Value = &'static str> {
        prop::sample::select(vec![
            "(R x y)",
            "(R y x)",
            "(R (suc x) y)",
            "(R x (suc y))",
            "(Q_a x)",
            "(Q_a y)",
            "(= x y)",
            "(< x y)",
            "(min x)",
            "(max y)",
        ])
    }

    fn word_matrix() -> impl Strategy<Value = String> {
        word_atom().prop_map(str::to_string).prop_recursive(3, 10, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| format!("(not {a})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(and {a} {b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(or {a} {b})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("(iff {a} {b})")),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn every_stage_preserves_the_language(m in word_matrix()) {
            let s = words(&format!("(exists-rel ((R 2)) (forall (x y) {m}))"));
            let f = flatten_atoms(&s).unwrap();
            agree(&s, &f, 3).map_err(TestCaseError::fail)?;
            let dcm = decompose_successors(&f).unwrap();
            agree(&s, &dcm, 3).map_err(TestCaseError::fail)?;
            let fo = fold_relations(&dcm).unwrap();
            agree(&s, &fo, 3).map_err(TestCaseError::fail)?;
            let el = eliminate_comparisons(&fo).unwrap();
            agree(&s, &el, 3).map_err(TestCaseError::fail)?;
            let sim = simulate_input_relations(&el).unwrap();
            prop_assert!(is_sorted(&sim, 1, 2).unwrap());
            agree(&s, &sim, 3).map_err(TestCaseError::fail)?;
        }
    }
}
