//! Rewriting ESO(∀¹, arity 1) pixel sentences into the three-guard local form
//!
//! ```text
//! ∃U ∀x ⋀_i [ min_i(x) → m_i(x) ∧ max_i(x) → M_i(x) ∧ ¬max_i(x) → Ψ_i(x) ]
//! ```
//!
//! where m_i, M_i only read Q(x) and Ψ_i reads Q(x) and Q(suc_i(x)).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{and, atom, iff, not, prenex_universal, Atom, EsoSentence, Formula, Term};
use crate::normalize::Fresh;
use crate::picture::EncodingKind;

/// Largest accepted total successor depth of a term.
pub const MAX_SHIFT: usize = 8;

/// The three guarded formulas per dimension of a localized sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalForm {
    pub var: String,
    /// `min_i(x) → min[i-1]`.
    pub min: Vec<Formula>,
    /// `max_i(x) → max[i-1]`.
    pub max: Vec<Formula>,
    /// `¬max_i(x) → step[i-1]`.
    pub step: Vec<Formula>,
}

impl LocalForm {
    pub fn to_body(&self) -> Formula {
        let x = Term::var(&self.var);
        let d = self.min.len();
        // raw implications keep the guard shape even for constant right-hand sides
        let guarded = |g: Formula, f: &Formula| match f {
            Formula::True => Formula::True,
            f => Formula::Implies(Box::new(g), Box::new(f.clone())),
        };
        let clauses = (0..d).flat_map(|i| {
            [
                guarded(atom(Atom::MinI(i + 1, x.clone())), &self.min[i]),
                guarded(atom(Atom::MaxI(i + 1, x.clone())), &self.max[i]),
                guarded(not(atom(Atom::MaxI(i + 1, x.clone()))), &self.step[i]),
            ]
        });
        Formula::Forall(vec![self.var.clone()], Box::new(and(clauses.collect::<Vec<_>>())))
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(gs) => gs.iter().flat_map(conjuncts).collect(),
        Formula::True => vec![],
        g => vec![g],
    }
}

/// Reads `s` as a localized sentence, if it already has that shape.
pub fn local_form(s: &EsoSentence) -> Option<LocalForm> {
    if s.sig.kind != EncodingKind::Pixel || s.guessed.iter().any(|&(_, k)| k != 1) {
        return None;
    }
    let (xs, matrix) = prenex_universal(&s.body)?;
    let [x] = xs.as_slice() else { return None };
    let d = s.sig.d;
    let mut lf = LocalForm {
        var: x.clone(),
        min: vec![Formula::True; d],
        max: vec![Formula::True; d],
        step: vec![Formula::True; d],
    };
    let here = |f: &Formula| {
        let mut ok = true;
        f.for_each_atom(&mut |a| ok &= matches!(a, Atom::Rel(_, ts) if ts.len() == 1 && ts[0].is_var()));
        ok
    };
    let near = |f: &Formula, i: usize| {
        let mut ok = true;
        f.for_each_atom(&mut |a| {
            ok &= matches!(a, Atom::Rel(_, ts) if ts.len() == 1 && (ts[0].is_var() || ts[0].sucs == [i]))
        });
        ok
    };
    for c in conjuncts(matrix) {
        let Formula::Implies(g, body) = c else { return None };
        let slot = match &**g {
            Formula::Atom(Atom::MinI(i, t)) if t.is_var() && here(body) => &mut lf.min[*i - 1],
            Formula::Atom(Atom::MaxI(i, t)) if t.is_var() && here(body) => &mut lf.max[*i - 1],
            Formula::Not(h) => match &**h {
                Formula::Atom(Atom::MaxI(i, t)) if t.is_var() && near(body, *i) => &mut lf.step[*i - 1],
                _ => return None,
            },
            _ => return None,
        };
        *slot = and([slot.clone(), (**body).clone()]);
    }
    Some(lf)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Pred {
    Sym(String),
    Min(usize),
    Max(usize),
}

struct Localizer {
    d: usize,
    x: String,
    fresh: Fresh,
    new_syms: Vec<String>,
    /// Name of the monadic symbol standing for P(x + e).
    shifted: BTreeMap<(Pred, Vec<usize>), String>,
    carriers: BTreeMap<(String, usize), String>,
    min: Vec<Vec<Formula>>,
    max: Vec<Vec<Formula>>,
    step: Vec<Vec<Formula>>,
}

impl Localizer {
    fn at(&self, q: &str, i: Option<usize>) -> Formula {
        let t = Term::var(&self.x);
        Formula::Atom(Atom::Rel(
            q.to_string(),
            vec![match i {
                Some(i) => t.suc(i),
                None => t,
            }],
        ))
    }

    fn symbol(&mut self, base: &str) -> String {
        let s = self.fresh.name(base);
        self.new_syms.push(s.clone());
        s
    }

    /// C(x) ↔ q(x with x_i := 1).
    fn carrier(&mut self, q: &str, i: usize) -> String {
        if let Some(c) = self.carriers.get(&(q.to_string(), i)) {
            return c.clone();
        }
        let c = self.symbol(&format!("{q}_w{i}"));
        let (now, next, src) = (self.at(&c, None), self.at(&c, Some(i)), self.at(q, None));
        self.min[i - 1].push(iff(now.clone(), src));
        self.step[i - 1].push(iff(now, next));
        self.carriers.insert((q.to_string(), i), c.clone());
        c
    }

    fn name(&mut self, p: &Pred, e: &[usize]) -> String {
        // min_j and max_j only depend on the j-th component
        let e: Vec<usize> = match p {
            Pred::Min(j) | Pred::Max(j) => (0..self.d).map(|k| if k + 1 == *j { e[k] } else { 0 }).collect(),
            Pred::Sym(_) => e.to_vec(),
        };
        let key = (p.clone(), e.clone());
        if let Some(s) = self.shifted.get(&key) {
            return s.clone();
        }
        let s = match e.iter().rposition(|&k| k > 0) {
            None => match p {
                Pred::Sym(q) => q.clone(),
                Pred::Min(j) => {
                    let s = self.symbol(&format!("Mn{j}"));
                    let (now, next) = (self.at(&s, None), self.at(&s, Some(*j)));
                    self.min[j - 1].push(now);
                    self.step[j - 1].push(not(next));
                    s
                }
                Pred::Max(j) => {
                    let s = self.symbol(&format!("Mx{j}"));
                    let now = self.at(&s, None);
                    self.max[j - 1].push(now.clone());
                    self.step[j - 1].push(not(now));
                    s
                }
            },
            Some(k) => {
                let i = k + 1;
                let mut prev = e.clone();
                prev[k] -= 1;
                let base = self.name(p, &prev);
                let v = self.symbol(&format!("{base}_s{i}"));
                let c = self.carrier(&base, i);
                let (now, src, carried) = (self.at(&v, None), self.at(&base, Some(i)), self.at(&c, None));
                self.step[i - 1].push(iff(now.clone(), src));
                self.max[i - 1].push(iff(now, carried));
                v
            }
        };
        self.shifted.insert(key, s.clone());
        s
    }

    fn offset(&self, t: &Term) -> Result<Vec<usize>> {
        if t.sucs.len() > MAX_SHIFT {
            return Err(Error::Fragment(format!("successor depth {} exceeds {MAX_SHIFT}", t.sucs.len())));
        }
        let mut e = vec![0; self.d];
        for &i in &t.sucs {
            e[i - 1] += 1;
        }
        Ok(e)
    }

    fn rewrite(&mut self, a: &Atom, max_dim: Option<usize>, max_value: bool) -> Result<Formula> {
        let (p, t) = match a {
            Atom::Rel(q, ts) if ts.len() == 1 => (Pred::Sym(q.clone()), &ts[0]),
            Atom::MinI(i, t) => (Pred::Min(*i), t),
            Atom::MaxI(i, t) if max_dim == Some(*i) && t.is_var() => return Ok(Formula::from(max_value)),
            Atom::MaxI(i, t) => (Pred::Max(*i), t),
            other => return Err(Error::Fragment(format!("unsupported atom {}", atom(other.clone())))),
        };
        let e = self.offset(t)?;
        let q = self.name(&p, &e);
        Ok(self.at(&q, None))
    }
}

/// An equivalent sentence in local form; sentences already in that form are returned as is.
///
/// Successor chains are replaced by shifted copies of the symbols they reach, with
/// carrier symbols transporting values across the cyclic wrap; min_j/max_j atoms
/// away from the guards become fresh symbols pinned by their own guard clauses.
pub fn localize_pixel_sentence(s: &EsoSentence) -> Result<EsoSentence> {
    if s.sig.kind != EncodingKind::Pixel {
        return Err(Error::Fragment("localization applies to pixel sentences".into()));
    }
    if let Some((g, k)) = s.guessed.iter().find(|&&(_, k)| k != 1) {
        return Err(Error::Fragment(format!("guessed symbol {g} has arity {k}, expected 1")));
    }
    if local_form(s).is_some() {
        return Ok(s.clone());
    }
    let (xs, matrix) =
        prenex_universal(&s.body).ok_or_else(|| Error::Fragment("body is not prenex universal".into()))?;
    let x = match xs.as_slice() {
        [x] => x.clone(),
        [] => "x".to_string(),
        _ => return Err(Error::Fragment(format!("{} universal variables, expected 1", xs.len()))),
    };
    let d = s.sig.d;
    let mut loc = Localizer {
        d,
        x,
        fresh: Fresh::for_sentence(s),
        new_syms: Vec::new(),
        shifted: BTreeMap::new(),
        carriers: BTreeMap::new(),
        min: vec![Vec::new(); d],
        max: vec![Vec::new(); d],
        step: vec![Vec::new(); d],
    };
    // case split on the max atom of one dimension when the body reads one
    let mut maxes = Vec::new();
    matrix.for_each_atom(&mut |a| {
        if let Atom::MaxI(i, t) = a {
            if t.is_var() && !maxes.contains(i) {
                maxes.push(*i);
            }
        }
    });
    let split = if maxes.len() == 1 { maxes[0] } else { 1 };
    let mut fail = None;
    let mut body_for = |v: bool, loc: &mut Localizer| {
        matrix.map_atoms(&mut |a| match loc.rewrite(a, (maxes.len() == 1).then_some(split), v) {
            Ok(f) => f,
            Err(e) => {
                fail.get_or_insert(e);
                Formula::True
            }
        })
    };
    let on_max = body_for(true, &mut loc);
    let off_max = body_for(false, &mut loc);
    if let Some(e) = fail {
        return Err(e);
    }
    loc.max[split - 1].push(on_max);
    loc.step[split - 1].push(off_max);
    let lf = LocalForm {
        var: loc.x.clone(),
        min: loc.min.into_iter().map(and).collect(),
        max: loc.max.into_iter().map(and).collect(),
        step: loc.step.into_iter().map(and).collect(),
    };
    let mut guessed = s.guessed.clone();
    guessed.extend(loc.new_syms.into_iter().map(|g| (g, 1)));
    s.with_body(guessed, lf.to_body())
}
