//! Formulas resolved against a structure: symbol names become table indices
//! and variables become environment slots.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::logic::{Atom, Formula, Term};
use crate::picture::{rank, FiniteStructure, Relation};

#[derive(Clone, Debug)]
pub(crate) struct CTerm {
    pub slot: usize,
    pub funcs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub(crate) enum CF {
    Const(bool),
    Input(usize, Vec<CTerm>),
    Guess(usize, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<CF>),
    And(Vec<CF>),
    Or(Vec<CF>),
    Implies(Box<CF>, Box<CF>),
    Iff(Box<CF>, Box<CF>),
    Xor(Box<CF>, Box<CF>),
    Forall(Vec<usize>, Box<CF>),
    Exists(Vec<usize>, Box<CF>),
}

/// A formula compiled against one structure and a list of guessed symbols.
pub(crate) struct Compiled {
    pub m: usize,
    pub rels: Vec<Relation>,
    pub funcs: Vec<Vec<usize>>,
    /// Arity and bit offset of each guessed symbol in a flat assignment.
    pub guess_arity: Vec<usize>,
    pub guess_offset: Vec<usize>,
    pub guess_bits: usize,
    pub slots: usize,
    pub root: CF,
}

struct Builder<'a> {
    s: &'a FiniteStructure,
    guessed: &'a [(String, usize)],
    rel_index: HashMap<String, usize>,
    rels: Vec<Relation>,
    func_index: HashMap<String, usize>,
    funcs: Vec<Vec<usize>>,
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Builder<'_> {
    fn rel(&mut self, name: &str, arity: usize) -> Result<CFRef> {
        if let Some(k) = self.guessed.iter().position(|(g, _)| g == name) {
            if self.guessed[k].1 != arity {
                return Err(Error::Eval(format!("{name} applied to {arity} terms")));
            }
            return Ok(CFRef::Guess(k));
        }
        if let Some(&k) = self.rel_index.get(name) {
            return Ok(CFRef::Input(k));
        }
        let r = self.s.relations.get(name).ok_or_else(|| Error::Eval(format!("uninterpreted symbol {name}")))?;
        if r.arity != arity {
            return Err(Error::Eval(format!("{name} has arity {}, applied to {arity} terms", r.arity)));
        }
        let k = self.rels.len();
        self.rels.push(r.clone());
        self.rel_index.insert(name.to_string(), k);
        Ok(CFRef::Input(k))
    }

    fn func(&mut self, i: usize) -> Result<usize> {
        let name = if i == 0 { "suc".to_string() } else { format!("suc_{i}") };
        if let Some(&k) = self.func_index.get(&name) {
            return Ok(k);
        }
        let f = self.s.functions.get(&name).ok_or_else(|| Error::Eval(format!("uninterpreted function {name}")))?;
        let k = self.funcs.len();
        self.funcs.push(f.clone());
        self.func_index.insert(name, k);
        Ok(k)
    }

    fn term(&mut self, t: &Term) -> Result<CTerm> {
        let slot = self
            .scope
            .iter()
            .rev()
            .find(|(v, _)| v == &t.var)
            .map(|&(_, s)| s)
            .ok_or_else(|| Error::Eval(format!("unbound variable {}", t.var)))?;
        let funcs = t.sucs.iter().map(|&i| self.func(i)).collect::<Result<Vec<_>>>()?;
        Ok(CTerm { slot, funcs })
    }

    fn app(&mut self, name: &str, ts: &[&Term]) -> Result<CF> {
        let r = self.rel(name, ts.len())?;
        let cts = ts.iter().map(|t| self.term(t)).collect::<Result<Vec<_>>>()?;
        Ok(match r {
            CFRef::Input(k) => CF::Input(k, cts),
            CFRef::Guess(k) => CF::Guess(k, cts),
        })
    }

    fn atom(&mut self, a: &Atom) -> Result<CF> {
        match a {
            Atom::Rel(r, ts) => self.app(r, &ts.iter().collect::<Vec<_>>()),
            Atom::Eq(x, y) => Ok(CF::Eq(self.term(x)?, self.term(y)?)),
            Atom::Lt(x, y) => self.app("<", &[x, y]),
            Atom::Min(t) => self.app("min", &[t]),
            Atom::Max(t) => self.app("max", &[t]),
            Atom::MinI(i, t) => self.app(&format!("min_{i}"), &[t]),
            Atom::MaxI(i, t) => self.app(&format!("max_{i}"), &[t]),
        }
    }

    fn formula(&mut self, f: &Formula) -> Result<CF> {
        let b = |x: CF| Box::new(x);
        Ok(match f {
            Formula::True => CF::Const(true),
            Formula::False => CF::Const(false),
            Formula::Atom(a) => self.atom(a)?,
            Formula::Not(g) => CF::Not(b(self.formula(g)?)),
            Formula::And(gs) => CF::And(gs.iter().map(|g| self.formula(g)).collect::<Result<_>>()?),
            Formula::Or(gs) => CF::Or(gs.iter().map(|g| self.formula(g)).collect::<Result<_>>()?),
            Formula::Implies(x, y) => CF::Implies(b(self.formula(x)?), b(self.formula(y)?)),
            Formula::Iff(x, y) => CF::Iff(b(self.formula(x)?), b(self.formula(y)?)),
            Formula::Xor(x, y) => CF::Xor(b(self.formula(x)?), b(self.formula(y)?)),
            Formula::Forall(xs, g) | Formula::Exists(xs, g) => {
                let depth = self.scope.len();
                let mut slots = Vec::new();
                for x in xs {
                    self.scope.push((x.clone(), self.slots));
                    slots.push(self.slots);
                    self.slots += 1;
                }
                let body = b(self.formula(g)?);
                self.scope.truncate(depth);
                if matches!(f, Formula::Forall(..)) {
                    CF::Forall(slots, body)
                } else {
                    CF::Exists(slots, body)
                }
            }
        })
    }
}

enum CFRef {
    Input(usize),
    Guess(usize),
}

impl Compiled {
    /// Compiles `f`; `free` lists variables bound in the initial environment, in slot order.
    pub fn new(s: &FiniteStructure, guessed: &[(String, usize)], free: &[String], f: &Formula) -> Result<Compiled> {
        let mut bld = Builder {
            s,
            guessed,
            rel_index: HashMap::new(),
            rels: Vec::new(),
            func_index: HashMap::new(),
            funcs: Vec::new(),
            scope: free.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
            slots: free.len(),
        };
        let root = bld.formula(f)?;
        let m = s.size;
        let guess_arity: Vec<usize> = guessed.iter().map(|&(_, k)| k).collect();
        let mut guess_offset = Vec::new();
        let mut off = 0usize;
        for &k in &guess_arity {
            guess_offset.push(off);
            off = off
                .checked_add(m.checked_pow(k as u32).ok_or_else(|| Error::Cap("relation table too large".into()))?)
                .ok_or_else(|| Error::Cap("relation table too large".into()))?;
        }
        Ok(Compiled {
            m,
            rels: bld.rels,
            funcs: bld.funcs,
            guess_arity,
            guess_offset,
            guess_bits: off,
            slots: bld.slots,
            root,
        })
    }

    pub fn value(&self, t: &CTerm, env: &[usize]) -> usize {
        t.funcs.iter().fold(env[t.slot], |e, &f| self.funcs[f][e - 1])
    }

    /// Rank of the tuple denoted by `ts` (0-based, lexicographic).
    pub fn tuple_rank(&self, ts: &[CTerm], env: &[usize]) -> usize {
        let vals: Vec<usize> = ts.iter().map(|t| self.value(t, env)).collect();
        rank(self.m, &vals)
    }

    /// Evaluates with guessed bits taken from `guess` (flat, see `guess_offset`).
    pub fn eval(&self, f: &CF, env: &mut Vec<usize>, guess: &[bool]) -> bool {
        match f {
            CF::Const(b) => *b,
            CF::Input(k, ts) => self.rels[*k].bits[self.tuple_rank(ts, env)],
            CF::Guess(k, ts) => guess[self.guess_offset[*k] + self.tuple_rank(ts, env)],
            CF::Eq(a, b) => self.value(a, env) == self.value(b, env),
            CF::Not(g) => !self.eval(g, env, guess),
            CF::And(gs) => gs.iter().all(|g| self.eval(g, env, guess)),
            CF::Or(gs) => gs.iter().any(|g| self.eval(g, env, guess)),
            CF::Implies(a, b) => !self.eval(a, env, guess) || self.eval(b, env, guess),
            CF::Iff(a, b) => self.eval(a, env, guess) == self.eval(b, env, guess),
            CF::Xor(a, b) => self.eval(a, env, guess) != self.eval(b, env, guess),
            CF::Forall(slots, g) => self.quantify(slots, 0, g, env, guess, true),
            CF::Exists(slots, g) => self.quantify(slots, 0, g, env, guess, false),
        }
    }

    fn quantify(&self, slots: &[usize], i: usize, g: &CF, env: &mut Vec<usize>, guess: &[bool], all: bool) -> bool {
        if i == slots.len() {
            return self.eval(g, env, guess);
        }
        for e in 1..=self.m {
            env[slots[i]] = e;
            if self.quantify(slots, i + 1, g, env, guess, all) != all {
                return !all;
            }
        }
        all
    }
}
