use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::picture::{letter_relation, EncodingKind};

/// A variable under a chain of successor applications.
///
/// `sucs[0]` is applied first. Index 0 is the coordinate `suc`; index i ≥ 1 is the pixel `suc_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub var: String,
    pub sucs: Vec<usize>,
}

impl Term {
    pub fn var(x: &str) -> Self {
        Term { var: x.to_string(), sucs: Vec::new() }
    }

    /// Applies one more successor (`0` for `suc`, `i` for `suc_i`).
    pub fn suc(mut self, i: usize) -> Self {
        self.sucs.push(i);
        self
    }

    pub fn depth(&self) -> usize {
        self.sucs.len()
    }

    pub fn is_var(&self) -> bool {
        self.sucs.is_empty()
    }

    pub fn rename(&self, from: &str, to: &str) -> Self {
        if self.var == from {
            Term { var: to.to_string(), sucs: self.sucs.clone() }
        } else {
            self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Rel(String, Vec<Term>),
    Eq(Term, Term),
    Lt(Term, Term),
    Min(Term),
    Max(Term),
    MinI(usize, Term),
    MaxI(usize, Term),
}

impl Atom {
    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Rel(_, ts) => ts.iter().collect(),
            Atom::Eq(a, b) | Atom::Lt(a, b) => vec![a, b],
            Atom::Min(t) | Atom::Max(t) | Atom::MinI(_, t) | Atom::MaxI(_, t) => vec![t],
        }
    }

    pub fn map_terms(&self, f: &mut dyn FnMut(&Term) -> Term) -> Atom {
        match self {
            Atom::Rel(r, ts) => Atom::Rel(r.clone(), ts.iter().map(&mut *f).collect()),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Lt(a, b) => Atom::Lt(f(a), f(b)),
            Atom::Min(t) => Atom::Min(f(t)),
            Atom::Max(t) => Atom::Max(f(t)),
            Atom::MinI(i, t) => Atom::MinI(*i, f(t)),
            Atom::MaxI(i, t) => Atom::MaxI(*i, f(t)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Xor(Box<Formula>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl From<bool> for Formula {
    fn from(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }
}

pub fn rel(r: &str, ts: Vec<Term>) -> Formula {
    Formula::Atom(Atom::Rel(r.to_string(), ts))
}

/// Relation applied to plain variables.
pub fn rel_vars(r: &str, xs: &[&str]) -> Formula {
    rel(r, xs.iter().map(|x| Term::var(x)).collect())
}

pub fn atom(a: Atom) -> Formula {
    Formula::Atom(a)
}

pub fn not(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        g => Formula::Not(Box::new(g)),
    }
}

/// Conjunction, flattening nested conjunctions and folding constants.
pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for f in fs {
        match f {
            Formula::True => {}
            Formula::False => return Formula::False,
            Formula::And(gs) => out.extend(gs),
            g => out.push(g),
        }
    }
    match out.len() {
        0 => Formula::True,
        1 => out.pop().unwrap(),
        _ => Formula::And(out),
    }
}

/// Disjunction, flattening nested disjunctions and folding constants.
pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for f in fs {
        match f {
            Formula::False => {}
            Formula::True => return Formula::True,
            Formula::Or(gs) => out.extend(gs),
            g => out.push(g),
        }
    }
    match out.len() {
        0 => Formula::False,
        1 => out.pop().unwrap(),
        _ => Formula::Or(out),
    }
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    match (&a, &b) {
        (Formula::True, _) => b,
        (Formula::False, _) | (_, Formula::True) => Formula::True,
        (_, Formula::False) => not(a),
        _ => Formula::Implies(Box::new(a), Box::new(b)),
    }
}

pub fn iff(a: Formula, b: Formula) -> Formula {
    match (&a, &b) {
        (Formula::True, _) => b,
        (_, Formula::True) => a,
        (Formula::False, _) => not(b),
        (_, Formula::False) => not(a),
        _ => Formula::Iff(Box::new(a), Box::new(b)),
    }
}

pub fn xor(a: Formula, b: Formula) -> Formula {
    match (&a, &b) {
        (Formula::False, _) => b,
        (_, Formula::False) => a,
        (Formula::True, _) => not(b),
        (_, Formula::True) => not(a),
        _ => Formula::Xor(Box::new(a), Box::new(b)),
    }
}

/// Left-nested exclusive disjunction; false when empty.
pub fn xor_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
    fs.into_iter().fold(Formula::False, xor)
}

pub fn forall(xs: &[&str], f: Formula) -> Formula {
    if xs.is_empty() {
        return f;
    }
    Formula::Forall(xs.iter().map(|x| x.to_string()).collect(), Box::new(f))
}

pub fn exists(xs: &[&str], f: Formula) -> Formula {
    if xs.is_empty() {
        return f;
    }
    Formula::Exists(xs.iter().map(|x| x.to_string()).collect(), Box::new(f))
}

impl Formula {
    /// Calls `f` on every atom.
    pub fn for_each_atom(&self, f: &mut dyn FnMut(&Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.for_each_atom(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.for_each_atom(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Xor(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| out.push(a.clone()));
        out
    }

    /// Rebuilds the formula with every atom replaced by `f(atom)`.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(a) => f(a),
            Formula::Not(g) => not(g.map_atoms(f)),
            Formula::And(gs) => and(gs.iter().map(|g| g.map_atoms(f)).collect::<Vec<_>>()),
            Formula::Or(gs) => or(gs.iter().map(|g| g.map_atoms(f)).collect::<Vec<_>>()),
            Formula::Implies(a, b) => implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Iff(a, b) => iff(a.map_atoms(f), b.map_atoms(f)),
            Formula::Xor(a, b) => xor(a.map_atoms(f), b.map_atoms(f)),
            Formula::Forall(xs, g) => Formula::Forall(xs.clone(), Box::new(g.map_atoms(f))),
            Formula::Exists(xs, g) => Formula::Exists(xs.clone(), Box::new(g.map_atoms(f))),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Not(g) => g.is_quantifier_free(),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Xor(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for t in a.terms() {
                    if !bound.contains(&t.var) {
                        out.insert(t.var.clone());
                    }
                }
            }
            Formula::Not(g) => g.collect_free(bound, out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.collect_free(bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Xor(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(xs, g) | Formula::Exists(xs, g) => {
                let k = bound.len();
                bound.extend(xs.iter().cloned());
                g.collect_free(bound, out);
                bound.truncate(k);
            }
        }
    }

    /// Every variable name occurring bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Atom(a) => {
                for t in a.terms() {
                    out.insert(t.var.clone());
                }
            }
            Formula::Forall(xs, _) | Formula::Exists(xs, _) => out.extend(xs.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal of subformulas.
    pub fn walk(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => g.walk(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.walk(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) | Formula::Xor(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Substitutes terms for free variables, composing successor chains.
    pub fn substitute(&self, map: &[(String, Term)]) -> Formula {
        match self {
            Formula::Forall(xs, g) | Formula::Exists(xs, g) => {
                let inner: Vec<(String, Term)> = map.iter().filter(|(v, _)| !xs.contains(v)).cloned().collect();
                let body = Box::new(g.substitute(&inner));
                if matches!(self, Formula::Forall(..)) {
                    Formula::Forall(xs.clone(), body)
                } else {
                    Formula::Exists(xs.clone(), body)
                }
            }
            _ if self.is_quantifier_free() => self.map_atoms(&mut |a| atom(a.map_terms(&mut |t| subst_term(t, map)))),
            Formula::Not(g) => Formula::Not(Box::new(g.substitute(map))),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Formula::Xor(a, b) => Formula::Xor(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            _ => unreachable!("leaves are quantifier-free"),
        }
    }

    /// Number of nodes, used for output-size assertions.
    pub fn size(&self) -> usize {
        let mut k = 0;
        self.walk(&mut |_| k += 1);
        k
    }
}

pub fn subst_term(t: &Term, map: &[(String, Term)]) -> Term {
    match map.iter().find(|(v, _)| v == &t.var) {
        Some((_, s)) => {
            let mut r = s.clone();
            r.sucs.extend(t.sucs.iter().copied());
            r
        }
        None => t.clone(),
    }
}

/// The vocabulary a sentence is interpreted over.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub kind: EncodingKind,
    pub d: usize,
    pub alphabet: Vec<String>,
}

impl Signature {
    pub fn new(kind: EncodingKind, d: usize, alphabet: &[&str]) -> Self {
        Signature { kind, d, alphabet: alphabet.iter().map(|s| s.to_string()).collect() }
    }

    pub fn pixel(d: usize, alphabet: &[&str]) -> Self {
        Self::new(EncodingKind::Pixel, d, alphabet)
    }

    pub fn coordinate(d: usize, alphabet: &[&str]) -> Self {
        Self::new(EncodingKind::Coordinate, d, alphabet)
    }

    /// Arity of the input relation Q_s.
    pub fn input_arity(&self) -> usize {
        match self.kind {
            EncodingKind::Pixel => 1,
            EncodingKind::Coordinate => self.d,
        }
    }

    /// The letter whose input relation is named `r`, if any.
    pub fn letter_of(&self, r: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| letter_relation(s) == r)
    }

    pub fn is_input(&self, r: &str) -> bool {
        self.letter_of(r).is_some()
    }
}

/// ∃R̄ φ over a picture signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EsoSentence {
    pub sig: Signature,
    pub guessed: Vec<(String, usize)>,
    pub body: Formula,
}

pub const KEYWORDS: &[&str] = &[
    "exists-rel",
    "forall",
    "exists",
    "and",
    "or",
    "not",
    "implies",
    "iff",
    "xor",
    "true",
    "false",
    "=",
    "<",
    "suc",
    "min",
    "max",
];

/// Whether `s` is usable as a variable or relation name.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && !s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ';')
        && !s.chars().next().unwrap().is_ascii_digit()
        && !KEYWORDS.contains(&s)
        && !is_indexed_keyword(s)
}

fn is_indexed_keyword(s: &str) -> bool {
    ["suc_", "min_", "max_"]
        .iter()
        .any(|p| s.strip_prefix(p).is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit())))
}

impl EsoSentence {
    /// Validates symbols, arities, successor indices and closedness.
    pub fn new(sig: Signature, guessed: Vec<(String, usize)>, body: Formula) -> Result<Self> {
        let s = EsoSentence { sig, guessed, body };
        s.validate()?;
        Ok(s)
    }

    pub fn arity_of(&self, r: &str) -> Option<usize> {
        if self.sig.is_input(r) {
            return Some(self.sig.input_arity());
        }
        self.guessed.iter().find(|(g, _)| g == r).map(|&(_, k)| k)
    }

    pub fn is_guessed(&self, r: &str) -> bool {
        self.guessed.iter().any(|(g, _)| g == r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Sentence(m));
        for (i, (g, k)) in self.guessed.iter().enumerate() {
            if !is_identifier(g) {
                return bad(format!("invalid relation name {g:?}"));
            }
            if self.sig.is_input(g) {
                return bad(format!("guessed symbol {g} clashes with an input symbol"));
            }
            if self.guessed[..i].iter().any(|(h, _)| h == g) {
                return bad(format!("guessed symbol {g} declared twice"));
            }
            if *k > 8 {
                return bad(format!("arity {k} of {g} is unreasonably large"));
            }
        }
        let pixel = self.sig.kind == EncodingKind::Pixel;
        let mut err = None;
        self.body.for_each_atom(&mut |a| {
            if err.is_some() {
                return;
            }
            for t in a.terms() {
                for &i in &t.sucs {
                    if pixel && (i == 0 || i > self.sig.d) {
                        err = Some(format!("suc index {i} invalid in a pixel signature of dimension {}", self.sig.d));
                    }
                    if !pixel && i != 0 {
                        err = Some("indexed successors are pixel-only".to_string());
                    }
                }
            }
            match a {
                Atom::Rel(r, ts) => match self.arity_of(r) {
                    None => err = Some(format!("unknown symbol {r}")),
                    Some(k) if k != ts.len() => err = Some(format!("{r} has arity {k}, applied to {}", ts.len())),
                    _ => {}
                },
                Atom::Eq(..) | Atom::Lt(..) | Atom::Min(_) | Atom::Max(_) if pixel => {
                    err = Some("=, <, min and max belong to the coordinate signature".to_string())
                }
                Atom::MinI(i, _) | Atom::MaxI(i, _) if !pixel || *i == 0 || *i > self.sig.d => {
                    err = Some(format!("min_{i}/max_{i} not available in this signature"))
                }
                _ => {}
            }
        });
        if let Some(m) = err {
            return bad(m);
        }
        let free = self.body.free_vars();
        if !free.is_empty() {
            return bad(format!("free variables {free:?}"));
        }
        Ok(())
    }

    /// Same signature, guessed symbols and body replaced.
    pub fn with_body(&self, guessed: Vec<(String, usize)>, body: Formula) -> Result<EsoSentence> {
        EsoSentence::new(self.sig.clone(), guessed, body)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_formula(self))
    }
}

impl fmt::Display for EsoSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render::render_sentence(self))
    }
}
