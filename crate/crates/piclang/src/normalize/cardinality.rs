//! Boolean combinations of threshold sentences ∃^{≥k}x ψ(x), and their
//! translation into ESO(∀¹, arity 1) over pixel structures with counters
//! U^{=0}..U^{=k−1}, U^{≥k} accumulated in lexicographic order.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{and, atom, implies, not, or, rel, Atom, EsoSentence, Formula, Signature, Term};
use crate::model_check::eval_fo;
use crate::normalize::Fresh;
use crate::picture::{pixel_structure, EncodingKind, Picture};

/// Largest threshold accepted by [`cardinality_to_monadic`].
pub const MAX_THRESHOLD: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum CardinalityFormula {
    /// At least `k` elements `var` satisfy the quantifier-free `psi`.
    AtLeast {
        k: usize,
        var: String,
        psi: Formula,
    },
    Const(bool),
    Not(Box<CardinalityFormula>),
    And(Vec<CardinalityFormula>),
    Or(Vec<CardinalityFormula>),
}

impl CardinalityFormula {
    pub fn at_least(k: usize, var: &str, psi: Formula) -> Self {
        CardinalityFormula::AtLeast { k, var: var.to_string(), psi }
    }

    fn literals<'a>(&'a self, out: &mut Vec<(usize, &'a str, &'a Formula)>) {
        match self {
            CardinalityFormula::AtLeast { k, var, psi } => out.push((*k, var, psi)),
            CardinalityFormula::Const(_) => {}
            CardinalityFormula::Not(g) => g.literals(out),
            CardinalityFormula::And(gs) | CardinalityFormula::Or(gs) => gs.iter().for_each(|g| g.literals(out)),
        }
    }

    /// Replaces the j-th literal (in traversal order) by `lit(j)`.
    fn to_formula(&self, next: &mut usize, lit: &dyn Fn(usize) -> Formula) -> Formula {
        match self {
            CardinalityFormula::AtLeast { .. } => {
                *next += 1;
                lit(*next - 1)
            }
            CardinalityFormula::Const(b) => Formula::from(*b),
            CardinalityFormula::Not(g) => not(g.to_formula(next, lit)),
            CardinalityFormula::And(gs) => and(gs.iter().map(|g| g.to_formula(next, lit)).collect::<Vec<_>>()),
            CardinalityFormula::Or(gs) => or(gs.iter().map(|g| g.to_formula(next, lit)).collect::<Vec<_>>()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CardinalitySentence {
    pub sig: Signature,
    pub body: CardinalityFormula,
}

impl CardinalitySentence {
    pub fn new(sig: Signature, body: CardinalityFormula) -> Result<Self> {
        if sig.kind != EncodingKind::Pixel {
            return Err(Error::Sentence("cardinality sentences are read over pixel structures".into()));
        }
        let mut lits = Vec::new();
        body.literals(&mut lits);
        for (k, var, psi) in lits {
            if k == 0 {
                return Err(Error::Sentence("thresholds start at 1".into()));
            }
            if !psi.is_quantifier_free() {
                return Err(Error::Sentence(format!("ψ of a threshold literal must be quantifier-free: {psi}")));
            }
            let free = psi.free_vars();
            if free.iter().any(|v| v != var) {
                return Err(Error::Sentence(format!("ψ may only use its variable {var}, found {free:?}")));
            }
            // reuse the sentence validator on ∀var ψ
            EsoSentence::new(sig.clone(), vec![], Formula::Forall(vec![var.to_string()], Box::new(psi.clone())))?;
        }
        Ok(CardinalitySentence { sig, body })
    }

    /// Parses `(at-least k (x) ψ)` literals combined with `and`, `or`, `not`, `(true)`, `(false)`.
    pub fn parse(text: &str, sig: &Signature) -> Result<Self> {
        Self::new(sig.clone(), crate::logic::parse::parse_cardinality(text, sig)?)
    }

    /// Direct evaluation by counting cells.
    pub fn holds(&self, p: &Picture) -> Result<bool> {
        let q = p.with_alphabet(self.sig.alphabet.clone())?;
        let st = pixel_structure(&q);
        let mut lits = Vec::new();
        self.body.literals(&mut lits);
        let mut truth = Vec::new();
        for (k, var, psi) in lits {
            let mut count = 0;
            for b in 1..=st.size {
                count += eval_fo(&st, psi, &BTreeMap::from([(var.to_string(), b)]))? as usize;
            }
            truth.push(count >= k);
        }
        let f = self.body.to_formula(&mut 0, &|j| Formula::from(truth[j]));
        Ok(f == Formula::True)
    }
}

fn x() -> Term {
    Term::var("x")
}

fn max_lex(d: usize) -> Formula {
    and((1..=d).map(|i| atom(Atom::MaxI(i, x()))).collect::<Vec<_>>())
}

fn min_lex(d: usize) -> Formula {
    and((1..=d).map(|i| atom(Atom::MinI(i, x()))).collect::<Vec<_>>())
}

/// ¬max_lex(x) → step(suc_lex(x)), with suc_lex eliminated by cases on the
/// smallest dimension i whose later components are all maximal.
fn lex_step(d: usize, step: &dyn Fn(&Term) -> Formula) -> Formula {
    and((1..=d)
        .map(|i| {
            let guard = and(std::iter::once(not(atom(Atom::MaxI(i, x()))))
                .chain((i + 1..=d).map(|j| atom(Atom::MaxI(j, x()))))
                .collect::<Vec<_>>());
            let mut y = x();
            for j in (i..=d).rev() {
                y = y.suc(j);
            }
            implies(guard, step(&y))
        })
        .collect::<Vec<_>>())
}

/// The counter construction: one family of monadic counters per threshold
/// literal, pinned down by disjointness, initialization, propagation along
/// the lexicographic successor and saturation; the boolean combination is
/// then read at the lexicographically last cell.
pub fn cardinality_to_monadic(c: &CardinalitySentence, d: usize) -> Result<EsoSentence> {
    if d != c.sig.d {
        return Err(Error::Contract(format!("dimension {d} does not match the signature ({})", c.sig.d)));
    }
    let mut lits = Vec::new();
    c.body.literals(&mut lits);
    let probe = EsoSentence { sig: c.sig.clone(), guessed: vec![], body: Formula::True };
    let mut fresh = Fresh::for_sentence(&probe);
    let mut guessed = Vec::new();
    let mut clauses = Vec::new();
    let mut ge = Vec::new();
    for (t, &(k, var, psi)) in lits.iter().enumerate() {
        if k > MAX_THRESHOLD {
            return Err(Error::Cap(format!("threshold {k} exceeds the bound {MAX_THRESHOLD}")));
        }
        let psi = psi.substitute(&[(var.to_string(), x())]);
        let psi_at = |y: &Term| psi.substitute(&[("x".to_string(), y.clone())]);
        let eq: Vec<String> = (0..k).map(|j| fresh.name(&format!("U{}_eq{j}", t + 1))).collect();
        let top = fresh.name(&format!("U{}_ge{k}", t + 1));
        guessed.extend(eq.iter().chain([&top]).map(|g| (g.clone(), 1)));
        let target = |j: usize| if j < k { eq[j].clone() } else { top.clone() };
        let u = |r: &str, y: &Term| rel(r, vec![y.clone()]);
        // (1) pairwise disjointness
        for i in 0..=k {
            for j in i + 1..=k {
                clauses.push(or([not(u(&target(i), &x())), not(u(&target(j), &x()))]));
            }
        }
        // (2), (3) at the first cell
        clauses.push(implies(and([min_lex(d), not(psi.clone())]), u(&target(0), &x())));
        clauses.push(implies(and([min_lex(d), psi.clone()]), u(&target(1), &x())));
        // (4)-(7) along the lexicographic successor
        clauses.push(lex_step(d, &|y| {
            let mut fs = Vec::new();
            for (i, e) in eq.iter().enumerate().take(k) {
                fs.push(implies(and([u(e, &x()), not(psi_at(y))]), u(e, y)));
                fs.push(implies(and([u(e, &x()), psi_at(y)]), u(&target(i + 1), y)));
            }
            fs.push(implies(u(&top, &x()), u(&top, y)));
            and(fs)
        }));
        ge.push(top);
    }
    let verdict = c.body.to_formula(&mut 0, &|j| rel(&ge[j], vec![x()]));
    clauses.push(implies(max_lex(d), verdict));
    EsoSentence::new(c.sig.clone(), guessed, Formula::Forall(vec!["x".into()], Box::new(and(clauses))))
}
