use crate::error::{Error, Result};
use crate::logic::ast::{Atom, EsoSentence, Formula, Term};
use crate::picture::EncodingKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentDescriptor {
    /// Distinct first-order variable names.
    pub var_count: usize,
    /// Body is ∀x̄ followed by a quantifier-free matrix.
    pub prenex_universal: bool,
    /// Length of the universal prefix when `prenex_universal`, else 0.
    pub prefix_len: usize,
    pub max_arity: usize,
    pub sorted: bool,
}

/// Splits a body into its leading universal variables and the rest.
pub fn universal_prefix(f: &Formula) -> (Vec<String>, &Formula) {
    let mut xs = Vec::new();
    let mut g = f;
    while let Formula::Forall(vs, inner) = g {
        xs.extend(vs.iter().cloned());
        g = inner;
    }
    (xs, g)
}

/// The prefix variables and matrix of a prenex-universal body.
pub fn prenex_universal(f: &Formula) -> Option<(Vec<String>, &Formula)> {
    let (xs, m) = universal_prefix(f);
    let distinct = xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x));
    (m.is_quantifier_free() && distinct).then_some((xs, m))
}

pub fn classify_fragment(s: &EsoSentence) -> FragmentDescriptor {
    let var_count = s.body.all_vars().len();
    let (prenex, prefix_len) = match prenex_universal(&s.body) {
        Some((xs, _)) => (true, xs.len()),
        None => (false, 0),
    };
    let max_arity = s.guessed.iter().map(|&(_, k)| k).max().unwrap_or(0);
    let sorted = s.sig.kind == EncodingKind::Coordinate
        && prenex
        && is_sorted(s, s.sig.input_arity(), prefix_len).unwrap_or(false);
    FragmentDescriptor { var_count, prenex_universal: prenex, prefix_len, max_arity, sorted }
}

/// Membership in the sorted fragment with input arity `k` and `d` universal variables.
pub fn is_sorted(s: &EsoSentence, k: usize, d: usize) -> Result<bool> {
    if s.sig.kind != EncodingKind::Coordinate {
        return Err(Error::Fragment("the sorted fragment is defined over coordinate signatures".into()));
    }
    let Some((xs, matrix)) = prenex_universal(&s.body) else {
        return Ok(false);
    };
    if xs.len() != d || k > d || s.guessed.iter().any(|&(_, a)| a != d) {
        return Ok(false);
    }
    let plain =
        |ts: &[Term], upto: usize| ts.len() == upto && ts.iter().zip(&xs).all(|(t, x)| t.is_var() && &t.var == x);
    let mut ok = true;
    matrix.for_each_atom(&mut |a| {
        ok &= match a {
            Atom::Rel(r, ts) if s.sig.is_input(r) => plain(ts, k),
            Atom::Rel(_, ts) => {
                ts.len() == d
                    && ts.iter().zip(&xs).all(|(t, x)| &t.var == x)
                    && ts.iter().map(Term::depth).sum::<usize>() <= 1
                    && ts.iter().all(|t| t.depth() <= 1)
            }
            Atom::Min(t) | Atom::Max(t) => t.is_var(),
            _ => false,
        };
    });
    Ok(ok)
}
