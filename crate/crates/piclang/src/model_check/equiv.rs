//! Uniform membership over the three formalisms and exhaustive equivalence.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::automaton::CellularAutomaton;
use crate::error::{Error, Result};
use crate::logic::EsoSentence;
use crate::model_check::{check_eso, mirror_member, sym_member};
use crate::picture::{encode, Picture};
use crate::tiling::{recognizes, TilingSystem};

/// Default bound on the number of pictures of one side checked by [`equivalent_up_to`].
pub const DEFAULT_PICTURE_CAP: u128 = 1 << 20;

type Predicate = Arc<dyn Fn(&Picture) -> Result<bool> + Send + Sync>;

/// A picture language given by any of the supported definitions.
#[derive(Clone)]
pub enum LanguageDef {
    Tiling(TilingSystem),
    /// Acceptance in time c·n + c′.
    Automaton {
        automaton: CellularAutomaton,
        c: usize,
        c_prime: i64,
    },
    /// Interpreted over the encoding named by the sentence signature.
    Sentence(EsoSentence),
    Mirror,
    Sym,
    Pictures(Vec<Picture>),
    Custom(String, Predicate),
}

impl fmt::Debug for LanguageDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageDef::Tiling(_) => write!(f, "Tiling"),
            LanguageDef::Automaton { c, c_prime, .. } => write!(f, "Automaton(time {c}·n{c_prime:+})"),
            LanguageDef::Sentence(s) => write!(f, "Sentence({:?})", s.sig.kind),
            LanguageDef::Mirror => write!(f, "Mirror"),
            LanguageDef::Sym => write!(f, "Sym"),
            LanguageDef::Pictures(ps) => write!(f, "Pictures({})", ps.len()),
            LanguageDef::Custom(name, _) => write!(f, "Custom({name})"),
        }
    }
}

impl LanguageDef {
    /// Oracle by name: "mirror" or "sym".
    pub fn oracle(name: &str) -> Result<Self> {
        match name {
            "mirror" => Ok(LanguageDef::Mirror),
            "sym" => Ok(LanguageDef::Sym),
            _ => Err(Error::Format(format!("unknown oracle {name:?} (expected mirror or sym)"))),
        }
    }

    pub fn custom(name: &str, f: impl Fn(&Picture) -> Result<bool> + Send + Sync + 'static) -> Self {
        LanguageDef::Custom(name.to_string(), Arc::new(f))
    }

    pub fn member(&self, p: &Picture) -> Result<bool> {
        match self {
            LanguageDef::Tiling(ts) => recognizes(ts, p),
            LanguageDef::Automaton { automaton, c, c_prime } => automaton.accepts_linear(p, *c, *c_prime),
            LanguageDef::Sentence(s) => {
                if p.d() != s.sig.d {
                    return Err(Error::Contract(format!("{}-picture given to a sentence over d={}", p.d(), s.sig.d)));
                }
                let q = p.with_alphabet(s.sig.alphabet.clone())?;
                check_eso(&encode(&q, s.sig.kind), s)
            }
            LanguageDef::Mirror => mirror_member(p),
            LanguageDef::Sym => sym_member(p),
            LanguageDef::Pictures(ps) => Ok(ps.iter().any(|q| same_picture(p, q))),
            LanguageDef::Custom(_, f) => f(p),
        }
    }
}

fn same_picture(p: &Picture, q: &Picture) -> bool {
    p.d() == q.d()
        && p.n() == q.n()
        && p.cells().iter().zip(q.cells()).all(|(&a, &b)| p.alphabet()[a] == q.alphabet()[b])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub picture: Picture,
    pub verdict_a: bool,
    pub verdict_b: bool,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (a: {}, b: {})", self.picture.inline(), self.verdict_a, self.verdict_b)
    }
}

/// Compares `a` and `b` on every d-picture over `sigma` of side 1..=max_n and
/// returns the first disagreement in (side, lexicographic) order.
///
/// Sides are checked in parallel chunks; the reported counterexample does not
/// depend on scheduling.
pub fn equivalent_up_to(
    a: &LanguageDef,
    b: &LanguageDef,
    d: usize,
    sigma: &[String],
    max_n: usize,
    cap: u128,
) -> Result<Option<Counterexample>> {
    crate::picture::check_alphabet(sigma)?;
    for n in 1..=max_n {
        let total = Picture::count(d, n, sigma.len());
        if total > cap {
            return Err(Error::Cap(format!(
                "{}^{} pictures of side {n} exceed the cap {cap}",
                sigma.len(),
                n.pow(d as u32)
            )));
        }
        let found = (0..total as u64).into_par_iter().find_map_first(|code| {
            let p = Picture::nth(d, n, sigma, code as u128);
            let run = || -> Result<Option<Counterexample>> {
                let (va, vb) = (a.member(&p)?, b.member(&p)?);
                Ok((va != vb).then(|| Counterexample { picture: p.clone(), verdict_a: va, verdict_b: vb }))
            };
            run().transpose()
        });
        if let Some(r) = found {
            return r.map(Some);
        }
    }
    Ok(None)
}
