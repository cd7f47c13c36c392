//! First-order evaluation, ESO checking, exhaustive language equivalence and
//! the Mirror/Sym membership oracles.

mod compiled;
mod equiv;
mod ground;
mod oracles;

use std::collections::BTreeMap;

pub use equiv::{equivalent_up_to, Counterexample, LanguageDef, DEFAULT_PICTURE_CAP};
pub use oracles::{mirror_member, sym_member, sym_orbits};

use crate::error::{Error, Result};
use crate::logic::{EsoSentence, Formula};
use crate::picture::{coords, FiniteStructure, Relation};
use compiled::Compiled;

/// Default bound on Σ m^r over guessed symbols for the enumerating checker.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// How the guessed relations are searched.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Every interpretation as a bit-vector, in increasing numeric order;
    /// fails when Σ m^r exceeds `cap`.
    Enumerate { cap: usize },
    /// Grounding over the domain followed by SAT solving; exact, no cap.
    #[default]
    Ground,
}

/// Tarski semantics of `f` under `env`.
pub fn eval_fo(s: &FiniteStructure, f: &Formula, env: &BTreeMap<String, usize>) -> Result<bool> {
    let free: Vec<String> = env.keys().cloned().collect();
    for (x, &e) in env {
        if e == 0 || e > s.size {
            return Err(Error::Eval(format!("{x} ↦ {e} is outside the domain")));
        }
    }
    let c = Compiled::new(s, &[], &free, f)?;
    let mut e: Vec<usize> = env.values().copied().collect();
    e.resize(c.slots.max(1), 0);
    Ok(c.eval(&c.root, &mut e, &[]))
}

/// Evaluates `f` in `s` expanded by the given relations.
pub fn eval_with_relations(
    s: &FiniteStructure,
    extra: &BTreeMap<String, Relation>,
    f: &Formula,
    env: &BTreeMap<String, usize>,
) -> Result<bool> {
    let mut t = s.clone();
    for (k, r) in extra {
        t.relations.insert(k.clone(), r.clone());
    }
    eval_fo(&t, f, env)
}

pub fn check_eso(s: &FiniteStructure, sent: &EsoSentence) -> Result<bool> {
    check_eso_with(s, sent, Strategy::Ground)
}

pub fn check_eso_with(s: &FiniteStructure, sent: &EsoSentence, strategy: Strategy) -> Result<bool> {
    Ok(eso_witness(s, sent, strategy)?.is_some())
}

/// Interpretations of the guessed symbols making the body true, if any.
///
/// With [`Strategy::Enumerate`] this is the first satisfying interpretation in enumeration order.
pub fn eso_witness(
    s: &FiniteStructure,
    sent: &EsoSentence,
    strategy: Strategy,
) -> Result<Option<BTreeMap<String, Relation>>> {
    let c = Compiled::new(s, &sent.guessed, &[], &sent.body)?;
    let bits = match strategy {
        Strategy::Enumerate { cap } => {
            let mut total = 0usize;
            for (k, (name, _)) in sent.guessed.iter().enumerate() {
                let size = s.size.checked_pow(c.guess_arity[k] as u32).unwrap_or(usize::MAX);
                total = total.saturating_add(size);
                if total > cap {
                    return Err(Error::Cap(format!(
                        "guessed symbol {name} raises the search space to 2^{total} interpretations (cap 2^{cap})"
                    )));
                }
            }
            enumerate(&c)
        }
        Strategy::Ground => {
            let found = ground::solve(&c);
            if let Some(g) = &found {
                let mut env = vec![0; c.slots.max(1)];
                if !c.eval(&c.root, &mut env, g) {
                    return Err(Error::Eval("internal error: SAT model does not satisfy the sentence".into()));
                }
            }
            found
        }
    };
    Ok(bits.map(|g| {
        sent.guessed
            .iter()
            .enumerate()
            .map(|(k, (name, arity))| {
                let off = c.guess_offset[k];
                let len = s.size.pow(*arity as u32);
                (name.clone(), Relation { arity: *arity, bits: g[off..off + len].to_vec() })
            })
            .collect()
    }))
}

fn enumerate(c: &Compiled) -> Option<Vec<bool>> {
    let n = c.guess_bits;
    let mut env = vec![0; c.slots.max(1)];
    let mut g = vec![false; n];
    for code in 0u64..(1u64 << n) {
        for (i, b) in g.iter_mut().enumerate() {
            *b = (code >> i) & 1 == 1;
        }
        if c.eval(&c.root, &mut env, &g) {
            return Some(g);
        }
    }
    None
}

/// Tuples of a witness relation, 1-based, for display.
pub fn relation_tuples(m: usize, r: &Relation) -> Vec<Vec<usize>> {
    (0..r.bits.len()).filter(|&i| r.bits[i]).map(|i| coords(r.arity, m, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::Strategy as Search;
    use super::*;
    use crate::logic::{parse_formula, parse_sentence, Signature};
    use crate::picture::{coordinate_structure, make_picture, pixel_structure, Picture};
    use proptest::prelude::*;
    use proptest::strategy::Strategy;

    const ENUM: Search = Search::Enumerate { cap: DEFAULT_ENUMERATION_CAP };

    #[test]
    fn first_order_examples() {
        let ab = make_picture(1, 2, &["a", "b"], &["a", "b"]).unwrap();
        let sig = Signature::pixel(1, &["a", "b"]);
        let px = pixel_structure(&ab);
        let env = BTreeMap::new();
        let f = parse_formula("(forall (x) (or (Q_a x) (Q_b x)))", &sig, &[]).unwrap();
        assert!(eval_fo(&px, &f, &env).unwrap());
        let f = parse_formula("(forall (x) (Q_a x))", &sig, &[]).unwrap();
        assert!(!eval_fo(&px, &f, &env).unwrap());
        let csig = Signature::coordinate(1, &["a", "b"]);
        let f = parse_formula("(forall (x) (implies (min x) (Q_a x)))", &csig, &[]).unwrap();
        assert!(eval_fo(&coordinate_structure(&ab), &f, &env).unwrap());
        let open = parse_formula("(Q_a x)", &sig, &[]).unwrap();
        assert!(eval_fo(&px, &open, &env).is_err());
        assert!(eval_fo(&px, &open, &BTreeMap::from([("x".to_string(), 1)])).unwrap());
    }

    #[test]
    fn eso_examples() {
        let sig = Signature::pixel(1, &["a", "b"]);
        let px = pixel_structure(&make_picture(1, 3, &["a", "b"], &["a", "b", "b"]).unwrap());
        let all = parse_sentence("(exists-rel ((U 1)) (forall (x) (U x)))", &sig).unwrap();
        let contra = parse_sentence("(exists-rel ((U 1)) (forall (x) (and (U x) (not (U x)))))", &sig).unwrap();
        for st in [ENUM, Search::Ground] {
            assert!(check_eso_with(&px, &all, st).unwrap());
            assert!(!check_eso_with(&px, &contra, st).unwrap());
        }
        let w = eso_witness(&px, &all, ENUM).unwrap().unwrap();
        assert_eq!(w["U"].bits, vec![true; 3]);
    }

    #[test]
    fn enumeration_cap_names_the_symbol() {
        let sig = Signature::coordinate(1, &["a"]);
        let s = parse_sentence("(exists-rel ((A 1) (B 2)) (forall (x) (A x)))", &sig).unwrap();
        let p = make_picture(1, 5, &["a"], &["a"; 5]).unwrap();
        let e = check_eso_with(&coordinate_structure(&p), &s, ENUM).unwrap_err();
        assert!(matches!(&e, Error::Cap(m) if m.contains("symbol B")), "{e}");
        assert!(check_eso(&coordinate_structure(&p), &s).unwrap());
    }

    #[test]
    fn mirror_sentence_counts() {
        let sig = Signature::coordinate(2, &["0", "1"]);
        let s =
            parse_sentence("(forall (x y) (and (iff (Q_0 x y) (Q_0 y x)) (iff (Q_1 x y) (Q_1 y x))))", &sig).unwrap();
        let al = ["0".to_string(), "1".to_string()];
        let pics: Vec<Picture> = Picture::enumerate(2, 2, &al).collect();
        assert_eq!(pics.len(), 16);
        let mut yes = 0;
        for p in &pics {
            let v = check_eso(&coordinate_structure(p), &s).unwrap();
            assert_eq!(v, mirror_member(p).unwrap());
            yes += v as usize;
        }
        assert_eq!(yes, 8);
    }

    #[test]
    fn unused_symbols_do_not_change_verdicts() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        let s = parse_sentence("(exists-rel ((R 1)) (forall (x) (iff (R x) (Q_a x))))", &sig).unwrap();
        let t = parse_sentence("(exists-rel ((R 1) (Z 2)) (forall (x) (iff (R x) (Q_a x))))", &sig).unwrap();
        let al = ["a".to_string(), "b".to_string()];
        for p in Picture::enumerate(1, 3, &al) {
            let st = coordinate_structure(&p);
            assert_eq!(check_eso(&st, &s).unwrap(), check_eso(&st, &t).unwrap());
        }
    }

    /// Random one-variable-pair formulas over a word signature with one guessed binary symbol.
    fn random_body() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("(R x y)".to_string()),
            Just("(R y x)".to_string()),
            Just("(R (suc x) y)".to_string()),
            Just("(Q_a x)".to_string()),
            Just("(Q_a y)".to_string()),
            Just("(< x y)".to_string()),
            Just("(= x y)".to_string()),
            Just("(min x)".to_string()),
            Just("(max y)".to_string()),
        ];
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| format!("(not {a})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(and {a} {b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(or {a} {b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("(iff {a} {b})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("(xor {a} {b})")),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn grounding_agrees_with_enumeration(body in random_body(), q in prop::sample::select(vec!["forall (x y)", "forall (x) (exists (y)"])) {
            let sig = Signature::coordinate(1, &["a", "b"]);
            let text = if q.contains("exists") {
                format!("(exists-rel ((R 2)) ({q} {body})))")
            } else {
                format!("(exists-rel ((R 2)) ({q} {body}))")
            };
            let s = parse_sentence(&text, &sig).unwrap();
            let al = ["a".to_string(), "b".to_string()];
            for n in 1..=3 {
                for p in Picture::enumerate(1, n, &al) {
                    let st = coordinate_structure(&p);
                    prop_assert_eq!(check_eso_with(&st, &s, ENUM).unwrap(), check_eso(&st, &s).unwrap(), "{} on {}", text, p);
                }
            }
        }

        #[test]
        fn no_guesses_means_first_order(body in random_body()) {
            let sig = Signature::coordinate(1, &["a", "b"]);
            let fo = body.replace("(R x y)", "(< y x)").replace("(R y x)", "(= y x)").replace("(R (suc x) y)", "(= (suc x) y)");
            let text = format!("(forall (x y) {fo})");
            let s = parse_sentence(&text, &sig).unwrap();
            let al = ["a".to_string(), "b".to_string()];
            for p in Picture::enumerate(1, 3, &al) {
                let st = coordinate_structure(&p);
                prop_assert_eq!(check_eso(&st, &s).unwrap(), eval_fo(&st, &s.body, &BTreeMap::new()).unwrap());
            }
        }
    }
}
