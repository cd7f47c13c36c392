//! ESO(var d) → ESO(∀^d) on coordinate structures: every quantified subformula
//! gets a defining relation, and each ∀F∃z θ conjunct is replaced by a
//! cumulative witness relation W(F,z) ⇔ ∃z′ ≤ z θ(F,z′).

use crate::error::{Error, Result};
use crate::logic::{and, atom, iff, implies, not, or, Atom, EsoSentence, Formula, Term};
use crate::normalize::Fresh;
use crate::picture::EncodingKind;

struct Skolem {
    fresh: Fresh,
    guessed: Vec<(String, usize)>,
    /// Quantifier-free conjuncts of the final ∀-matrix.
    clauses: Vec<Formula>,
    /// Variable order used for relation arguments.
    order: Vec<String>,
    defs: usize,
    witnesses: usize,
}

impl Skolem {
    fn sorted(&self, vars: impl IntoIterator<Item = String>) -> Vec<String> {
        let mut v: Vec<String> = vars.into_iter().collect();
        v.sort_by_key(|x| self.order.iter().position(|y| y == x));
        v.dedup();
        v
    }

    fn new_rel(&mut self, base: &str, args: &[String]) -> Formula {
        let r = self.fresh.name(base);
        self.guessed.push((r.clone(), args.len()));
        Formula::Atom(Atom::Rel(r, args.iter().map(|x| Term::var(x)).collect()))
    }

    /// ∀F ∃z θ via W: min(z) → (W ↔ θ), ¬max(z) → (W(suc z) ↔ θ(suc z) ∨ W), max(z) → W.
    fn witness(&mut self, z: &str, theta: Formula) {
        let f = self.sorted(theta.free_vars().into_iter().filter(|v| v != z));
        let mut args = f.clone();
        args.push(z.to_string());
        self.witnesses += 1;
        let w = self.new_rel(&format!("W{}", self.witnesses), &args);
        let zt = Term::var(z);
        let next = vec![(z.to_string(), zt.clone().suc(0))];
        let w_next = w.substitute(&next);
        let theta_next = theta.substitute(&next);
        self.clauses.push(implies(atom(Atom::Min(zt.clone())), iff(w.clone(), theta)));
        self.clauses.push(implies(not(atom(Atom::Max(zt.clone()))), iff(w_next, or([theta_next, w.clone()]))));
        self.clauses.push(implies(atom(Atom::Max(zt)), w));
    }

    /// Replaces every quantified subformula by an atom over its free variables,
    /// emitting the two halves of its definition.
    fn flatten(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(g) => not(self.flatten(g)),
            Formula::And(gs) => and(gs.iter().map(|g| self.flatten(g)).collect::<Vec<_>>()),
            Formula::Or(gs) => or(gs.iter().map(|g| self.flatten(g)).collect::<Vec<_>>()),
            Formula::Implies(a, b) => implies(self.flatten(a), self.flatten(b)),
            Formula::Iff(a, b) => iff(self.flatten(a), self.flatten(b)),
            Formula::Xor(a, b) => crate::logic::xor(self.flatten(a), self.flatten(b)),
            Formula::Forall(zs, g) | Formula::Exists(zs, g) => {
                let universal = matches!(f, Formula::Forall(..));
                let (z, inner) = peel(zs, g, universal);
                let body = self.flatten(&inner);
                let free = self.sorted(f.free_vars());
                self.defs += 1;
                let r = self.new_rel(&format!("R{}", self.defs), &free);
                if universal {
                    // R → ∀z body, and ∀z body → R i.e. ∃z (¬body ∨ R)
                    self.clauses.push(implies(r.clone(), body.clone()));
                    self.witness(&z, or([not(body), r.clone()]));
                } else {
                    self.witness(&z, or([not(r.clone()), body.clone()]));
                    self.clauses.push(implies(body, r.clone()));
                }
                r
            }
        }
    }

    /// Asserts ∀(bound) f.
    fn assert(&mut self, f: &Formula) {
        match f {
            Formula::And(gs) => gs.iter().for_each(|g| self.assert(g)),
            Formula::Forall(_, g) => self.assert(g),
            Formula::Exists(zs, g) => {
                let (z, inner) = peel(zs, g, false);
                let theta = self.flatten(&inner);
                self.witness(&z, theta);
            }
            g => {
                let h = self.flatten(g);
                self.clauses.push(h);
            }
        }
    }
}

/// Splits `Q z1..zk g` into `z1` and `Q z2..zk g`.
fn peel(zs: &[String], g: &Formula, universal: bool) -> (String, Formula) {
    let rest = zs[1..].to_vec();
    let inner = if rest.is_empty() {
        g.clone()
    } else if universal {
        Formula::Forall(rest, Box::new(g.clone()))
    } else {
        Formula::Exists(rest, Box::new(g.clone()))
    };
    (zs[0].clone(), inner)
}

/// Equivalent sentence whose body is ∀ over the original variable names
/// followed by a quantifier-free matrix; at most `d` variables are allowed.
///
/// Already prenex-universal bodies are returned unchanged.
pub fn skolemize_universal(s: &EsoSentence, d: usize) -> Result<EsoSentence> {
    if s.sig.kind != EncodingKind::Coordinate {
        return Err(Error::Fragment("Skolemization needs the order of a coordinate signature".into()));
    }
    let vars = s.body.all_vars();
    if vars.len() > d {
        return Err(Error::Fragment(format!("{} variables {:?}, at most {d} allowed", vars.len(), vars)));
    }
    if crate::logic::prenex_universal(&s.body).is_some() {
        return Ok(s.clone());
    }
    // argument order: first binding occurrence
    let mut order = Vec::new();
    s.body.walk(&mut |f| {
        if let Formula::Forall(xs, _) | Formula::Exists(xs, _) = f {
            for x in xs {
                if !order.contains(x) {
                    order.push(x.clone());
                }
            }
        }
    });
    let mut sk = Skolem {
        fresh: Fresh::for_sentence(s),
        guessed: s.guessed.clone(),
        clauses: Vec::new(),
        order,
        defs: 0,
        witnesses: 0,
    };
    sk.assert(&s.body);
    let matrix = and(std::mem::take(&mut sk.clauses));
    let prefix = sk.order.clone();
    let body = if prefix.is_empty() { matrix } else { Formula::Forall(prefix, Box::new(matrix)) };
    s.with_body(sk.guessed, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{classify_fragment, parse_sentence, Signature};
    use crate::model_check::check_eso;
    use crate::picture::{coordinate_structure, Picture};

    fn agree(a: &EsoSentence, b: &EsoSentence, max_n: usize) {
        let al = a.sig.alphabet.clone();
        for n in 1..=max_n {
            for p in Picture::enumerate(a.sig.d, n, &al) {
                let st = coordinate_structure(&p);
                assert_eq!(check_eso(&st, a).unwrap(), check_eso(&st, b).unwrap(), "{a}\n{b}\non {}", p.inline());
            }
        }
    }

    #[test]
    fn worked_example() {
        let sig = Signature::coordinate(2, &["0", "1"]);
        let s = parse_sentence(
            "(exists-rel ((U 2) (D 2)) (exists (x) (or (forall (y) (U x y)) (exists (y) (D x y)))))",
            &sig,
        )
        .unwrap();
        let t = skolemize_universal(&s, 2).unwrap();
        let f = classify_fragment(&t);
        assert!(f.prenex_universal && f.prefix_len == 2, "{t}");
        let names: Vec<&str> = t.guessed.iter().map(|(g, _)| g.as_str()).collect();
        assert_eq!(names, ["U", "D", "R1", "W1", "R2", "W2", "W3"]);
        assert_eq!(t.arity_of("W3"), Some(1));
        agree(&s, &t, 2);
    }

    #[test]
    fn no_strict_successor_of_max() {
        let sig = Signature::coordinate(1, &["a"]);
        let s = parse_sentence("(forall (x) (exists (y) (< x y)))", &sig).unwrap();
        let t = skolemize_universal(&s, 2).unwrap();
        for n in 1..=4 {
            let p = Picture::new(1, n, vec!["a".into()], &vec!["a"; n]).unwrap();
            assert!(!check_eso(&coordinate_structure(&p), &t).unwrap());
        }
    }

    #[test]
    fn universal_input_is_a_fixpoint() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        let s = parse_sentence("(exists-rel ((R 2)) (forall (x y) (implies (R x y) (Q_a x))))", &sig).unwrap();
        assert_eq!(skolemize_universal(&s, 2).unwrap(), s);
    }

    #[test]
    fn nested_alternation_and_reused_names() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        let s = parse_sentence(
            "(and (forall (x) (exists (y) (and (< x y) (Q_a y)))) (exists (x) (and (Q_b x) (forall (y) (implies (< y x) (not (exists (x) (and (= x y) (Q_b x)))))))))",
            &sig,
        )
        .unwrap();
        let t = skolemize_universal(&s, 2).unwrap();
        assert!(classify_fragment(&t).prenex_universal);
        agree(&s, &t, 4);
    }

    #[test]
    fn too_many_variables() {
        let sig = Signature::coordinate(1, &["a"]);
        let s = parse_sentence("(forall (x y z) (or (= x y) (= y z)))", &sig).unwrap();
        assert!(matches!(skolemize_universal(&s, 2), Err(Error::Fragment(_))));
    }
}
