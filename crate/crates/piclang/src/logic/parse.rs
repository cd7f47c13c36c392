//! S-expression concrete syntax.
//!
//! ```text
//! sentence := "(exists-rel" "(" decl* ")" formula ")" | formula
//! decl     := "(" name arity ")"
//! formula  := "(forall" "(" var* ")" formula ")" | "(exists" "(" var* ")" formula ")"
//!           | "(and" formula+ ")" | "(or" formula+ ")" | "(not" formula ")"
//!           | "(implies" formula formula ")" | "(iff" formula formula ")" | "(xor" formula formula ")"
//!           | "(true)" | "(false)" | atom
//! atom     := "(" symbol term* ")" | "(=" term term ")" | "(<" term term ")"
//!           | "(min" term ")" | "(max" term ")" | "(min_i" term ")" | "(max_i" term ")"
//! term     := var | "(suc" term ")" | "(suc_i" term ")"
//! ```
//!
//! Input letters are written `Q_s`; `;` starts a comment running to the end of the line.

use crate::error::{Error, Result};
use crate::logic::ast::{is_identifier, Atom, EsoSentence, Formula, Signature, Term};
use crate::normalize::CardinalityFormula;

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Sexp {
    Sym(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err(p: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax { line: p.line, col: p.col, msg: msg.into() }
}

fn read(text: &str) -> Result<Sexp> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut done: Option<Sexp> = None;
    let (mut line, mut col) = (1, 0);
    let mut chars = text.chars().peekable();
    let finish = |e: Sexp, stack: &mut Vec<(Vec<Sexp>, Pos)>, done: &mut Option<Sexp>| -> Result<()> {
        match stack.last_mut() {
            Some((items, _)) => items.push(e),
            None if done.is_none() => *done = Some(e),
            None => return Err(err(e.pos(), "trailing content after the sentence")),
        }
        Ok(())
    };
    while let Some(c) = chars.next() {
        col += 1;
        let here = Pos { line, col };
        match c {
            '\n' => {
                line += 1;
                col = 0;
            }
            ';' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => stack.push((Vec::new(), here)),
            ')' => {
                let (items, p) = stack.pop().ok_or_else(|| err(here, "unbalanced ')'"))?;
                finish(Sexp::List(items, p), &mut stack, &mut done)?;
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = c.to_string();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                finish(Sexp::Sym(s, here), &mut stack, &mut done)?;
            }
        }
    }
    if let Some((_, p)) = stack.last() {
        return Err(err(*p, "unclosed '('"));
    }
    done.ok_or_else(|| err(Pos { line, col }, "empty input"))
}

struct Ctx<'a> {
    sig: &'a Signature,
    guessed: &'a [(String, usize)],
}

impl Ctx<'_> {
    fn arity(&self, r: &str) -> Option<usize> {
        if self.sig.is_input(r) {
            return Some(self.sig.input_arity());
        }
        self.guessed.iter().find(|(g, _)| g == r).map(|&(_, k)| k)
    }

    fn term(&self, e: &Sexp) -> Result<Term> {
        match e {
            Sexp::Sym(s, p) => {
                if !is_identifier(s) {
                    return Err(err(*p, format!("expected a variable, found {s:?}")));
                }
                Ok(Term::var(s))
            }
            Sexp::List(items, p) => {
                let [Sexp::Sym(head, hp), arg] = items.as_slice() else {
                    return Err(err(*p, "expected (suc term) or (suc_i term)"));
                };
                let idx = suc_index(head).ok_or_else(|| err(*hp, format!("expected a successor, found {head:?}")))?;
                Ok(self.term(arg)?.suc(idx))
            }
        }
    }

    fn vars(&self, e: &Sexp) -> Result<Vec<String>> {
        let Sexp::List(items, _) = e else {
            return Err(err(e.pos(), "expected a variable list"));
        };
        items
            .iter()
            .map(|v| match v {
                Sexp::Sym(s, _) if is_identifier(s) => Ok(s.clone()),
                other => Err(err(other.pos(), "expected a variable name")),
            })
            .collect()
    }

    fn formula(&self, e: &Sexp) -> Result<Formula> {
        let Sexp::List(items, p) = e else {
            return Err(err(e.pos(), "expected a parenthesized formula"));
        };
        let Some(Sexp::Sym(head, hp)) = items.first() else {
            return Err(err(*p, "expected an operator or a symbol"));
        };
        let args = &items[1..];
        let want = |k: usize| -> Result<()> {
            if args.len() != k {
                return Err(err(*hp, format!("{head} expects {k} argument(s), got {}", args.len())));
            }
            Ok(())
        };
        let sub = |i: usize| self.formula(&args[i]).map(Box::new);
        Ok(match head.as_str() {
            "true" => {
                want(0)?;
                Formula::True
            }
            "false" => {
                want(0)?;
                Formula::False
            }
            "forall" | "exists" => {
                want(2)?;
                let xs = self.vars(&args[0])?;
                let body = sub(1)?;
                if head == "forall" {
                    Formula::Forall(xs, body)
                } else {
                    Formula::Exists(xs, body)
                }
            }
            "and" | "or" => {
                if args.is_empty() {
                    return Err(err(*hp, format!("{head} needs at least one argument")));
                }
                let fs = args.iter().map(|a| self.formula(a)).collect::<Result<Vec<_>>>()?;
                if head == "and" {
                    Formula::And(fs)
                } else {
                    Formula::Or(fs)
                }
            }
            "not" => {
                want(1)?;
                Formula::Not(sub(0)?)
            }
            "implies" => {
                want(2)?;
                Formula::Implies(sub(0)?, sub(1)?)
            }
            "iff" => {
                want(2)?;
                Formula::Iff(sub(0)?, sub(1)?)
            }
            "xor" => {
                want(2)?;
                Formula::Xor(sub(0)?, sub(1)?)
            }
            "=" | "<" => {
                want(2)?;
                let (a, b) = (self.term(&args[0])?, self.term(&args[1])?);
                Formula::Atom(if head == "=" { Atom::Eq(a, b) } else { Atom::Lt(a, b) })
            }
            "min" | "max" => {
                want(1)?;
                let t = self.term(&args[0])?;
                Formula::Atom(if head == "min" { Atom::Min(t) } else { Atom::Max(t) })
            }
            h if indexed(h, "min_").is_some() || indexed(h, "max_").is_some() => {
                want(1)?;
                let t = self.term(&args[0])?;
                match indexed(h, "min_") {
                    Some(i) => Formula::Atom(Atom::MinI(i, t)),
                    None => Formula::Atom(Atom::MaxI(indexed(h, "max_").unwrap(), t)),
                }
            }
            r => {
                let k = self.arity(r).ok_or_else(|| err(*hp, format!("unknown symbol {r}")))?;
                if k != args.len() {
                    return Err(err(*hp, format!("{r} has arity {k}, applied to {} term(s)", args.len())));
                }
                let ts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>>>()?;
                Formula::Atom(Atom::Rel(r.to_string(), ts))
            }
        })
    }
}

fn indexed(s: &str, prefix: &str) -> Option<usize> {
    let r = s.strip_prefix(prefix)?;
    if r.is_empty() || !r.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    r.parse().ok()
}

fn suc_index(s: &str) -> Option<usize> {
    if s == "suc" {
        Some(0)
    } else {
        indexed(s, "suc_").filter(|&i| i > 0)
    }
}

/// Parses a sentence against the given signature.
pub fn parse_sentence(text: &str, sig: &Signature) -> Result<EsoSentence> {
    let e = read(text)?;
    let (guessed, body) = match &e {
        Sexp::List(items, p) if matches!(items.first(), Some(Sexp::Sym(h, _)) if h == "exists-rel") => {
            if items.len() != 3 {
                return Err(err(*p, "exists-rel expects a declaration list and a formula"));
            }
            let Sexp::List(decls, _) = &items[1] else {
                return Err(err(items[1].pos(), "expected a declaration list"));
            };
            let mut guessed = Vec::new();
            for d in decls {
                let Sexp::List(parts, dp) = d else {
                    return Err(err(d.pos(), "expected (name arity)"));
                };
                let [Sexp::Sym(name, np), Sexp::Sym(ar, ap)] = parts.as_slice() else {
                    return Err(err(*dp, "expected (name arity)"));
                };
                if !is_identifier(name) {
                    return Err(err(*np, format!("invalid relation name {name:?}")));
                }
                let k: usize = ar.parse().map_err(|_| err(*ap, format!("invalid arity {ar:?}")))?;
                guessed.push((name.clone(), k));
            }
            let ctx = Ctx { sig, guessed: &guessed };
            let body = ctx.formula(&items[2])?;
            (guessed, body)
        }
        _ => {
            let ctx = Ctx { sig, guessed: &[] };
            (Vec::new(), ctx.formula(&e)?)
        }
    };
    EsoSentence::new(sig.clone(), guessed, body)
}

/// Parses a formula whose relation symbols are the signature's plus `guessed`.
pub fn parse_formula(text: &str, sig: &Signature, guessed: &[(String, usize)]) -> Result<Formula> {
    let e = read(text)?;
    Ctx { sig, guessed }.formula(&e)
}

/// Parses a boolean combination of `(at-least k (x) ψ)` threshold literals.
pub fn parse_cardinality(text: &str, sig: &Signature) -> Result<CardinalityFormula> {
    let e = read(text)?;
    let ctx = Ctx { sig, guessed: &[] };
    cardinality(&ctx, &e)
}

fn cardinality(ctx: &Ctx, e: &Sexp) -> Result<CardinalityFormula> {
    let Sexp::List(items, p) = e else {
        return Err(err(e.pos(), "expected a parenthesized cardinality formula"));
    };
    let Some(Sexp::Sym(head, hp)) = items.first() else {
        return Err(err(*p, "expected an operator"));
    };
    let args = &items[1..];
    let subs = || args.iter().map(|a| cardinality(ctx, a)).collect::<Result<Vec<_>>>();
    match (head.as_str(), args.len()) {
        ("true", 0) => Ok(CardinalityFormula::Const(true)),
        ("false", 0) => Ok(CardinalityFormula::Const(false)),
        ("not", 1) => Ok(CardinalityFormula::Not(Box::new(cardinality(ctx, &args[0])?))),
        ("and", k) if k > 0 => Ok(CardinalityFormula::And(subs()?)),
        ("or", k) if k > 0 => Ok(CardinalityFormula::Or(subs()?)),
        ("at-least", 3) => {
            let Sexp::Sym(k, kp) = &args[0] else {
                return Err(err(args[0].pos(), "expected a threshold"));
            };
            let k: usize = k.parse().map_err(|_| err(*kp, format!("invalid threshold {k:?}")))?;
            let vars = ctx.vars(&args[1])?;
            let [var] = vars.as_slice() else {
                return Err(err(args[1].pos(), "a threshold literal binds exactly one variable"));
            };
            Ok(CardinalityFormula::AtLeast { k, var: var.clone(), psi: ctx.formula(&args[2])? })
        }
        _ => Err(err(*hp, format!("unexpected {head} with {} argument(s)", args.len()))),
    }
}
