use crate::logic::ast::{Atom, EsoSentence, Formula, Term};

pub fn render_term(t: &Term) -> String {
    let mut s = t.var.clone();
    for &i in &t.sucs {
        s = if i == 0 { format!("(suc {s})") } else { format!("(suc_{i} {s})") };
    }
    s
}

pub fn render_atom(a: &Atom) -> String {
    let app = |h: &str, ts: &[&Term]| {
        let mut s = format!("({h}");
        for t in ts {
            s.push(' ');
            s.push_str(&render_term(t));
        }
        s.push(')');
        s
    };
    match a {
        Atom::Rel(r, ts) => app(r, &ts.iter().collect::<Vec<_>>()),
        Atom::Eq(x, y) => app("=", &[x, y]),
        Atom::Lt(x, y) => app("<", &[x, y]),
        Atom::Min(t) => app("min", &[t]),
        Atom::Max(t) => app("max", &[t]),
        Atom::MinI(i, t) => app(&format!("min_{i}"), &[t]),
        Atom::MaxI(i, t) => app(&format!("max_{i}"), &[t]),
    }
}

fn head_and_children(f: &Formula) -> Option<(String, Vec<&Formula>)> {
    Some(match f {
        Formula::True | Formula::False | Formula::Atom(_) => return None,
        Formula::Not(g) => ("not".into(), vec![g]),
        Formula::And(gs) => ("and".into(), gs.iter().collect()),
        Formula::Or(gs) => ("or".into(), gs.iter().collect()),
        Formula::Implies(a, b) => ("implies".into(), vec![a, b]),
        Formula::Iff(a, b) => ("iff".into(), vec![a, b]),
        Formula::Xor(a, b) => ("xor".into(), vec![a, b]),
        Formula::Forall(xs, g) => (format!("forall ({})", xs.join(" ")), vec![g]),
        Formula::Exists(xs, g) => (format!("exists ({})", xs.join(" ")), vec![g]),
    })
}

pub fn render_formula(f: &Formula) -> String {
    match f {
        Formula::True => "(true)".into(),
        Formula::False => "(false)".into(),
        Formula::Atom(a) => render_atom(a),
        _ => {
            let (h, cs) = head_and_children(f).expect("compound");
            let mut s = format!("({h}");
            for c in cs {
                s.push(' ');
                s.push_str(&render_formula(c));
            }
            s.push(')');
            s
        }
    }
}

fn decls(s: &EsoSentence) -> String {
    s.guessed.iter().map(|(r, k)| format!("({r} {k})")).collect::<Vec<_>>().join(" ")
}

/// Canonical single-line text.
pub fn render_sentence(s: &EsoSentence) -> String {
    if s.guessed.is_empty() {
        render_formula(&s.body)
    } else {
        format!("(exists-rel ({}) {})", decls(s), render_formula(&s.body))
    }
}

/// Indented multi-line text; parses to the same sentence as [`render_sentence`].
pub fn render_pretty(s: &EsoSentence) -> String {
    let mut out = String::new();
    if s.guessed.is_empty() {
        pretty(&s.body, 0, &mut out);
    } else {
        out.push_str(&format!("(exists-rel ({})\n", decls(s)));
        pretty(&s.body, 2, &mut out);
        out.push(')');
    }
    out.push('\n');
    out
}

fn pretty(f: &Formula, indent: usize, out: &mut String) {
    let flat = render_formula(f);
    let pad = " ".repeat(indent);
    match head_and_children(f) {
        Some((h, cs)) if flat.len() + indent > 100 => {
            out.push_str(&format!("{pad}({h}\n"));
            for (k, c) in cs.iter().enumerate() {
                pretty(c, indent + 2, out);
                if k + 1 < cs.len() {
                    out.push('\n');
                }
            }
            out.push(')');
        }
        _ => {
            out.push_str(&pad);
            out.push_str(&flat);
        }
    }
}
