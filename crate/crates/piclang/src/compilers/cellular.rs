//! Cellular automata into sorted coordinate sentences.

use crate::automaton::{neighborhoods, CellularAutomaton};
use crate::logic::ast::is_identifier;
use crate::logic::{and, atom, iff, implies, not, or, Atom, EsoSentence, Formula, Signature, Term};
use crate::picture::letter_relation;

fn state_name(k: usize, s: &str) -> String {
    let name = format!("R_{s}");
    if is_identifier(&name) {
        name
    } else {
        format!("R{k}")
    }
}

/// `R_s(x, t)` holds iff cell x is in state s in the t-th configuration, t ∈ [1,n].
///
/// The body is `∀x∀t (Φ_init ∧ Φ_fun ∧ Φ_step ∧ Φ_last)`: the first configuration
/// is the input, every (x, t) has at most one state, a neighborhood at t < n forces
/// a state of δ(ν) at t+1, no neighborhood has an empty δ-set, and at t = n the
/// neighborhood of 1^d has an accepting successor.
pub fn automaton_to_sentence(a: &CellularAutomaton) -> EsoSentence {
    let d = a.d();
    let g = a.gamma().len();
    let sigma = a.sigma_names();
    let sig = Signature::coordinate(d, &sigma.iter().map(String::as_str).collect::<Vec<_>>());
    let names: Vec<String> = a.gamma().iter().enumerate().map(|(k, s)| state_name(k, s)).collect();
    let mut xs: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    xs.push("t".into());
    let x: Vec<Term> = xs.iter().map(|v| Term::var(v)).collect();
    let r = |s: usize, bump: Option<usize>| {
        let mut ts = x.clone();
        if let Some(i) = bump {
            ts[i] = ts[i].clone().suc(0);
        }
        atom(Atom::Rel(names[s].clone(), ts))
    };
    let min = |i: usize| atom(Atom::Min(x[i].clone()));
    let max = |i: usize| atom(Atom::Max(x[i].clone()));
    let desc = |nu: &[usize]| {
        and([r(nu[0], None)]
            .into_iter()
            .chain((0..d).map(|i| if nu[i + 1] == g { max(i) } else { and([not(max(i)), r(nu[i + 1], Some(i))]) }))
            .collect::<Vec<_>>())
    };
    let input = |s: usize| match a.sigma().iter().position(|&q| q == s) {
        Some(k) => atom(Atom::Rel(letter_relation(&sigma[k]), x[..d].to_vec())),
        None => Formula::False,
    };
    let init = implies(min(d), and((0..g).map(|s| iff(r(s, None), input(s))).collect::<Vec<_>>()));
    let fun = and((0..g)
        .flat_map(|s| (s + 1..g).map(move |u| (s, u)))
        .map(|(s, u)| not(and([r(s, None), r(u, None)])))
        .collect::<Vec<_>>());
    // a blocking neighborhood kills the computation at every t, the last step included
    let step = and(neighborhoods(d, g)
        .map(|nu| {
            let next = a.delta(&nu);
            let then = if next.is_empty() {
                Formula::False
            } else {
                implies(not(max(d)), or(next.iter().map(|&s| r(s, Some(d))).collect::<Vec<_>>()))
            };
            implies(desc(&nu), then)
        })
        .collect::<Vec<_>>());
    let last = implies(
        and([max(d)].into_iter().chain((0..d).map(min)).collect::<Vec<_>>()),
        or(neighborhoods(d, g)
            .filter(|nu| a.delta(nu).iter().any(|&s| a.is_accepting(s)))
            .map(|nu| desc(&nu))
            .collect::<Vec<_>>()),
    );
    let body = Formula::Forall(xs, Box::new(and([init, fun, step, last])));
    let guessed = names.into_iter().map(|n| (n, d + 1)).collect();
    EsoSentence::new(sig, guessed, body).expect("well-formed by construction")
}
