//! Seeded random instances: tiling systems, automata, sentences and relations.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::automaton::{neighborhoods, CellularAutomaton};
use crate::logic::{and, atom, not, or, parse_sentence, Atom, EsoSentence, Formula, Signature, Term};
use crate::normalize::{CardinalityFormula, CardinalitySentence};
use crate::tiling::{TileSet, TilingSystem};

const LETTERS: [&str; 4] = ["a", "b", "c", "e"];

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

/// Σ = the first `sigma` of a, b, ...; Γ = g0.., π surjective; each tile kept with probability `density`.
pub fn random_tiling_system(rng: &mut impl Rng, d: usize, sigma: usize, gamma: usize, density: f64) -> TilingSystem {
    let gamma = gamma.max(sigma);
    let pi: Vec<usize> = (0..gamma).map(|g| if g < sigma { g } else { rng.random_range(0..sigma) }).collect();
    let w = gamma + 1;
    let deltas = (1..=d)
        .map(|j| {
            let tiles: Vec<(usize, usize)> = (0..w)
                .flat_map(|u| (0..w).map(move |v| (u, v)))
                .filter(|&(u, v)| !(u == gamma && v == gamma))
                .collect();
            TileSet::new(j, gamma, tiles.into_iter().filter(|_| rng.random_bool(density)))
        })
        .collect();
    let sigma_names = LETTERS[..sigma].iter().map(|s| s.to_string()).collect();
    TilingSystem::new(sigma_names, names("g", gamma), pi, deltas).expect("valid by construction")
}

/// Σ = the first `sigma` states; every neighborhood gets a nonempty random δ-set
/// with probability `density`, and each state is accepting with probability 1/2.
pub fn random_automaton(rng: &mut impl Rng, d: usize, sigma: usize, gamma: usize, density: f64) -> CellularAutomaton {
    let gamma = gamma.max(sigma);
    let mut delta = BTreeMap::new();
    for nu in neighborhoods(d, gamma) {
        if rng.random_bool(density) {
            let mut out: Vec<usize> = (0..gamma).filter(|_| rng.random_bool(0.4)).collect();
            if out.is_empty() {
                out.push(rng.random_range(0..gamma));
            }
            delta.insert(nu, out);
        }
    }
    let accepting = (0..gamma).filter(|_| rng.random_bool(0.5)).collect();
    let names: Vec<String> =
        (0..gamma).map(|s| if s < sigma { LETTERS[s].to_string() } else { format!("s{s}") }).collect();
    CellularAutomaton::new(d, names, (0..sigma).collect(), accepting, delta).expect("valid by construction")
}

/// Atoms of the random binary word sentences.
pub const WORD_ATOMS: [&str; 12] = [
    "(R x y)",
    "(R y x)",
    "(R (suc x) y)",
    "(R x (suc y))",
    "(Q_a x)",
    "(Q_a y)",
    "(= x y)",
    "(< x y)",
    "(min x)",
    "(min y)",
    "(max x)",
    "(max y)",
];

fn word_matrix(rng: &mut impl Rng, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        return WORD_ATOMS.choose(rng).unwrap().to_string();
    }
    match rng.random_range(0..4) {
        0 => format!("(not {})", word_matrix(rng, depth - 1)),
        1 => format!("(and {} {})", word_matrix(rng, depth - 1), word_matrix(rng, depth - 1)),
        2 => format!("(or {} {})", word_matrix(rng, depth - 1), word_matrix(rng, depth - 1)),
        _ => format!("(iff {} {})", word_matrix(rng, depth - 1), word_matrix(rng, depth - 1)),
    }
}

/// `∃R ∀x∀y φ` over words on {a, b}, with R binary and φ a random combination of [`WORD_ATOMS`].
pub fn random_word_sentence(rng: &mut impl Rng, depth: usize) -> EsoSentence {
    let m = word_matrix(rng, depth);
    parse_sentence(&format!("(exists-rel ((R 2)) (forall (x y) {m}))"), &Signature::coordinate(1, &["a", "b"]))
        .expect("well-formed by construction")
}

fn pixel_literal(rng: &mut impl Rng, sig: &Signature) -> Formula {
    let d = sig.d;
    let x = Term::var("x");
    let mut t = x.clone();
    if rng.random_bool(0.3) {
        t = t.suc(rng.random_range(1..=d));
    }
    let a = match rng.random_range(0..3) {
        0 => Atom::MinI(rng.random_range(1..=d), x),
        1 => Atom::MaxI(rng.random_range(1..=d), x),
        _ => Atom::Rel(format!("Q_{}", sig.alphabet.choose(rng).unwrap()), vec![t]),
    };
    if rng.random_bool(0.5) {
        not(atom(a))
    } else {
        atom(a)
    }
}

/// A boolean combination of one or two threshold literals `∃^{≥k} x ψ` with k ≤ `max_k`.
pub fn random_cardinality<R: Rng>(rng: &mut R, sig: &Signature, max_k: usize) -> CardinalitySentence {
    let lit = |rng: &mut R| {
        let psi = match rng.random_range(0..3) {
            0 => pixel_literal(rng, sig),
            1 => and([pixel_literal(rng, sig), pixel_literal(rng, sig)]),
            _ => or([pixel_literal(rng, sig), pixel_literal(rng, sig)]),
        };
        CardinalityFormula::at_least(rng.random_range(1..=max_k), "x", psi)
    };
    let first = lit(rng);
    let body = match rng.random_range(0..4) {
        0 => first,
        1 => CardinalityFormula::Not(Box::new(first)),
        2 => CardinalityFormula::And(vec![first, lit(rng)]),
        _ => CardinalityFormula::Or(vec![CardinalityFormula::Not(Box::new(first)), lit(rng)]),
    };
    CardinalitySentence::new(sig.clone(), body).expect("well-formed by construction")
}
