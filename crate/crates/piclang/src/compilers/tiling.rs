//! Tiling systems and monadic pixel sentences.

use crate::error::{Error, Result};
use crate::logic::ast::is_identifier;
use crate::logic::{and, atom, implies, not, or, Atom, EsoSentence, Formula, Signature, Term};
use crate::normalize::{local_form, localize_pixel_sentence, LocalForm};
use crate::picture::{letter_relation, EncodingKind};
use crate::tiling::{TileSet, TilingSystem};

/// Bound on `|Γ| = m·2^{k−m}` in [`sentence_to_tiling`].
pub const MAX_COLORS: usize = 1 << 12;

fn tile_name(k: usize, gamma: &str) -> String {
    let name = format!("T_{gamma}");
    if is_identifier(&name) {
        name
    } else {
        format!("T{k}")
    }
}

/// Guesses one monadic `T_γ` per tile symbol, in local form: a cell carries exactly
/// one γ projecting to its letter, and adjacent cells form tiles.
pub fn tiling_to_sentence(ts: &TilingSystem) -> EsoSentence {
    let d = ts.d();
    let sigma: Vec<&str> = ts.sigma().iter().map(String::as_str).collect();
    let sig = Signature::pixel(d, &sigma);
    let names: Vec<String> = ts.gamma().iter().enumerate().map(|(k, g)| tile_name(k, g)).collect();
    let x = Term::var("x");
    let here = |k: usize| atom(Atom::Rel(names[k].clone(), vec![x.clone()]));
    let next = |k: usize, i: usize| atom(Atom::Rel(names[k].clone(), vec![x.clone().suc(i)]));
    let g = names.len();
    let b = g;
    let one = and([or((0..g).map(here).collect::<Vec<_>>())]
        .into_iter()
        .chain((0..g).flat_map(|u| (u + 1..g).map(move |v| (u, v))).map(|(u, v)| not(and([here(u), here(v)]))))
        .chain(
            (0..g)
                .map(|u| implies(here(u), atom(Atom::Rel(letter_relation(&ts.sigma()[ts.pi()[u]]), vec![x.clone()])))),
        )
        .collect::<Vec<_>>());
    let mut lf = LocalForm { var: "x".into(), min: Vec::new(), max: Vec::new(), step: Vec::new() };
    for (i, delta) in ts.deltas().iter().enumerate() {
        let tiles = delta.tiles();
        lf.min.push(or(tiles.iter().filter(|&&(u, v)| u == b && v < g).map(|&(_, v)| here(v)).collect::<Vec<_>>()));
        let mut max = or(tiles.iter().filter(|&&(u, v)| u < g && v == b).map(|&(u, _)| here(u)).collect::<Vec<_>>());
        let mut step = or(tiles
            .iter()
            .filter(|&&(u, v)| u < g && v < g)
            .map(|&(u, v)| and([here(u), next(v, i + 1)]))
            .collect::<Vec<_>>());
        if i == 0 {
            // every cell is either max_1 or not
            max = and([one.clone(), max]);
            step = and([one.clone(), step]);
        }
        lf.max.push(max);
        lf.step.push(step);
    }
    let guessed = names.into_iter().map(|n| (n, 1)).collect();
    EsoSentence::new(sig, guessed, lf.to_body()).expect("well-formed by construction")
}

/// A color: a letter and one bit per guessed symbol.
#[derive(Clone, Copy)]
struct Color {
    letter: usize,
    bits: usize,
}

struct Reader<'a> {
    sig: &'a Signature,
    guessed: &'a [(String, usize)],
}

impl Reader<'_> {
    fn eval(&self, f: &Formula, here: Color, next: Option<Color>) -> bool {
        let atom_value = |a: &Atom| {
            let Atom::Rel(r, ts) = a else { return false };
            let c = if ts[0].is_var() {
                here
            } else {
                match next {
                    Some(c) => c,
                    None => return false,
                }
            };
            match self.sig.letter_of(r) {
                Some(s) => c.letter == s,
                None => {
                    let j = self.guessed.iter().position(|(g, _)| g == r).expect("declared symbol");
                    (c.bits >> j) & 1 == 1
                }
            }
        };
        eval_with(f, &atom_value)
    }
}

fn eval_with(f: &Formula, v: &dyn Fn(&Atom) -> bool) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => v(a),
        Formula::Not(g) => !eval_with(g, v),
        Formula::And(gs) => gs.iter().all(|g| eval_with(g, v)),
        Formula::Or(gs) => gs.iter().any(|g| eval_with(g, v)),
        Formula::Implies(a, b) => !eval_with(a, v) || eval_with(b, v),
        Formula::Iff(a, b) => eval_with(a, v) == eval_with(b, v),
        Formula::Xor(a, b) => eval_with(a, v) != eval_with(b, v),
        Formula::Forall(..) | Formula::Exists(..) => unreachable!("local forms are quantifier-free"),
    }
}

/// Tiles read off the local form: Γ is a letter times one bit per guessed
/// symbol, π keeps the letter, and Δ_i lists the color pairs satisfying the
/// guarded formulas of dimension i.
pub fn sentence_to_tiling(s: &EsoSentence, d: usize) -> Result<TilingSystem> {
    if s.sig.kind != EncodingKind::Pixel || s.sig.d != d {
        return Err(Error::Contract(format!("expected a pixel sentence over d={d}")));
    }
    let loc = localize_pixel_sentence(s)?;
    let lf = local_form(&loc).ok_or_else(|| Error::Fragment("localization did not reach the local form".into()))?;
    let m = loc.sig.alphabet.len();
    let k = loc.guessed.len();
    if k >= 32 || m << k > MAX_COLORS {
        return Err(Error::Cap(format!("{m}·2^{k} colors exceed the cap {MAX_COLORS}")));
    }
    let colors: Vec<Color> = (0..m).flat_map(|letter| (0..1 << k).map(move |bits| Color { letter, bits })).collect();
    let gamma: Vec<String> = colors
        .iter()
        .map(|c| {
            let a = &loc.sig.alphabet[c.letter];
            if k == 0 {
                a.clone()
            } else {
                let bits: String = (0..k).map(|j| if (c.bits >> j) & 1 == 1 { '1' } else { '0' }).collect();
                format!("{a}.{bits}")
            }
        })
        .collect();
    let reader = Reader { sig: &loc.sig, guessed: &loc.guessed };
    let g = colors.len();
    let deltas = (0..d)
        .map(|i| {
            let mut t = TileSet::new(i + 1, g, []);
            for (u, &cu) in colors.iter().enumerate() {
                if reader.eval(&lf.min[i], cu, None) {
                    t.insert(g, u);
                }
                if reader.eval(&lf.max[i], cu, None) {
                    t.insert(u, g);
                }
                for (v, &cv) in colors.iter().enumerate() {
                    if reader.eval(&lf.step[i], cu, Some(cv)) {
                        t.insert(u, v);
                    }
                }
            }
            t
        })
        .collect();
    TilingSystem::new(loc.sig.alphabet.clone(), gamma, colors.iter().map(|c| c.letter).collect(), deltas)
}
