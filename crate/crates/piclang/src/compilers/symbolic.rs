//! Cellular automata whose states are bit vectors and whose transition relation
//! is a propositional predicate, with membership decided by SAT over the
//! unrolled computation.
//!
//! [`sentence_to_automaton`] builds one from a sorted sentence. A working
//! state of cell y after step τ carries its letter, guessed flags `min(y_i)`,
//! a "last step" flag, a "next step is last" flag and the bits of every guessed
//! relation on the hyperplanes t = τ and t = τ+1. Each step checks the matrix
//! at (y, τ) against the neighbors' bits; a violation has no successor.

use std::collections::BTreeMap;

use crate::automaton::CellularAutomaton;
use crate::error::{Error, Result};
use crate::logic::{and, atom, iff, implies, is_sorted, not, or, prenex_universal, Atom, EsoSentence, Formula, Term};
use crate::normalize::Fresh;
use crate::picture::{all_cells, rank, Picture};
use crate::sat::{Lit, Solver};

/// Default bound on the number of states of an explicit expansion.
pub const DEFAULT_STATE_CAP: usize = 1 << 16;

/// Bound on `|Γ|^{d+2}` transition evaluations of an explicit expansion.
pub const EXPANSION_BUDGET: u128 = 1 << 26;

/// Whose bits a variable reads during one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Who {
    /// The cell before the step.
    Own,
    /// The 1-based i-th neighbor before the step.
    Nbr(usize),
    /// The cell after the step.
    New,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Prop {
    Const(bool),
    Var(Who, usize),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Iff(Box<Prop>, Box<Prop>),
}

fn p_not(p: Prop) -> Prop {
    match p {
        Prop::Const(b) => Prop::Const(!b),
        Prop::Not(q) => *q,
        q => Prop::Not(Box::new(q)),
    }
}

fn p_and(ps: impl IntoIterator<Item = Prop>) -> Prop {
    let mut out = Vec::new();
    for p in ps {
        match p {
            Prop::Const(true) => {}
            Prop::Const(false) => return Prop::Const(false),
            Prop::And(qs) => out.extend(qs),
            q => out.push(q),
        }
    }
    match out.len() {
        0 => Prop::Const(true),
        1 => out.pop().unwrap(),
        _ => Prop::And(out),
    }
}

fn p_or(ps: impl IntoIterator<Item = Prop>) -> Prop {
    p_not(p_and(ps.into_iter().map(p_not)))
}

fn p_iff(a: Prop, b: Prop) -> Prop {
    match (a, b) {
        (Prop::Const(x), q) | (q, Prop::Const(x)) => {
            if x {
                q
            } else {
                p_not(q)
            }
        }
        (a, b) => Prop::Iff(Box::new(a), Box::new(b)),
    }
}

fn p_implies(a: Prop, b: Prop) -> Prop {
    p_or([p_not(a), b])
}

impl Prop {
    pub fn eval(&self, v: &dyn Fn(Who, usize) -> bool) -> bool {
        match self {
            Prop::Const(b) => *b,
            Prop::Var(w, i) => v(*w, *i),
            Prop::Not(p) => !p.eval(v),
            Prop::And(ps) => ps.iter().all(|p| p.eval(v)),
            Prop::Or(ps) => ps.iter().any(|p| p.eval(v)),
            Prop::Iff(a, b) => a.eval(v) == b.eval(v),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Prop::Const(_) | Prop::Var(..) => 1,
            Prop::Not(p) => 1 + p.size(),
            Prop::And(ps) | Prop::Or(ps) => 1 + ps.iter().map(Prop::size).sum::<usize>(),
            Prop::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Bit positions of a state vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    /// Letters.
    pub m: usize,
    pub d: usize,
    /// Guessed relations.
    pub g: usize,
}

impl Layout {
    pub const BORDER: usize = 0;
    pub const WORK: usize = 1;

    pub fn letter(&self, s: usize) -> usize {
        2 + s
    }

    /// Flag for `min(y_i)`, 1-based i.
    pub fn min(&self, i: usize) -> usize {
        2 + self.m + i - 1
    }

    pub fn first(&self) -> usize {
        2 + self.m + self.d
    }

    pub fn last(&self) -> usize {
        self.first() + 1
    }

    pub fn next_last(&self) -> usize {
        self.first() + 2
    }

    /// Relation j on the hyperplane of the step.
    pub fn h0(&self, j: usize) -> usize {
        self.first() + 3 + j
    }

    /// Relation j on the following hyperplane.
    pub fn h1(&self, j: usize) -> usize {
        self.first() + 3 + self.g + j
    }

    pub fn width(&self) -> usize {
        self.first() + 3 + 2 * self.g
    }
}

#[derive(Clone, Debug)]
pub struct SymbolicAutomaton {
    pub layout: Layout,
    pub sigma: Vec<String>,
    /// Relation names behind the hyperplane bits.
    pub relations: Vec<String>,
    pub delta: Prop,
    /// Predicate on `Who::Own`.
    pub accept: Prop,
}

fn var(w: Who, i: usize) -> Prop {
    Prop::Var(w, i)
}

impl SymbolicAutomaton {
    pub fn d(&self) -> usize {
        self.layout.d
    }

    pub fn letter_state(&self, s: usize) -> Vec<bool> {
        let mut v = vec![false; self.layout.width()];
        v[self.layout.letter(s)] = true;
        v
    }

    pub fn border_state(&self) -> Vec<bool> {
        let mut v = vec![false; self.layout.width()];
        v[Layout::BORDER] = true;
        v
    }

    /// Whether `new` is a successor of `own` under the given neighbors (`None` reads `#`).
    pub fn allows(&self, own: &[bool], nbrs: &[Option<&[bool]>], new: &[bool]) -> bool {
        let border = self.border_state();
        self.delta.eval(&|w, i| match w {
            Who::Own => own[i],
            Who::New => new[i],
            Who::Nbr(k) => nbrs[k - 1].unwrap_or(&border)[i],
        })
    }

    pub fn is_accepting(&self, s: &[bool]) -> bool {
        self.accept.eval(&|_, i| s[i])
    }

    /// Number of well-formed states: letter states plus working states.
    pub fn state_count(&self) -> u128 {
        let l = self.layout;
        let free = l.d + 3 + 2 * l.g;
        (l.m as u128) * (1 + 1u128.checked_shl(free as u32).unwrap_or(u128::MAX >> 1))
    }

    pub fn accepts_real_time(&self, p: &Picture) -> Result<bool> {
        self.accepts_in_time(p, p.n() + 1)
    }

    /// Existence of a computation p = p_1, …, p_t with p_t(1^d) accepting.
    pub fn accepts_in_time(&self, p: &Picture, t: usize) -> Result<bool> {
        let (d, n) = (p.d(), p.n());
        if d != self.layout.d {
            return Err(Error::Contract(format!("{d}-picture given to a {}-dimensional automaton", self.layout.d)));
        }
        if t <= n {
            return Err(Error::Contract(format!("time {t} must exceed the side {n}")));
        }
        let letters: Vec<usize> = p
            .cells()
            .iter()
            .map(|&c| {
                let s = &p.alphabet()[c];
                self.sigma.iter().position(|x| x == s).ok_or_else(|| Error::NotInAlphabet(s.clone()))
            })
            .collect::<Result<_>>()?;
        let w = self.layout.width();
        let cells = n.pow(d as u32);
        let mut solver = Solver::new();
        let top = solver.new_var();
        solver.add_clause(&[Lit::pos(top)]);
        let mut bits = Vec::with_capacity(t);
        for _ in 0..t {
            bits.push((0..cells * w).map(|_| Lit::pos(solver.new_var())).collect::<Vec<_>>());
        }
        for (c, &s) in letters.iter().enumerate() {
            for (i, b) in self.letter_state(s).into_iter().enumerate() {
                let l = bits[0][c * w + i];
                solver.add_clause(&[if b { l } else { !l }]);
            }
        }
        let border: Vec<Lit> =
            self.border_state().into_iter().map(|b| if b { Lit::pos(top) } else { Lit::neg(top) }).collect();
        let mut enc = Tseitin { solver: &mut solver, top };
        for step in 0..t - 1 {
            for a in all_cells(d, n) {
                let c = rank(n, &a);
                let nbr: Vec<Option<usize>> = (0..d)
                    .map(|i| {
                        let mut b = a.clone();
                        b[i] += 1;
                        (b[i] <= n).then(|| rank(n, &b))
                    })
                    .collect();
                let (old, new) = (&bits[step], &bits[step + 1]);
                let root = enc.encode(&self.delta, &|who, i| match who {
                    Who::Own => old[c * w + i],
                    Who::New => new[c * w + i],
                    Who::Nbr(k) => match nbr[k - 1] {
                        Some(o) => old[o * w + i],
                        None => border[i],
                    },
                });
                enc.solver.add_clause(&[root]);
            }
        }
        let last = &bits[t - 1];
        let root = enc.encode(&self.accept, &|_, i| last[i]);
        solver.add_clause(&[root]);
        Ok(solver.solve())
    }

    /// Explicit automaton over the well-formed states; letter states keep the letter names.
    pub fn to_explicit(&self, cap: usize) -> Result<CellularAutomaton> {
        let l = self.layout;
        let count = self.state_count();
        if count > cap as u128 {
            return Err(Error::Cap(format!("{count} states exceed the cap {cap}")));
        }
        let work = (count as usize) - l.m;
        let budget = count.checked_pow(l.d as u32 + 2).unwrap_or(u128::MAX);
        if budget > EXPANSION_BUDGET {
            return Err(Error::Cap(format!("{count}^{} transition checks exceed the expansion budget", l.d + 2)));
        }
        let mut states: Vec<Vec<bool>> = (0..l.m).map(|s| self.letter_state(s)).collect();
        let free = l.d + 3 + 2 * l.g;
        for k in 0..work {
            let (s, code) = (k >> free, k & ((1 << free) - 1));
            let mut v = self.letter_state(s);
            v[Layout::WORK] = true;
            for b in 0..free {
                v[l.min(1) + b] = (code >> b) & 1 == 1;
            }
            states.push(v);
        }
        let names: Vec<String> = states.iter().enumerate().map(|(k, v)| self.state_name(k, v)).collect();
        let g = states.len();
        let mut delta = BTreeMap::new();
        let mut nu = vec![0usize; l.d + 1];
        loop {
            let nbrs: Vec<Option<&[bool]>> = nu[1..].iter().map(|&k| (k < g).then(|| states[k].as_slice())).collect();
            let own = &states[nu[0]];
            let results: Vec<usize> = (0..g).filter(|&k| self.allows(own, &nbrs, &states[k])).collect();
            if !results.is_empty() {
                delta.insert(nu.clone(), results);
            }
            // odometer over Γ × (Γ ∪ {#})^d
            let mut i = l.d;
            loop {
                let top = if i == 0 { g } else { g + 1 };
                nu[i] += 1;
                if nu[i] < top {
                    break;
                }
                nu[i] = 0;
                if i == 0 {
                    let accepting = (0..g).filter(|&k| self.is_accepting(&states[k])).collect();
                    return CellularAutomaton::new(l.d, names, (0..l.m).collect(), accepting, delta);
                }
                i -= 1;
            }
        }
    }

    fn state_name(&self, k: usize, v: &[bool]) -> String {
        let l = self.layout;
        if k < l.m {
            return self.sigma[k].clone();
        }
        let s = (0..l.m).find(|&s| v[l.letter(s)]).unwrap();
        let bits = |r: std::ops::Range<usize>| r.map(|i| if v[i] { '1' } else { '0' }).collect::<String>();
        format!(
            "{}|{}|{}|{}|{}",
            self.sigma[s],
            bits(l.min(1)..l.first()),
            bits(l.first()..l.h0(0)),
            bits(l.h0(0)..l.h1(0)),
            bits(l.h1(0)..l.width())
        )
    }
}

struct Tseitin<'a> {
    solver: &'a mut Solver,
    top: usize,
}

impl Tseitin<'_> {
    fn encode(&mut self, p: &Prop, v: &dyn Fn(Who, usize) -> Lit) -> Lit {
        match p {
            Prop::Const(b) => {
                if *b {
                    Lit::pos(self.top)
                } else {
                    Lit::neg(self.top)
                }
            }
            Prop::Var(w, i) => v(*w, *i),
            Prop::Not(q) => !self.encode(q, v),
            Prop::And(qs) => {
                let ls: Vec<Lit> = qs.iter().map(|q| self.encode(q, v)).collect();
                let g = Lit::pos(self.solver.new_var());
                for &l in &ls {
                    self.solver.add_clause(&[!g, l]);
                }
                let mut big: Vec<Lit> = ls.iter().map(|&l| !l).collect();
                big.push(g);
                self.solver.add_clause(&big);
                g
            }
            Prop::Or(qs) => {
                let neg = Prop::And(qs.iter().cloned().map(p_not).collect());
                !self.encode(&neg, v)
            }
            Prop::Iff(a, b) => {
                let (a, b) = (self.encode(a, v), self.encode(b, v));
                let g = Lit::pos(self.solver.new_var());
                self.solver.add_clause(&[!g, !a, b]);
                self.solver.add_clause(&[!g, a, !b]);
                self.solver.add_clause(&[g, a, b]);
                self.solver.add_clause(&[g, !a, !b]);
                g
            }
        }
    }
}

/// Which step instantiates the matrix.
#[derive(Clone, Copy)]
enum Instance {
    /// Step τ ≥ 2 at (y, τ).
    Step,
    /// Step 2 at (y, 1).
    Delayed,
    /// Step 1 at (y, 1) when n = 1.
    Single,
}

struct Lowering<'a> {
    layout: Layout,
    xs: &'a [String],
    sigma: &'a [String],
    rels: &'a BTreeMap<String, usize>,
}

impl Lowering<'_> {
    fn position(&self, t: &Term) -> usize {
        self.xs.iter().position(|x| x == &t.var).expect("sorted atoms read prefix variables")
    }

    fn atom(&self, a: &Atom, inst: Instance) -> Prop {
        let l = self.layout;
        let d = l.d;
        // (whose bits hold the hyperplane of the instance, which half a neighbor holds it in)
        let (here, nbr_bits) = match inst {
            Instance::Step => (Who::New, 1),
            Instance::Delayed => (Who::Own, 0),
            Instance::Single => (Who::New, 0),
        };
        let h = |who: Who, which: usize, j: usize| var(who, if which == 0 { l.h0(j) } else { l.h1(j) });
        match a {
            Atom::Rel(r, _) if self.sigma.iter().any(|s| crate::picture::letter_relation(s) == *r) => {
                let s = self.sigma.iter().position(|s| crate::picture::letter_relation(s) == *r).unwrap();
                var(Who::Own, l.letter(s))
            }
            Atom::Rel(r, ts) => {
                let j = self.rels[r];
                match ts.iter().position(|t| t.depth() == 1) {
                    None => h(here, 0, j),
                    Some(i) if i == d => h(here, 1, j),
                    Some(i) => match inst {
                        Instance::Single => Prop::Const(false),
                        _ => h(Who::Nbr(i + 1), nbr_bits, j),
                    },
                }
            }
            Atom::Min(t) => match self.position(t) {
                i if i == d => Prop::Const(!matches!(inst, Instance::Step)),
                i => var(if matches!(inst, Instance::Single) { Who::New } else { Who::Own }, l.min(i + 1)),
            },
            Atom::Max(t) => match self.position(t) {
                i if i == d => match inst {
                    Instance::Step => var(Who::New, l.last()),
                    Instance::Delayed => Prop::Const(false),
                    Instance::Single => Prop::Const(true),
                },
                i => var(Who::Nbr(i + 1), Layout::BORDER),
            },
            _ => unreachable!("sorted matrices have no other atoms"),
        }
    }

    fn formula(&self, f: &Formula, inst: Instance) -> Prop {
        match f {
            Formula::True => Prop::Const(true),
            Formula::False => Prop::Const(false),
            Formula::Atom(a) => self.atom(a, inst),
            Formula::Not(g) => p_not(self.formula(g, inst)),
            Formula::And(gs) => p_and(gs.iter().map(|g| self.formula(g, inst)).collect::<Vec<_>>()),
            Formula::Or(gs) => p_or(gs.iter().map(|g| self.formula(g, inst)).collect::<Vec<_>>()),
            Formula::Implies(a, b) => p_implies(self.formula(a, inst), self.formula(b, inst)),
            Formula::Iff(a, b) => p_iff(self.formula(a, inst), self.formula(b, inst)),
            Formula::Xor(a, b) => p_not(p_iff(self.formula(a, inst), self.formula(b, inst))),
            Formula::Forall(..) | Formula::Exists(..) => unreachable!("quantifier-free matrix"),
        }
    }
}

/// Reads of R(x^(i)) that the matrix does not guard by max(x_i) are replaced by a
/// case split on max(x_i), the wrapped value coming from a copy constant along x_i.
fn guard_wraps(s: &EsoSentence, xs: &[String], m: &Formula) -> (Vec<(String, usize)>, Formula) {
    let mut fresh = Fresh::for_sentence(s);
    let mut guessed = s.guessed.clone();
    let x: Vec<Term> = xs.iter().map(|v| Term::var(v)).collect();
    let bump = |i: usize| {
        let mut v = x.clone();
        v[i] = v[i].clone().suc(0);
        v
    };
    let mut reads = Vec::new();
    m.for_each_atom(&mut |a| {
        if let Atom::Rel(r, ts) = a {
            if let Some(i) = ts.iter().position(|t| t.depth() == 1) {
                if !reads.contains(&(r.clone(), i)) {
                    reads.push((r.clone(), i));
                }
            }
        }
    });
    let mut defs = Vec::new();
    let mut m = m.clone();
    for (r, i) in reads {
        let at_max = m.map_atoms(&mut |a| match a {
            Atom::Max(t) if t.var == xs[i] => Formula::True,
            a => atom(a.clone()),
        });
        let target = Atom::Rel(r.clone(), bump(i));
        let mut open = false;
        at_max.for_each_atom(&mut |a| open |= *a == target);
        if !open {
            continue;
        }
        let z = fresh.name(&format!("{r}_w{}", i + 1));
        guessed.push((z.clone(), xs.len()));
        let max = atom(Atom::Max(x[i].clone()));
        let zx = atom(Atom::Rel(z.clone(), x.clone()));
        defs.push(implies(atom(Atom::Min(x[i].clone())), iff(zx.clone(), atom(Atom::Rel(r.clone(), x.clone())))));
        defs.push(implies(not(max.clone()), iff(atom(Atom::Rel(z.clone(), bump(i))), zx.clone())));
        m = m.map_atoms(&mut |a| {
            if *a == target {
                or([and([max.clone(), zx.clone()]), and([not(max.clone()), atom(a.clone())])])
            } else {
                atom(a.clone())
            }
        });
    }
    defs.insert(0, m);
    (guessed, and(defs))
}

/// A d-automaton accepting, in real time, the d-pictures satisfying a sorted
/// sentence with d+1 universal variables, the last one read as time.
pub fn sentence_to_automaton(s: &EsoSentence, d: usize) -> Result<SymbolicAutomaton> {
    if s.sig.d != d {
        return Err(Error::Contract(format!("sentence over d={} compiled for d={d}", s.sig.d)));
    }
    if !is_sorted(s, d, d + 1)? {
        return Err(Error::Fragment(format!(
            "not in the sorted fragment with {} variables; run the sorted pipeline",
            d + 1
        )));
    }
    let (xs, m) = prenex_universal(&s.body).expect("sorted sentences are prenex");
    let (guessed, m) = guard_wraps(s, &xs, m);
    let layout = Layout { m: s.sig.alphabet.len(), d, g: guessed.len() };
    let rels: BTreeMap<String, usize> = guessed.iter().enumerate().map(|(j, (r, _))| (r.clone(), j)).collect();
    let low = Lowering { layout, xs: &xs, sigma: &s.sig.alphabet, rels: &rels };
    let l = layout;
    let same =
        |bits: Vec<(usize, usize)>| p_and(bits.into_iter().map(|(a, b)| p_iff(var(Who::New, a), var(Who::Own, b))));
    let letters = same((0..l.m).map(|s| (l.letter(s), l.letter(s))).collect());
    let nbr_border = |i: usize| var(Who::Nbr(i), Layout::BORDER);
    // step 1: leave the letter state, guess flags and the first two hyperplanes
    let first = p_and([
        p_not(var(Who::Own, Layout::BORDER)),
        p_not(var(Who::Own, Layout::WORK)),
        var(Who::New, Layout::WORK),
        p_not(var(Who::New, Layout::BORDER)),
        letters.clone(),
        var(Who::New, l.first()),
        p_implies(
            var(Who::New, l.last()),
            p_and((1..=d).map(nbr_border).chain([low.formula(&m, Instance::Single)]).collect::<Vec<_>>()),
        ),
    ]);
    let neighbors = (1..=d).map(|i| {
        let n = Who::Nbr(i);
        let agree = p_and(
            (1..=d)
                .filter(|&j| j != i)
                .map(|j| p_iff(var(n, l.min(j)), var(Who::Own, l.min(j))))
                .chain([
                    var(n, Layout::WORK),
                    p_not(var(n, l.min(i))),
                    p_iff(var(n, l.next_last()), var(Who::Own, l.next_last())),
                ])
                .collect::<Vec<_>>(),
        );
        p_implies(p_not(nbr_border(i)), agree)
    });
    let later = p_and(
        [
            var(Who::Own, Layout::WORK),
            p_not(var(Who::Own, l.last())),
            var(Who::New, Layout::WORK),
            p_not(var(Who::New, Layout::BORDER)),
            p_not(var(Who::New, l.first())),
            letters,
            same((1..=d).map(|i| (l.min(i), l.min(i))).collect()),
            same(vec![(l.last(), l.next_last())]),
            same((0..l.g).map(|j| (l.h0(j), l.h1(j))).collect()),
            low.formula(&m, Instance::Step),
            p_implies(var(Who::Own, l.first()), low.formula(&m, Instance::Delayed)),
        ]
        .into_iter()
        .chain(neighbors)
        .collect::<Vec<_>>(),
    );
    let delta = p_or([first, later]);
    let accept = p_and(
        [var(Who::Own, Layout::WORK), var(Who::Own, l.last())]
            .into_iter()
            .chain((1..=d).map(|i| var(Who::Own, l.min(i))))
            .collect::<Vec<_>>(),
    );
    Ok(SymbolicAutomaton {
        layout,
        sigma: s.sig.alphabet.clone(),
        relations: guessed.into_iter().map(|(r, _)| r).collect(),
        delta,
        accept,
    })
}
