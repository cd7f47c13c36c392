//! Exact ESO checking by grounding over the finite domain and SAT solving.

use crate::model_check::compiled::{Compiled, CF};
use crate::sat::{Lit, Solver};

#[derive(Clone, Copy, PartialEq, Eq)]
enum G {
    C(bool),
    L(Lit),
}

fn neg(g: G) -> G {
    match g {
        G::C(b) => G::C(!b),
        G::L(l) => G::L(!l),
    }
}

struct Grounder<'a> {
    c: &'a Compiled,
    sat: Solver,
}

impl Grounder<'_> {
    fn guess_lit(&self, k: usize, rank: usize) -> Lit {
        Lit::pos(self.c.guess_offset[k] + rank)
    }

    /// Calls `f` on every assignment of `slots`, stopping when it returns false.
    fn each(&mut self, slots: &[usize], env: &mut Vec<usize>, f: &mut dyn FnMut(&mut Self, &mut Vec<usize>) -> bool) {
        let m = self.c.m;
        for &s in slots {
            env[s] = 1;
        }
        loop {
            if !f(self, env) {
                return;
            }
            let mut i = slots.len();
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if env[slots[i]] < m {
                    env[slots[i]] += 1;
                    break;
                }
                env[slots[i]] = 1;
            }
        }
    }

    /// Tseitin variable equivalent to the conjunction (`conj`) or disjunction of `lits`.
    fn gate(&mut self, lits: Vec<Lit>, conj: bool) -> G {
        let mut lits = lits;
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return G::C(!conj);
        }
        match lits.len() {
            0 => G::C(conj),
            1 => G::L(lits[0]),
            _ => {
                let v = Lit::pos(self.sat.new_var());
                // conjunction: v → l for each l, and (∧l) → v; disjunction is dual
                let (v, ls): (Lit, Vec<Lit>) =
                    if conj { (v, lits) } else { (!v, lits.into_iter().map(|l| !l).collect()) };
                let mut big = vec![v];
                for &l in &ls {
                    self.sat.add_clause(&[!v, l]);
                    big.push(!l);
                }
                self.sat.add_clause(&big);
                if conj {
                    G::L(v)
                } else {
                    G::L(!v)
                }
            }
        }
    }

    fn junction(&mut self, parts: &[CF], env: &mut Vec<usize>, conj: bool) -> G {
        let mut lits = Vec::new();
        for p in parts {
            match self.enc(p, env) {
                G::C(b) if b == conj => {}
                G::C(_) => return G::C(!conj),
                G::L(l) => lits.push(l),
            }
        }
        self.gate(lits, conj)
    }

    fn quantified(&mut self, slots: &[usize], g: &CF, env: &mut Vec<usize>, conj: bool) -> G {
        let mut lits = Vec::new();
        let mut decided = None;
        self.each(slots, env, &mut |me, env| match me.enc(g, env) {
            G::C(b) if b == conj => true,
            G::C(_) => {
                decided = Some(G::C(!conj));
                false
            }
            G::L(l) => {
                lits.push(l);
                true
            }
        });
        match decided {
            Some(g) => g,
            None => self.gate(lits, conj),
        }
    }

    fn equiv(&mut self, a: G, b: G) -> G {
        match (a, b) {
            (G::C(x), G::C(y)) => G::C(x == y),
            (G::C(true), g) | (g, G::C(true)) => g,
            (G::C(false), g) | (g, G::C(false)) => neg(g),
            (G::L(x), G::L(y)) => {
                if x == y {
                    return G::C(true);
                }
                if x == !y {
                    return G::C(false);
                }
                let v = Lit::pos(self.sat.new_var());
                self.sat.add_clause(&[!v, !x, y]);
                self.sat.add_clause(&[!v, x, !y]);
                self.sat.add_clause(&[v, x, y]);
                self.sat.add_clause(&[v, !x, !y]);
                G::L(v)
            }
        }
    }

    fn enc(&mut self, f: &CF, env: &mut Vec<usize>) -> G {
        match f {
            CF::Const(b) => G::C(*b),
            CF::Input(..) | CF::Eq(..) => G::C(self.c.eval(f, env, &[])),
            CF::Guess(k, ts) => {
                let r = self.c.tuple_rank(ts, env);
                G::L(self.guess_lit(*k, r))
            }
            CF::Not(g) => neg(self.enc(g, env)),
            CF::And(gs) => self.junction(gs, env, true),
            CF::Or(gs) => self.junction(gs, env, false),
            CF::Implies(a, b) => {
                let x = self.enc(a, env);
                if x == G::C(false) {
                    return G::C(true);
                }
                let y = self.enc(b, env);
                match (x, y) {
                    (_, G::C(true)) => G::C(true),
                    (G::C(true), y) => y,
                    (x, G::C(false)) => neg(x),
                    (G::L(x), G::L(y)) => self.gate(vec![!x, y], false),
                    _ => unreachable!(),
                }
            }
            CF::Iff(a, b) => {
                let (x, y) = (self.enc(a, env), self.enc(b, env));
                self.equiv(x, y)
            }
            CF::Xor(a, b) => {
                let (x, y) = (self.enc(a, env), self.enc(b, env));
                neg(self.equiv(x, y))
            }
            CF::Forall(slots, g) => self.quantified(slots, g, env, true),
            CF::Exists(slots, g) => self.quantified(slots, g, env, false),
        }
    }

    /// Adds constraints making `f` true, without naming `f` itself.
    fn assert(&mut self, f: &CF, env: &mut Vec<usize>) {
        match f {
            CF::And(gs) => {
                for g in gs {
                    self.assert(g, env);
                }
            }
            CF::Forall(slots, g) => self.each(slots, env, &mut |me, env| {
                me.assert(g, env);
                true
            }),
            CF::Or(_) | CF::Implies(..) => {
                let parts: Vec<(bool, &CF)> = match f {
                    CF::Or(gs) => gs.iter().map(|g| (false, g)).collect(),
                    CF::Implies(a, b) => vec![(true, &**a), (false, &**b)],
                    _ => unreachable!(),
                };
                let mut clause = Vec::new();
                for (negate, p) in parts {
                    let g = self.enc(p, env);
                    match if negate { neg(g) } else { g } {
                        G::C(true) => return,
                        G::C(false) => {}
                        G::L(l) => clause.push(l),
                    }
                }
                self.sat.add_clause(&clause);
            }
            _ => match self.enc(f, env) {
                G::C(true) => {}
                G::C(false) => self.sat.add_clause(&[]),
                G::L(l) => self.sat.add_clause(&[l]),
            },
        }
    }
}

/// Returns a satisfying assignment of the guessed bits, if any.
pub(crate) fn solve(c: &Compiled) -> Option<Vec<bool>> {
    let mut g = Grounder { c, sat: Solver::new() };
    for _ in 0..c.guess_bits {
        g.sat.new_var();
    }
    let mut env = vec![0; c.slots.max(1)];
    g.assert(&c.root, &mut env);
    if !g.sat.solve() {
        return None;
    }
    Some((0..c.guess_bits).map(|v| g.sat.value(v)).collect())
}
