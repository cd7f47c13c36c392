//! A small CDCL SAT solver: two watched literals, first-UIP learning,
//! activity-based branching with phase saving, Luby restarts.

/// Literal: `2·var` for the positive and `2·var + 1` for the negative literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: usize) -> Lit {
        Lit((v as u32) << 1)
    }

    pub fn neg(v: usize) -> Lit {
        Lit(((v as u32) << 1) | 1)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Default)]
pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    unsat: bool,
}

impl Solver {
    pub fn new() -> Self {
        Solver { var_inc: 1.0, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.assign.len();
        self.assign.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let a = self.assign[l.var()];
        if l.is_neg() {
            -a
        } else {
            a
        }
    }

    /// Value of a variable in the last model.
    pub fn value(&self, v: usize) -> bool {
        self.assign[v] == TRUE
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.assign[v] = if l.is_neg() { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause; must be called before [`Solver::solve`].
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.unsat {
            return;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        c.retain(|&l| self.lit_value(l) != FALSE);
        if c.iter().any(|&l| self.lit_value(l) == TRUE) {
            return;
        }
        match c.len() {
            0 => self.unsat = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.unsat = true;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let id = self.clauses.len();
        self.watches[c[0].idx()].push(id);
        self.watches[c[1].idx()].push(id);
        self.clauses.push(c);
        id
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let fl = !p;
            let mut ws = std::mem::take(&mut self.watches[fl.idx()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let cid = ws[i];
                i += 1;
                let c = &mut self.clauses[cid];
                if c[0] == fl {
                    c.swap(0, 1);
                }
                let first = c[0];
                let a0 = self.assign[first.var()];
                let v0 = if first.is_neg() { -a0 } else { a0 };
                if v0 == TRUE {
                    ws[j] = cid;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let a = self.assign[l.var()];
                    let v = if l.is_neg() { -a } else { a };
                    if v != FALSE {
                        c.swap(1, k);
                        let nw = c[1];
                        self.watches[nw.idx()].push(cid);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cid;
                j += 1;
                if v0 == FALSE {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cid));
                }
            }
            ws.truncate(j);
            self.watches[fl.idx()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back = self.level[learnt[1].var()];
        }
        (learnt, back)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl];
        for k in (lim..self.trail.len()).rev() {
            let v = self.trail[k].var();
            self.phase[v] = self.assign[v] == TRUE;
            self.assign[v] = UNDEF;
            self.reason[v] = None;
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl);
        self.qhead = lim;
    }

    fn pick(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.assign.len() {
            if self.assign[v] == UNDEF && best.is_none_or(|b| self.activity[v] > self.activity[b]) {
                best = Some(v);
            }
        }
        best
    }

    /// Decides satisfiability; on success the model is read with [`Solver::value`].
    pub fn solve(&mut self) -> bool {
        if self.unsat {
            return false;
        }
        if self.propagate().is_some() {
            self.unsat = true;
            return false;
        }
        let mut restart = 1u64;
        loop {
            let budget = 64 * luby(restart);
            restart += 1;
            let mut conflicts = 0u64;
            loop {
                if let Some(confl) = self.propagate() {
                    if self.decision_level() == 0 {
                        self.unsat = true;
                        return false;
                    }
                    conflicts += 1;
                    let (learnt, back) = self.analyze(confl);
                    self.cancel_until(back);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], None);
                    } else {
                        let first = learnt[0];
                        let id = self.attach(learnt);
                        self.enqueue(first, Some(id));
                    }
                    self.var_inc /= 0.95;
                } else if conflicts >= budget {
                    self.cancel_until(0);
                    break;
                } else {
                    match self.pick() {
                        None => return true,
                        Some(v) => {
                            self.trail_lim.push(self.trail.len());
                            let l = if self.phase[v] { Lit::pos(v) } else { Lit::neg(v) };
                            self.enqueue(l, None);
                        }
                    }
                }
            }
        }
    }
}

fn luby(mut i: u64) -> u64 {
    // i-th element (1-based) of 1,1,2,1,1,2,4,...
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, clauses: &[Vec<Lit>]) -> bool {
        (0..1u32 << n).any(|m| clauses.iter().all(|c| c.iter().any(|l| ((m >> l.var()) & 1 == 1) != l.is_neg())))
    }

    #[test]
    fn luby_sequence() {
        let s: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(s, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes
        let mut s = Solver::new();
        let v: Vec<Vec<usize>> = (0..5).map(|_| (0..4).map(|_| s.new_var()).collect()).collect();
        for p in &v {
            s.add_clause(&p.iter().map(|&x| Lit::pos(x)).collect::<Vec<_>>());
        }
        #[allow(clippy::needless_range_loop)]
        for h in 0..4 {
            for a in 0..5 {
                for b in a + 1..5 {
                    s.add_clause(&[Lit::neg(v[a][h]), Lit::neg(v[b][h])]);
                }
            }
        }
        assert!(!s.solve());
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables(n in 1usize..9, raw in prop::collection::vec(prop::collection::vec((0usize..8, any::<bool>()), 1..4), 0..40)) {
            let clauses: Vec<Vec<Lit>> = raw
                .iter()
                .map(|c| c.iter().map(|&(v, s)| if s { Lit::pos(v % n) } else { Lit::neg(v % n) }).collect())
                .collect();
            let mut s = Solver::new();
            for _ in 0..n {
                s.new_var();
            }
            for c in &clauses {
                s.add_clause(c);
            }
            let sat = s.solve();
            prop_assert_eq!(sat, brute(n, &clauses));
            if sat {
                for c in &clauses {
                    prop_assert!(c.iter().any(|l| s.value(l.var()) != l.is_neg()));
                }
            }
        }
    }
}
