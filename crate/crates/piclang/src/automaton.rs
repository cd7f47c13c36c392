//! Nondeterministic one-way d-dimensional cellular automata.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::picture::{check_alphabet, coords, Picture, BORDER};

/// Default bound on the number of configurations kept per step.
pub const DEFAULT_LAYER_CAP: usize = 1 << 20;

/// States are indices into Γ; in neighborhoods the index `Γ.len()` reads `#`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellularAutomaton {
    d: usize,
    sigma: Vec<usize>,
    gamma: Vec<String>,
    accepting: Vec<bool>,
    delta: BTreeMap<Vec<usize>, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DeltaEntry {
    state: String,
    neighbors: Vec<String>,
    results: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct AutomatonFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    sigma: Vec<String>,
    gamma: Vec<String>,
    accepting: Vec<String>,
    delta: Vec<DeltaEntry>,
}

impl CellularAutomaton {
    /// `sigma` and `accepting` are Γ-indices; `delta` keys are `[state, ν(1)..ν(d)]`.
    pub fn new(
        d: usize,
        gamma: Vec<String>,
        sigma: Vec<usize>,
        accepting: Vec<usize>,
        delta: BTreeMap<Vec<usize>, Vec<usize>>,
    ) -> Result<Self> {
        check_alphabet(&gamma).map_err(|e| Error::Automaton(format!("Γ: {e}")))?;
        if d == 0 {
            return Err(Error::Automaton("dimension must be positive".into()));
        }
        let g = gamma.len();
        if sigma.is_empty() || sigma.iter().any(|&s| s >= g) {
            return Err(Error::Automaton("Σ must be a nonempty subset of Γ".into()));
        }
        if accepting.iter().any(|&s| s >= g) {
            return Err(Error::Automaton("F must be a subset of Γ".into()));
        }
        let mut acc = vec![false; g];
        for s in accepting {
            acc[s] = true;
        }
        let mut table = BTreeMap::new();
        for (k, mut v) in delta {
            if k.len() != d + 1 || k[0] >= g || k[1..].iter().any(|&x| x > g) {
                return Err(Error::Automaton(format!("malformed neighborhood {k:?}")));
            }
            if v.iter().any(|&x| x >= g) {
                return Err(Error::Automaton(format!("result outside Γ for {k:?}")));
            }
            v.sort_unstable();
            v.dedup();
            table.insert(k, v);
        }
        Ok(CellularAutomaton { d, sigma, gamma, accepting: acc, delta: table })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> &[String] {
        &self.gamma
    }

    /// Σ as Γ-indices.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn sigma_names(&self) -> Vec<String> {
        self.sigma.iter().map(|&s| self.gamma[s].clone()).collect()
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn accepting(&self) -> Vec<usize> {
        (0..self.gamma.len()).filter(|&s| self.accepting[s]).collect()
    }

    pub fn border(&self) -> usize {
        self.gamma.len()
    }

    /// δ(ν); unspecified neighborhoods block.
    pub fn delta(&self, nu: &[usize]) -> &[usize] {
        self.delta.get(nu).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Explicit entries of δ.
    pub fn table(&self) -> &BTreeMap<Vec<usize>, Vec<usize>> {
        &self.delta
    }

    pub fn symbol(&self, s: usize) -> &str {
        if s == self.gamma.len() {
            BORDER
        } else {
            &self.gamma[s]
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: AutomatonFile = serde_json::from_str(text)?;
        let g = f.gamma.len();
        let idx = |s: &str, border: bool| -> Result<usize> {
            if border && s == BORDER {
                return Ok(g);
            }
            f.gamma.iter().position(|x| x == s).ok_or_else(|| Error::Automaton(format!("unknown state {s:?}")))
        };
        let d = match (f.d, f.delta.first()) {
            (Some(d), _) => d,
            (None, Some(e)) => e.neighbors.len(),
            (None, None) => return Err(Error::Automaton("empty δ needs an explicit \"d\" field".into())),
        };
        let sigma = f.sigma.iter().map(|s| idx(s, false)).collect::<Result<Vec<_>>>()?;
        let accepting = f.accepting.iter().map(|s| idx(s, false)).collect::<Result<Vec<_>>>()?;
        let mut delta: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for e in &f.delta {
            let mut key = vec![idx(&e.state, false)?];
            for nb in &e.neighbors {
                key.push(idx(nb, true)?);
            }
            let res = e.results.iter().map(|s| idx(s, false)).collect::<Result<Vec<_>>>()?;
            delta.entry(key).or_default().extend(res);
        }
        CellularAutomaton::new(d, f.gamma, sigma, accepting, delta)
    }

    pub fn to_json(&self) -> String {
        let f = AutomatonFile {
            d: Some(self.d),
            sigma: self.sigma_names(),
            gamma: self.gamma.clone(),
            accepting: self.accepting().into_iter().map(|s| self.gamma[s].clone()).collect(),
            delta: self
                .delta
                .iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| DeltaEntry {
                    state: self.gamma[k[0]].clone(),
                    neighbors: k[1..].iter().map(|&x| self.symbol(x).to_string()).collect(),
                    results: v.iter().map(|&x| self.gamma[x].clone()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    /// Γ-indices of an input picture over Σ.
    fn initial(&self, p: &Picture) -> Result<Vec<usize>> {
        if p.d() != self.d {
            return Err(Error::Automaton(format!("{}-picture given to a {}-automaton", p.d(), self.d)));
        }
        let map =
            p.alphabet().iter().map(|s| self.sigma.iter().copied().find(|&g| &self.gamma[g] == s)).collect::<Vec<_>>();
        p.cells().iter().map(|&c| map[c].ok_or_else(|| Error::NotInAlphabet(p.alphabet()[c].clone()))).collect()
    }

    /// Γ-indices of a configuration given as a picture over (a subset of) Γ.
    fn config_cells(&self, c: &Picture) -> Result<Vec<usize>> {
        let map = c.alphabet().iter().map(|s| self.gamma.iter().position(|g| g == s)).collect::<Vec<_>>();
        c.cells().iter().map(|&x| map[x].ok_or_else(|| Error::NotInAlphabet(c.alphabet()[x].clone()))).collect()
    }

    /// Per-cell δ-sets of a configuration.
    fn choices(&self, n: usize, cells: &[usize]) -> Vec<&[usize]> {
        let d = self.d;
        let b = self.border();
        let mut nu = vec![0; d + 1];
        (0..cells.len())
            .map(|r| {
                let a = coords(d, n, r);
                nu[0] = cells[r];
                for i in 0..d {
                    nu[i + 1] = if a[i] == n { b } else { cells[r + n.pow((d - 1 - i) as u32)] };
                }
                self.delta(&nu)
            })
            .collect()
    }

    fn successors_of(&self, n: usize, cells: &[usize], out: &mut dyn FnMut(Vec<usize>) -> Result<()>) -> Result<()> {
        let ch = self.choices(n, cells);
        if ch.iter().any(|c| c.is_empty()) {
            return Ok(());
        }
        let mut pos = vec![0usize; ch.len()];
        loop {
            out(pos.iter().zip(&ch).map(|(&k, c)| c[k]).collect())?;
            let mut i = ch.len();
            loop {
                if i == 0 {
                    return Ok(());
                }
                i -= 1;
                pos[i] += 1;
                if pos[i] < ch[i].len() {
                    break;
                }
                pos[i] = 0;
            }
        }
    }

    /// All successor configurations, in lexicographic order of cell lists.
    pub fn step_successors(&self, c: &Picture, cap: usize) -> Result<Vec<Picture>> {
        let cells = self.config_cells(c)?;
        let n = c.n();
        let mut out = Vec::new();
        self.successors_of(n, &cells, &mut |v| {
            if out.len() >= cap {
                return Err(Error::Cap(format!("more than {cap} successor configurations")));
            }
            out.push(v);
            Ok(())
        })?;
        Ok(out
            .into_iter()
            .map(|v| Picture::from_indices(self.d, n, self.gamma.clone(), v).expect("valid configuration"))
            .collect())
    }

    /// Whether some computation p_1..p_T has p_T(1^d) ∈ F.
    pub fn accepts_in_time(&self, p: &Picture, t: usize) -> Result<bool> {
        self.accepts_in_time_capped(p, t, DEFAULT_LAYER_CAP)
    }

    pub fn accepts_in_time_capped(&self, p: &Picture, t: usize, cap: usize) -> Result<bool> {
        let n = p.n();
        if t <= n {
            return Err(Error::Contract(format!("time bound {t} must exceed the side {n}")));
        }
        if !self.accepting.iter().any(|&a| a) {
            return Ok(false);
        }
        let mut layer: HashSet<Vec<usize>> = HashSet::from([self.initial(p)?]);
        for _ in 1..t {
            let mut next = HashSet::new();
            for c in &layer {
                self.successors_of(n, c, &mut |v| {
                    next.insert(v);
                    if next.len() > cap {
                        return Err(Error::Cap(format!("more than {cap} reachable configurations in one step")));
                    }
                    Ok(())
                })?;
            }
            if next.is_empty() {
                return Ok(false);
            }
            layer = next;
        }
        Ok(layer.iter().any(|c| self.accepting[c[0]]))
    }

    /// Acceptance in time c·n + c′.
    pub fn accepts_linear(&self, p: &Picture, c: usize, c_prime: i64) -> Result<bool> {
        let t = c as i64 * p.n() as i64 + c_prime;
        if t <= p.n() as i64 {
            return Err(Error::Contract(format!("time bound {t} must exceed the side {}", p.n())));
        }
        self.accepts_in_time(p, t as usize)
    }

    /// Real time: T = n + 1.
    pub fn accepts_real_time(&self, p: &Picture) -> Result<bool> {
        self.accepts_in_time(p, p.n() + 1)
    }

    /// The unique computation of a deterministic automaton, if it does not block.
    pub fn run_deterministic(&self, p: &Picture, t: usize) -> Result<Option<Vec<Picture>>> {
        let n = p.n();
        let mut c = self.initial(p)?;
        let mut out = vec![Picture::from_indices(self.d, n, self.gamma.clone(), c.clone()).expect("valid")];
        for _ in 1..t {
            let ch = self.choices(n, &c);
            if ch.iter().any(|s| s.len() != 1) {
                if ch.iter().any(|s| s.is_empty()) {
                    return Ok(None);
                }
                return Err(Error::Automaton("automaton is not deterministic on this run".into()));
            }
            c = ch.iter().map(|s| s[0]).collect();
            out.push(Picture::from_indices(self.d, n, self.gamma.clone(), c.clone()).expect("valid"));
        }
        Ok(Some(out))
    }
}

/// All neighborhoods ν = (ν(0), ν(1..d)) with ν(0) ∈ Γ, ν(i) ∈ Γ ∪ {#}.
pub fn neighborhoods(d: usize, g: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = g * (g + 1).pow(d as u32);
    (0..total).map(move |mut code| {
        let mut nu = vec![0; d + 1];
        for x in nu[1..].iter_mut().rev() {
            *x = code % (g + 1);
            code /= g + 1;
        }
        nu[0] = code;
        nu
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picture::make_picture;

    /// δ(q, r) = {q ∧ r} with # read as 1, over Γ = Σ = {0,1}.
    pub(crate) fn and_automaton(accepting: Vec<usize>) -> CellularAutomaton {
        let mut delta = BTreeMap::new();
        for q in 0..2 {
            for r in 0..3 {
                let rv = if r == 2 { 1 } else { r };
                delta.insert(vec![q, r], vec![q & rv]);
            }
        }
        CellularAutomaton::new(1, vec!["0".into(), "1".into()], vec![0, 1], accepting, delta).unwrap()
    }

    fn identity(d: usize, accepting: Vec<usize>) -> CellularAutomaton {
        let delta = neighborhoods(d, 2).map(|nu| (nu.clone(), vec![nu[0]])).collect();
        CellularAutomaton::new(d, vec!["0".into(), "1".into()], vec![0, 1], accepting, delta).unwrap()
    }

    fn word(s: &str) -> Picture {
        let cells: Vec<String> = s.chars().map(|c| c.to_string()).collect();
        Picture::new(1, cells.len(), vec!["0".into(), "1".into()], &cells).unwrap()
    }

    #[test]
    fn stepping() {
        let a = and_automaton(vec![1]);
        assert_eq!(a.step_successors(&word("10"), 10).unwrap(), vec![word("00")]);
        let id = identity(2, vec![0, 1]);
        let p = make_picture(2, 2, &["0", "1"], &["0", "1", "1", "0"]).unwrap();
        assert_eq!(id.step_successors(&p, 10).unwrap(), vec![p.clone()]);
        let blocked = CellularAutomaton::new(1, vec!["0".into()], vec![0], vec![0], BTreeMap::new()).unwrap();
        let z = Picture::new(1, 1, vec!["0".into()], &["0"]).unwrap();
        assert!(blocked.step_successors(&z, 10).unwrap().is_empty());
    }

    #[test]
    fn and_automaton_accepts_all_ones() {
        let a = and_automaton(vec![1]);
        for n in 1..=4 {
            for w in Picture::enumerate(1, n, &["0".to_string(), "1".to_string()]) {
                let ones = w.cells().iter().all(|&c| c == 1);
                assert_eq!(a.accepts_in_time(&w, n + 1).unwrap(), ones, "{w}");
            }
        }
        assert!(a.accepts_linear(&word("11"), 1, 1).unwrap());
        assert!(!a.accepts_linear(&word("10"), 1, 1).unwrap());
        assert!(matches!(a.accepts_in_time(&word("11"), 2), Err(Error::Contract(_))));
    }

    #[test]
    fn trivial_acceptance() {
        let id = identity(1, vec![0, 1]);
        assert!(id.accepts_linear(&word("0110"), 1, 1).unwrap());
        assert!(id.accepts_in_time(&word("01"), 7).unwrap());
        let none = identity(1, vec![]);
        assert!(!none.accepts_in_time(&word("01"), 3).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let a = and_automaton(vec![1]);
        assert_eq!(CellularAutomaton::from_json(&a.to_json()).unwrap(), a);
    }
}
