//! d-pictures, rectangular pictures and their encodings as finite structures.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol read outside the picture domain.
pub const BORDER: &str = "#";
/// Symbol filling the cells added by [`square_picture`].
pub const PAD: &str = "□";

/// Rejects empty, duplicated, whitespace-bearing or reserved symbols.
pub fn check_alphabet(alphabet: &[String]) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::Picture("empty alphabet".into()));
    }
    for (i, s) in alphabet.iter().enumerate() {
        if s == BORDER || s == PAD {
            return Err(Error::ReservedSymbol(s.clone()));
        }
        if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
            return Err(Error::Picture(format!("bad symbol {s:?}")));
        }
        if alphabet[..i].contains(s) {
            return Err(Error::Picture(format!("duplicate symbol {s:?}")));
        }
    }
    Ok(())
}

/// Lexicographic rank (0-based) of a 1-based cell of `[1,n]^d`.
pub fn rank(n: usize, a: &[usize]) -> usize {
    a.iter().fold(0, |acc, &x| acc * n + (x - 1))
}

/// Inverse of [`rank`].
pub fn coords(d: usize, n: usize, mut r: usize) -> Vec<usize> {
    let mut a = vec![0; d];
    for i in (0..d).rev() {
        a[i] = r % n + 1;
        r /= n;
    }
    a
}

/// All cells of `[1,n]^d` in lexicographic order.
pub fn all_cells(d: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(d as u32)).map(move |r| coords(d, n, r))
}

/// Lexicographic successor of `a`, obtained as suc_i ∘ … ∘ suc_d for the
/// smallest i whose later components are all maximal.
pub fn lex_successor(n: usize, a: &[usize]) -> Option<Vec<usize>> {
    let d = a.len();
    let mut i = d;
    while i > 0 && a[i - 1] == n {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    // components i-1..d are advanced cyclically
    let mut b = a.to_vec();
    for x in b.iter_mut().skip(i - 1) {
        *x = if *x == n { 1 } else { *x + 1 };
    }
    Some(b)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Picture {
    d: usize,
    n: usize,
    alphabet: Vec<String>,
    cells: Vec<usize>,
}

impl Picture {
    /// Builds a picture from symbols listed in lexicographic cell order.
    pub fn new<S: AsRef<str>>(d: usize, n: usize, alphabet: Vec<String>, cells: &[S]) -> Result<Self> {
        check_alphabet(&alphabet)?;
        let idx = cells
            .iter()
            .map(|s| {
                let s = s.as_ref();
                alphabet.iter().position(|x| x == s).ok_or_else(|| Error::NotInAlphabet(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(d, n, alphabet, idx)
    }

    /// Builds a picture from alphabet indices.
    pub fn from_indices(d: usize, n: usize, alphabet: Vec<String>, cells: Vec<usize>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::Picture("dimension and side must be positive".into()));
        }
        check_alphabet(&alphabet)?;
        let want = n.checked_pow(d as u32).ok_or_else(|| Error::Picture("picture too large".into()))?;
        if cells.len() != want {
            return Err(Error::Picture(format!("expected {want} cells, got {}", cells.len())));
        }
        if let Some(&c) = cells.iter().find(|&&c| c >= alphabet.len()) {
            return Err(Error::NotInAlphabet(format!("index {c}")));
        }
        Ok(Picture { d, n, alphabet, cells })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Alphabet indices in lexicographic cell order.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn symbol_index(&self, s: &str) -> Option<usize> {
        self.alphabet.iter().position(|x| x == s)
    }

    /// Alphabet index at the 1-based cell `a`.
    pub fn get(&self, a: &[usize]) -> usize {
        self.cells[rank(self.n, a)]
    }

    pub fn symbol(&self, a: &[usize]) -> &str {
        &self.alphabet[self.get(a)]
    }

    /// Value of the bordered picture at `a ∈ [0,n+1]^d`.
    pub fn bordered_value(&self, a: &[i64]) -> Result<&str> {
        if a.len() != self.d {
            return Err(Error::OutOfRange(format!("expected {} coordinates, got {}", self.d, a.len())));
        }
        let n = self.n as i64;
        if a.iter().any(|&x| x < 0 || x > n + 1) {
            return Err(Error::OutOfRange(format!("{a:?} not in [0,{}]^{}", n + 1, self.d)));
        }
        if a.iter().any(|&x| x == 0 || x == n + 1) {
            return Ok(BORDER);
        }
        let b: Vec<usize> = a.iter().map(|&x| x as usize).collect();
        Ok(self.symbol(&b))
    }

    /// Same cells over another alphabet containing every used symbol.
    pub fn with_alphabet(&self, alphabet: Vec<String>) -> Result<Self> {
        let syms: Vec<&str> = self.cells.iter().map(|&c| self.alphabet[c].as_str()).collect();
        Picture::new(self.d, self.n, alphabet, &syms)
    }

    /// Every picture of the given shape, in lexicographic order of cell lists.
    pub fn enumerate(d: usize, n: usize, alphabet: &[String]) -> impl Iterator<Item = Picture> {
        let total = Picture::count(d, n, alphabet.len());
        let alphabet = alphabet.to_vec();
        (0..total).map(move |code| Picture::nth(d, n, &alphabet, code))
    }

    /// Number of pictures of the given shape over `k` letters, saturating.
    pub fn count(d: usize, n: usize, k: usize) -> u128 {
        (k as u128).checked_pow(n.pow(d as u32) as u32).unwrap_or(u128::MAX)
    }

    /// The `code`-th picture in the order of [`Picture::enumerate`].
    pub fn nth(d: usize, n: usize, alphabet: &[String], mut code: u128) -> Picture {
        let len = n.pow(d as u32);
        let k = alphabet.len() as u128;
        let mut cells = vec![0; len];
        for c in cells.iter_mut().rev() {
            *c = (code % k) as usize;
            code /= k;
        }
        Picture { d, n, alphabet: alphabet.to_vec(), cells }
    }

    /// The text format: "d n", the alphabet, then n^(d-1) rows of n symbols.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n{}\n", self.d, self.n, self.alphabet.join(" "));
        for row in self.cells.chunks(self.n) {
            let syms: Vec<&str> = row.iter().map(|&c| self.alphabet[c].as_str()).collect();
            out.push_str(&syms.join(" "));
            out.push('\n');
        }
        out
    }

    /// The text format on one line, rows separated by " / ".
    pub fn inline(&self) -> String {
        self.to_text().trim_end().split('\n').collect::<Vec<_>>().join(" / ")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, msg: &str| Error::Syntax { line: line + 1, col: 1, msg: msg.to_string() };
        let (l0, head) = lines.next().ok_or_else(|| bad(0, "empty picture file"))?;
        let nums: Vec<usize> = head
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(l0, "expected \"d n\""))?;
        if nums.len() != 2 {
            return Err(bad(l0, "expected \"d n\""));
        }
        let (d, n) = (nums[0], nums[1]);
        let (_, alpha) = lines.next().ok_or_else(|| bad(l0 + 1, "missing alphabet line"))?;
        let alphabet: Vec<String> = alpha.split_whitespace().map(str::to_string).collect();
        let rows = n.checked_pow(d.saturating_sub(1) as u32).unwrap_or(usize::MAX);
        let mut cells = Vec::new();
        for _ in 0..rows {
            let (li, row) = lines.next().ok_or_else(|| bad(l0, "missing picture rows"))?;
            let syms: Vec<&str> = row.split_whitespace().collect();
            if syms.len() != n {
                return Err(bad(li, &format!("expected {n} symbols")));
            }
            cells.extend(syms.into_iter().map(str::to_string));
        }
        if let Some((li, _)) = lines.next() {
            return Err(bad(li, "trailing content"));
        }
        Picture::new(d, n, alphabet, &cells)
    }
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inline())
    }
}

/// Convenience constructor mirroring `Picture::new` with borrowed symbols.
pub fn make_picture(d: usize, n: usize, alphabet: &[&str], cells: &[&str]) -> Result<Picture> {
    Picture::new(d, n, alphabet.iter().map(|s| s.to_string()).collect(), cells)
}

/// A picture whose sides may differ; only used at the squaring boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RectPicture {
    shape: Vec<usize>,
    alphabet: Vec<String>,
    cells: Vec<usize>,
}

impl RectPicture {
    pub fn new<S: AsRef<str>>(shape: Vec<usize>, alphabet: Vec<String>, cells: &[S]) -> Result<Self> {
        check_alphabet(&alphabet)?;
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Picture("sides must be positive".into()));
        }
        let want: usize = shape.iter().product();
        if cells.len() != want {
            return Err(Error::Picture(format!("expected {want} cells, got {}", cells.len())));
        }
        let cells = cells
            .iter()
            .map(|s| {
                let s = s.as_ref();
                alphabet.iter().position(|x| x == s).ok_or_else(|| Error::NotInAlphabet(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RectPicture { shape, alphabet, cells })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn rank(&self, a: &[usize]) -> usize {
        a.iter().zip(&self.shape).fold(0, |acc, (&x, &s)| acc * s + (x - 1))
    }

    pub fn symbol(&self, a: &[usize]) -> &str {
        &self.alphabet[self.cells[self.rank(a)]]
    }
}

/// Pads a rectangular picture with [`PAD`] to a cube of side max(n_i).
pub fn square_picture(p: &RectPicture) -> Picture {
    let d = p.shape.len();
    let n = *p.shape.iter().max().expect("nonempty shape");
    let mut alphabet = p.alphabet.clone();
    let padded = p.shape.iter().any(|&s| s < n);
    if padded {
        alphabet.push(PAD.to_string());
    }
    let pad = alphabet.len() - 1;
    let cells = all_cells(d, n)
        .map(|a| if a.iter().zip(&p.shape).all(|(&x, &s)| x <= s) { p.cells[p.rank(&a)] } else { pad })
        .collect();
    // the pad symbol is reserved for user alphabets, so bypass the check
    Picture { d, n, alphabet, cells }
}

/// max(n_1..n_d) ≤ c·n_i for every i.
pub fn is_c_balanced(shape: &[usize], c: usize) -> bool {
    let m = shape.iter().copied().max().unwrap_or(0);
    shape.iter().all(|&s| m <= c * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    Pixel,
    Coordinate,
}

impl std::str::FromStr for EncodingKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixel" => Ok(EncodingKind::Pixel),
            "coordinate" | "coord" => Ok(EncodingKind::Coordinate),
            _ => Err(Error::Format(format!("unknown encoding {s:?}"))),
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingKind::Pixel => "pixel",
            EncodingKind::Coordinate => "coordinate",
        })
    }
}

/// A relation over `[1,m]^arity` stored as a dense bit table indexed by [`rank`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub arity: usize,
    pub bits: Vec<bool>,
}

impl Relation {
    pub fn empty(m: usize, arity: usize) -> Self {
        Relation { arity, bits: vec![false; m.pow(arity as u32)] }
    }

    pub fn contains(&self, m: usize, t: &[usize]) -> bool {
        self.bits[rank(m, t)]
    }

    pub fn insert(&mut self, m: usize, t: &[usize]) {
        self.bits[rank(m, t)] = true;
    }

    /// Tuples in lexicographic order, 1-based.
    pub fn tuples(&self, m: usize) -> Vec<Vec<usize>> {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| coords(self.arity, m, r)).collect()
    }
}

/// Domain `[1,size]` with named relations and named unary functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    pub size: usize,
    pub relations: BTreeMap<String, Relation>,
    /// `functions[f][e-1]` is the image of `e`.
    pub functions: BTreeMap<String, Vec<usize>>,
}

impl FiniteStructure {
    pub fn new(size: usize) -> Self {
        FiniteStructure { size, relations: BTreeMap::new(), functions: BTreeMap::new() }
    }

    pub fn add_relation(
        &mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<()> {
        let mut r = Relation::empty(self.size, arity);
        for t in tuples {
            if t.len() != arity || t.iter().any(|&x| x == 0 || x > self.size) {
                return Err(Error::OutOfRange(format!("tuple {t:?} for {name}")));
            }
            r.insert(self.size, &t);
        }
        self.relations.insert(name.to_string(), r);
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, f: Vec<usize>) -> Result<()> {
        if f.len() != self.size || f.iter().any(|&x| x == 0 || x > self.size) {
            return Err(Error::OutOfRange(format!("function {name} is not total on the domain")));
        }
        self.functions.insert(name.to_string(), f);
        Ok(())
    }

    pub fn holds(&self, name: &str, t: &[usize]) -> Option<bool> {
        self.relations.get(name).map(|r| r.contains(self.size, t))
    }
}

/// Name of the input relation for letter `s`.
pub fn letter_relation(s: &str) -> String {
    format!("Q_{s}")
}

/// Pixel encoding: the domain is the cells ranked lexicographically.
pub fn pixel_structure(p: &Picture) -> FiniteStructure {
    let (d, n) = (p.d, p.n);
    let m = p.cells.len();
    let mut s = FiniteStructure::new(m);
    for (k, sym) in p.alphabet.iter().enumerate() {
        let tuples = (0..m).filter(|&r| p.cells[r] == k).map(|r| vec![r + 1]);
        s.add_relation(&letter_relation(sym), 1, tuples).expect("in range");
    }
    for i in 0..d {
        let mins = (0..m).filter(|&r| coords(d, n, r)[i] == 1).map(|r| vec![r + 1]);
        s.add_relation(&format!("min_{}", i + 1), 1, mins).expect("in range");
        let maxs = (0..m).filter(|&r| coords(d, n, r)[i] == n).map(|r| vec![r + 1]);
        s.add_relation(&format!("max_{}", i + 1), 1, maxs).expect("in range");
        let suc = (0..m)
            .map(|r| {
                let mut a = coords(d, n, r);
                a[i] = if a[i] == n { 1 } else { a[i] + 1 };
                rank(n, &a) + 1
            })
            .collect();
        s.add_function(&format!("suc_{}", i + 1), suc).expect("total");
    }
    s
}

/// Coordinate encoding: the domain is `[1,n]` with d-ary letter relations.
pub fn coordinate_structure(p: &Picture) -> FiniteStructure {
    let (d, n) = (p.d, p.n);
    let mut s = FiniteStructure::new(n);
    for (k, sym) in p.alphabet.iter().enumerate() {
        let tuples = all_cells(d, n).filter(|a| p.get(a) == k);
        s.add_relation(&letter_relation(sym), d, tuples).expect("in range");
    }
    let lt = (1..=n).flat_map(|x| (x + 1..=n).map(move |y| vec![x, y]));
    s.add_relation("<", 2, lt).expect("in range");
    s.add_relation("min", 1, [vec![1]]).expect("in range");
    s.add_relation("max", 1, [vec![n]]).expect("in range");
    s.add_function("suc", (1..=n).map(|x| if x == n { 1 } else { x + 1 }).collect()).expect("total");
    s
}

/// Encodes a picture with the chosen encoding.
pub fn encode(p: &Picture, kind: EncodingKind) -> FiniteStructure {
    match kind {
        EncodingKind::Pixel => pixel_structure(p),
        EncodingKind::Coordinate => coordinate_structure(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Picture {
        make_picture(1, 2, &["a", "b"], &["a", "b"]).unwrap()
    }

    fn square01() -> Picture {
        make_picture(2, 2, &["0", "1"], &["0", "1", "1", "0"]).unwrap()
    }

    #[test]
    fn construction_and_errors() {
        let p = square01();
        assert_eq!(p.symbol(&[1, 2]), "1");
        assert_eq!(p.symbol(&[2, 1]), "1");
        assert_eq!(p.symbol(&[2, 2]), "0");
        assert!(matches!(make_picture(1, 2, &["a", "#"], &["a", "#"]), Err(Error::ReservedSymbol(_))));
        assert!(make_picture(1, 2, &["a"], &["a"]).is_err());
        assert!(matches!(make_picture(1, 1, &["a"], &["b"]), Err(Error::NotInAlphabet(_))));
    }

    #[test]
    fn bordered() {
        let w = ab();
        assert_eq!(w.bordered_value(&[0]).unwrap(), "#");
        assert_eq!(w.bordered_value(&[1]).unwrap(), "a");
        assert_eq!(w.bordered_value(&[3]).unwrap(), "#");
        assert!(w.bordered_value(&[4]).is_err());
        assert_eq!(square01().bordered_value(&[3, 1]).unwrap(), "#");
    }

    #[test]
    fn pixel_encoding_of_ab() {
        let s = pixel_structure(&ab());
        assert_eq!(s.size, 2);
        assert_eq!(s.relations["Q_a"].tuples(2), vec![vec![1]]);
        assert_eq!(s.relations["Q_b"].tuples(2), vec![vec![2]]);
        assert_eq!(s.relations["min_1"].tuples(2), vec![vec![1]]);
        assert_eq!(s.relations["max_1"].tuples(2), vec![vec![2]]);
        assert_eq!(s.functions["suc_1"], vec![2, 1]);
        let q = pixel_structure(&square01());
        let last = rank(2, &[2, 2]) + 1;
        for i in 1..=2 {
            assert_eq!(q.holds(&format!("min_{i}"), &[last]), Some(false));
            assert_eq!(q.holds(&format!("max_{i}"), &[last]), Some(true));
        }
        let one = make_picture(2, 1, &["a"], &["a"]).unwrap();
        let o = pixel_structure(&one);
        assert_eq!(o.functions["suc_1"], vec![1]);
        assert_eq!(o.holds("min_2", &[1]), Some(true));
        assert_eq!(o.holds("max_2", &[1]), Some(true));
    }

    #[test]
    fn coordinate_encoding() {
        let s = coordinate_structure(&ab());
        assert_eq!(s.relations["Q_a"].tuples(2), vec![vec![1]]);
        assert_eq!(s.relations["<"].tuples(2), vec![vec![1, 2]]);
        assert_eq!(s.relations["min"].tuples(2), vec![vec![1]]);
        assert_eq!(s.relations["max"].tuples(2), vec![vec![2]]);
        let q = coordinate_structure(&square01());
        assert_eq!(q.relations["Q_1"].tuples(2), vec![vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn squaring_and_balance() {
        let one = RectPicture::new(vec![1, 1], vec!["a".into()], &["a"]).unwrap();
        assert_eq!(square_picture(&one).alphabet(), &["a".to_string()]);
        let r = RectPicture::new(vec![2, 1], vec!["a".into(), "b".into()], &["a", "b"]).unwrap();
        let q = square_picture(&r);
        assert_eq!(q.n(), 2);
        assert_eq!(q.symbol(&[1, 1]), "a");
        assert_eq!(q.symbol(&[2, 1]), "b");
        assert_eq!(q.symbol(&[1, 2]), PAD);
        assert_eq!(q.symbol(&[2, 2]), PAD);
        let cube = RectPicture::new(vec![3, 2, 3], vec!["a".into()], &vec!["a"; 18]).unwrap();
        let c = square_picture(&cube);
        assert_eq!(c.cells().iter().filter(|&&k| c.alphabet()[k] == PAD).count(), 9);
        assert!(is_c_balanced(&[3, 3], 1));
        assert!(!is_c_balanced(&[4, 2], 1));
        assert!(is_c_balanced(&[4, 2], 2));
    }

    #[test]
    fn lex_successor_examples() {
        assert_eq!(lex_successor(2, &[1, 2]), Some(vec![2, 1]));
        assert_eq!(lex_successor(2, &[2, 2]), None);
        // oracle: the 8 cells of [1,2]^3 listed in lexicographic order
        let order: Vec<Vec<usize>> =
            (1..=2).flat_map(|a| (1..=2).flat_map(move |b| (1..=2).map(move |c| vec![a, b, c]))).collect();
        let pos = order.iter().position(|c| c == &vec![1, 2, 2]).unwrap();
        assert_eq!(lex_successor(2, &[1, 2, 2]), Some(order[pos + 1].clone()));
        assert_eq!(lex_successor(2, &[1, 2, 2]), Some(vec![2, 1, 1]));
    }

    #[test]
    fn text_round_trip() {
        let p = square01();
        let t = p.to_text();
        assert_eq!(t, "2 2\n0 1\n0 1\n1 0\n");
        assert_eq!(Picture::parse(&t).unwrap(), p);
        assert!(Picture::parse("1 2\na b\na\n").is_err());
    }
}
