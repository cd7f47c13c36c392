//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any failure.
//! Every criterion tolerates 0 disagreements; criterion 1 also has a 300 s budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use piclang::automaton::CellularAutomaton;
use piclang::compilers::{automaton_to_sentence, sentence_to_automaton, sentence_to_tiling, tiling_to_sentence};
use piclang::gen::{random_automaton, random_cardinality, random_tiling_system, random_word_sentence};
use piclang::logic::{is_sorted, parse_sentence, EsoSentence, Signature};
use piclang::model_check::{check_eso, mirror_member};
use piclang::normalize::cardinality_to_monadic;
use piclang::picture::{coordinate_structure, pixel_structure, Picture};
use piclang::sorted::{
    build_perm_tree, check_simulation, code_relation, coding_conditions, is_alternated, propagate_simulation,
    sort_pipeline, Permutation, Relation,
};
use piclang::tiling::recognizes;
use piclang::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0x5eed;
const TIME_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(disagreements: usize, detail: String) -> Outcome {
    Outcome { ok: disagreements == 0, detail: format!("{detail}, {disagreements} disagreements") }
}

/// Disagreements, and members of the first language, over a batch of comparisons.
#[derive(Default)]
struct Tally {
    diff: usize,
    members: usize,
    total: usize,
}

impl Tally {
    fn add(&mut self, other: Tally) {
        self.diff += other.diff;
        self.members += other.members;
        self.total += other.total;
    }

    fn outcome(&self, what: String) -> Outcome {
        outcome(self.diff, format!("{what}, {} of {} pictures accepted", self.members, self.total))
    }
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ criterion)
}

fn pictures(d: usize, max_n: usize, sigma: &[String]) -> Vec<Picture> {
    (1..=max_n).flat_map(|n| Picture::enumerate(d, n, sigma).collect::<Vec<_>>()).collect()
}

fn count_diff(
    ps: &[Picture],
    a: impl Fn(&Picture) -> Result<bool> + Sync,
    b: impl Fn(&Picture) -> Result<bool> + Sync,
) -> Result<Tally> {
    let verdicts: Vec<(bool, bool)> = ps.par_iter().map(|p| Ok((a(p)?, b(p)?))).collect::<Result<_>>()?;
    Ok(Tally {
        diff: verdicts.iter().filter(|(x, y)| x != y).count(),
        members: verdicts.iter().filter(|(x, _)| *x).count(),
        total: verdicts.len(),
    })
}

fn side(d: usize) -> usize {
    if d == 1 {
        6
    } else {
        3
    }
}

fn tiling_cases() -> Vec<piclang::tiling::TilingSystem> {
    let mut r = rng(1);
    (0..24)
        .map(|k| {
            let d = 1 + k % 2;
            let sigma = r.random_range(1..=2);
            let gamma = r.random_range(sigma..=3);
            let density = r.random_range(0.4..0.8);
            random_tiling_system(&mut r, d, sigma, gamma, density)
        })
        .collect()
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let cases = tiling_cases();
    let mut tally = Tally::default();
    for ts in &cases {
        let s = tiling_to_sentence(ts);
        let ps = pictures(ts.d(), side(ts.d()), ts.sigma());
        tally.add(count_diff(&ps, |p| recognizes(ts, p), |p| check_eso(&pixel_structure(p), &s))?);
    }
    let elapsed = start.elapsed();
    let mut o = tally.outcome(format!("{} tiling systems, {:.1}s", cases.len(), elapsed.as_secs_f64()));
    o.ok &= elapsed <= TIME_BUDGET;
    Ok(o)
}

fn criterion_2() -> Result<Outcome> {
    let cases = tiling_cases();
    let mut tally = Tally::default();
    for ts in &cases {
        let back = sentence_to_tiling(&tiling_to_sentence(ts), ts.d())?;
        let ps = pictures(ts.d(), side(ts.d()), ts.sigma());
        tally.add(count_diff(&ps, |p| recognizes(ts, p), |p| recognizes(&back, p))?);
    }
    Ok(tally.outcome(format!("{} round trips", cases.len())))
}

fn criterion_3() -> Result<Outcome> {
    let mut r = rng(3);
    let mut tally = Tally::default();
    let count = 24;
    for k in 0..count {
        let d = 1 + k % 2;
        let sig = Signature::pixel(d, &["a", "b"]);
        let c = random_cardinality(&mut r, &sig, 3);
        let s = cardinality_to_monadic(&c, d)?;
        let ps = pictures(d, 3, &sig.alphabet);
        tally.add(count_diff(&ps, |p| c.holds(p), |p| check_eso(&pixel_structure(p), &s))?);
    }
    Ok(tally.outcome(format!("{count} cardinality sentences")))
}

fn automaton_diff(a: &CellularAutomaton, max_n: usize) -> Result<Tally> {
    let s = automaton_to_sentence(a);
    let ps = pictures(a.d(), max_n, &a.sigma_names());
    count_diff(&ps, |p| a.accepts_real_time(p), |p| check_eso(&coordinate_structure(p), &s))
}

fn criterion_4() -> Result<Outcome> {
    let mut r = rng(4);
    let mut tally = Tally::default();
    for _ in 0..20 {
        let gamma = r.random_range(2..=4);
        let density = r.random_range(0.5..0.9);
        let a = random_automaton(&mut r, 1, 2, gamma, density);
        tally.add(automaton_diff(&a, 4)?);
    }
    for _ in 0..5 {
        let density = r.random_range(0.6..0.9);
        let a = random_automaton(&mut r, 2, 2, 2, density);
        tally.add(automaton_diff(&a, 3)?);
    }
    Ok(tally.outcome("20 1-D and 5 2-D automata".into()))
}

fn word_sentences() -> Result<Vec<(EsoSentence, EsoSentence)>> {
    let mut r = rng(5);
    (0..20)
        .map(|_| {
            let s = random_word_sentence(&mut r, 3);
            Ok((s.clone(), sort_pipeline(&s, 1)?))
        })
        .collect()
}

fn words(max_n: usize) -> Vec<Picture> {
    pictures(1, max_n, &["a".to_string(), "b".to_string()])
}

fn criterion_5(cases: &[(EsoSentence, EsoSentence)]) -> Result<Outcome> {
    let mut tally = Tally::default();
    let ws = words(4);
    for (s, sorted) in cases {
        if !is_sorted(sorted, 1, 2)? {
            tally.diff += 1;
        }
        tally.add(count_diff(
            &ws,
            |p| check_eso(&coordinate_structure(p), s),
            |p| check_eso(&coordinate_structure(p), sorted),
        )?);
    }
    Ok(tally.outcome(format!("{} word sentences", cases.len())))
}

fn criterion_6(cases: &[(EsoSentence, EsoSentence)]) -> Result<Outcome> {
    let mut tally = Tally::default();
    let ws = words(3);
    for (_, sorted) in cases {
        let a = sentence_to_automaton(sorted, 1)?;
        tally.add(count_diff(&ws, |p| a.accepts_real_time(p), |p| check_eso(&coordinate_structure(p), sorted))?);
    }
    Ok(tally.outcome(format!("{} symbolic automata", cases.len())))
}

fn criterion_7() -> Result<Outcome> {
    let mut r = rng(7);
    let mut violations = 0;
    let count = 60;
    for k in 0..count {
        let d = 2 + k % 2;
        let n = r.random_range(1..=4);
        let density = r.random_range(0.2..0.8);
        let q = Relation::from_fn(d - 1, n, |_| r.random_bool(density));
        let sim = propagate_simulation(d, &q)?;
        violations += sim.conflicts + check_simulation(&sim, &q).total();
    }
    Ok(outcome(violations, format!("{count} simulations")))
}

/// T_4 as (node, parent) pairs, following the four construction steps from T_2.
const T4: [(&str, &str); 23] = [
    ("1243", "1234"),
    ("1423", "1243"),
    ("1324", "1423"),
    ("4321", "1324"),
    ("2341", "4321"),
    ("3421", "4321"),
    ("4123", "1423"),
    ("2143", "4123"),
    ("3124", "4123"),
    ("4213", "1243"),
    ("2413", "4213"),
    ("3214", "4213"),
    ("1432", "1234"),
    ("1342", "1432"),
    ("4312", "1342"),
    ("2314", "4312"),
    ("3412", "4312"),
    ("4132", "1432"),
    ("2134", "4132"),
    ("3142", "4132"),
    ("4231", "1234"),
    ("2431", "4231"),
    ("3241", "4231"),
];

fn criterion_8() -> Result<Outcome> {
    let mut bad = 0;
    for d in 2..=5 {
        let t = build_perm_tree(d)?;
        let nodes: usize = (1..=d).product();
        bad += (t.nodes.len() != nodes) as usize;
        bad += !(t.nodes[0].perm.is_identity() && t.nodes[0].parent.is_none()) as usize;
        let mut perms: Vec<_> = t.nodes.iter().map(|n| n.perm.clone()).collect();
        perms.sort();
        bad += (perms != Permutation::all(d)) as usize;
        for k in 0..t.nodes.len() {
            let path = t.path(k);
            let prod = path
                .iter()
                .fold(Permutation::identity(d), |acc, &(i, j)| acc.compose(&Permutation::transposition(d, i, j)));
            bad += !(is_alternated(d, &path) && prod == t.nodes[k].perm) as usize;
        }
    }
    let t = build_perm_tree(4)?;
    let got: Vec<(String, String)> =
        t.nodes.iter().filter_map(|n| n.parent.map(|p| (n.perm.compact(), t.nodes[p].perm.compact()))).collect();
    let mut want: Vec<(String, String)> = T4.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect();
    let mut got_sorted = got.clone();
    got_sorted.sort();
    want.sort();
    bad += got_sorted.iter().zip(&want).filter(|(g, w)| g != w).count() + got_sorted.len().abs_diff(want.len());
    Ok(outcome(bad, "trees for d = 2..5, T_4 node-for-node".into()))
}

fn criterion_9() -> Result<Outcome> {
    let mut r = rng(9);
    let mut violations = 0;
    let (mut random, mut generated, mut coherent) = (0, 0, 0);
    for k in 0..240 {
        let d = 1 + k % 3;
        let n = r.random_range(1..=3);
        let family = if k % 2 == 0 {
            random += 1;
            let perms = Permutation::all(d).len();
            let density = r.random_range(0.1..0.9);
            (0..perms)
                .map(|_| Relation::from_fn(d, n, |x| x.windows(2).all(|w| w[0] <= w[1]) && r.random_bool(density)))
                .collect::<Vec<_>>()
        } else {
            generated += 1;
            let density = r.random_range(0.1..0.9);
            code_relation(&Relation::from_fn(d, n, |_| r.random_bool(density)))
        };
        let v = coding_conditions(&family)?;
        violations += !v.agree() as usize;
        if k % 2 == 0 {
            coherent += v.generated as usize;
        } else {
            violations += !v.generated as usize;
        }
    }
    Ok(outcome(violations, format!("{random} random ({coherent} coherent) and {generated} generated families")))
}

const MIRROR: &str = "(forall (x y) (and (iff (Q_0 x y) (Q_0 y x)) (iff (Q_1 x y) (Q_1 y x))))";

fn criterion_10() -> Result<Outcome> {
    let sig = Signature::coordinate(2, &["0", "1"]);
    let s = parse_sentence(MIRROR, &sig)?;
    let ps = pictures(2, 3, &sig.alphabet);
    Ok(count_diff(&ps, mirror_member, |p| check_eso(&coordinate_structure(p), &s))?.outcome("Mirror".into()))
}

fn main() -> ExitCode {
    let words = word_sentences();
    type Run<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;
    let runs: Vec<(&str, Run)> = vec![
        ("tiling systems to sentences", Box::new(criterion_1)),
        ("sentences back to tiling systems", Box::new(criterion_2)),
        ("cardinality normalization", Box::new(criterion_3)),
        ("automata to sentences", Box::new(criterion_4)),
        ("sorted pipeline", Box::new(|| criterion_5(words.as_ref().map_err(Clone::clone)?))),
        ("sorted sentences to automata", Box::new(|| criterion_6(words.as_ref().map_err(Clone::clone)?))),
        ("d-simulations", Box::new(criterion_7)),
        ("permutation trees", Box::new(criterion_8)),
        ("relation codings", Box::new(criterion_9)),
        ("mirror oracle", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in runs.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(o) => (o.ok, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !ok as usize;
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
