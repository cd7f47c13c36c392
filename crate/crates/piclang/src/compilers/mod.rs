//! Compilers between tiling systems, cellular automata and ESO sentences.

mod cellular;
pub mod symbolic;
mod tiling;

pub use cellular::automaton_to_sentence;
pub use symbolic::{sentence_to_automaton, SymbolicAutomaton, DEFAULT_STATE_CAP};
pub use tiling::{sentence_to_tiling, tiling_to_sentence, MAX_COLORS};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::CellularAutomaton;
    use crate::gen::{random_automaton, random_tiling_system};
    use crate::logic::{classify_fragment, parse_sentence, Signature};
    use crate::model_check::{equivalent_up_to, eso_witness, LanguageDef, Strategy, DEFAULT_PICTURE_CAP};
    use crate::picture::{coordinate_structure, Picture};
    use crate::sorted::sort_pipeline;
    use crate::tiling::{TileSet, TilingSystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn same(a: &LanguageDef, b: &LanguageDef, d: usize, sigma: &[String], n: usize) {
        let cex = equivalent_up_to(a, b, d, sigma, n, DEFAULT_PICTURE_CAP).unwrap();
        assert!(cex.is_none(), "{a:?} vs {b:?}: {}", cex.unwrap());
    }

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn real_time(a: &CellularAutomaton) -> LanguageDef {
        LanguageDef::Automaton { automaton: a.clone(), c: 1, c_prime: 1 }
    }

    fn symbolic(a: SymbolicAutomaton) -> LanguageDef {
        LanguageDef::custom("symbolic", move |p| a.accepts_real_time(p))
    }

    fn and_automaton() -> CellularAutomaton {
        CellularAutomaton::from_json(
            r##"{"sigma":["0","1"],"gamma":["0","1"],"accepting":["1"],"delta":[
            {"state":"0","neighbors":["0"],"results":["0"]},{"state":"0","neighbors":["1"],"results":["0"]},
            {"state":"0","neighbors":["#"],"results":["0"]},{"state":"1","neighbors":["0"],"results":["0"]},
            {"state":"1","neighbors":["1"],"results":["1"]},{"state":"1","neighbors":["#"],"results":["1"]}]}"##,
        )
        .unwrap()
    }

    #[test]
    fn tiling_sentences_trivial_systems() {
        let full = TilingSystem::new(ab(), ab(), vec![0, 1], vec![TileSet::full(1, 2)]).unwrap();
        let s = tiling_to_sentence(&full);
        assert_eq!(classify_fragment(&s).max_arity, 1);
        same(&LanguageDef::Sentence(s), &LanguageDef::custom("all", |_| Ok(true)), 1, &ab(), 4);
        let empty = TilingSystem::new(ab(), ab(), vec![0, 1], vec![TileSet::new(1, 2, [])]).unwrap();
        same(
            &LanguageDef::Sentence(tiling_to_sentence(&empty)),
            &LanguageDef::custom("none", |_| Ok(false)),
            1,
            &ab(),
            4,
        );
    }

    #[test]
    fn tiling_sentence_alternating_words() {
        // Δ₁ = {(#,a),(a,b),(b,a),(b,#)}: (ab)^k
        let ts = TilingSystem::new(ab(), ab(), vec![0, 1], vec![TileSet::new(1, 2, [(2, 0), (0, 1), (1, 0), (1, 2)])])
            .unwrap();
        let s = tiling_to_sentence(&ts);
        same(&LanguageDef::Tiling(ts.clone()), &LanguageDef::Sentence(s.clone()), 1, &ab(), 5);
        let back = sentence_to_tiling(&s, 1).unwrap();
        same(&LanguageDef::Tiling(ts), &LanguageDef::Tiling(back), 1, &ab(), 5);
    }

    #[test]
    fn tiling_colors() {
        let one = parse_sentence("(forall (x) (implies (min_1 x) (Q_a x)))", &Signature::pixel(1, &["a"])).unwrap();
        assert_eq!(sentence_to_tiling(&one, 1).unwrap().gamma().len(), 1);
        let sig = Signature::pixel(1, &["a", "b"]);
        let s = parse_sentence(
            "(exists-rel ((U 1)) (forall (x) (and (implies (min_1 x) (U x)) (implies (not (max_1 x)) (iff (U x) (not (U (suc_1 x))))) (implies (max_1 x) (iff (U x) (Q_a x))))))",
            &sig,
        )
        .unwrap();
        let ts = sentence_to_tiling(&s, 1).unwrap();
        assert_eq!(ts.gamma().len(), 4);
        same(&LanguageDef::Sentence(s), &LanguageDef::Tiling(ts), 1, &ab(), 5);
    }

    #[test]
    fn random_tiling_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..6 {
            let d = 1 + case % 2;
            let ts = random_tiling_system(&mut rng, d, 2, 3, 0.6);
            let s = tiling_to_sentence(&ts);
            let max_n = if d == 1 { 4 } else { 2 };
            same(&LanguageDef::Tiling(ts.clone()), &LanguageDef::Sentence(s.clone()), d, ts.sigma(), max_n);
            let back = sentence_to_tiling(&s, d).unwrap();
            same(&LanguageDef::Tiling(ts.clone()), &LanguageDef::Tiling(back), d, ts.sigma(), max_n);
        }
    }

    #[test]
    fn sentence_to_tiling_localizes_first() {
        let sig = Signature::pixel(2, &["a", "b"]);
        let s = parse_sentence("(forall (x) (implies (Q_a x) (or (max_2 x) (Q_b (suc_2 (suc_1 x))))))", &sig).unwrap();
        let ts = sentence_to_tiling(&s, 2).unwrap();
        same(&LanguageDef::Sentence(s), &LanguageDef::Tiling(ts), 2, &ab(), 3);
    }

    #[test]
    fn automaton_sentences() {
        let and = and_automaton();
        let s = automaton_to_sentence(&and);
        assert!(classify_fragment(&s).sorted);
        let bits = vec!["0".to_string(), "1".to_string()];
        same(&real_time(&and), &LanguageDef::Sentence(s.clone()), 1, &bits, 4);
        let ident = CellularAutomaton::from_json(
            r##"{"sigma":["a","b"],"gamma":["a","b"],"accepting":["a","b"],"delta":[
            {"state":"a","neighbors":["a"],"results":["a"]},{"state":"a","neighbors":["b"],"results":["a"]},
            {"state":"a","neighbors":["#"],"results":["a"]},{"state":"b","neighbors":["a"],"results":["b"]},
            {"state":"b","neighbors":["b"],"results":["b"]},{"state":"b","neighbors":["#"],"results":["b"]}]}"##,
        )
        .unwrap();
        same(
            &LanguageDef::Sentence(automaton_to_sentence(&ident)),
            &LanguageDef::custom("all", |_| Ok(true)),
            1,
            &ab(),
            4,
        );
        let blocked = CellularAutomaton::new(1, ab(), vec![0, 1], vec![], Default::default()).unwrap();
        same(
            &LanguageDef::Sentence(automaton_to_sentence(&blocked)),
            &LanguageDef::custom("none", |_| Ok(false)),
            1,
            &ab(),
            4,
        );
    }

    #[test]
    fn automaton_witnesses_are_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_automaton(&mut rng, 1, 2, 3, 0.8);
        let s = automaton_to_sentence(&a);
        let g = a.gamma().len();
        for p in (1..=4).flat_map(|n| Picture::enumerate(1, n, &ab()).collect::<Vec<_>>()) {
            let n = p.n();
            if let Some(w) = eso_witness(&coordinate_structure(&p), &s, Strategy::Ground).unwrap() {
                for cell in 0..n * n {
                    let on = w.values().filter(|r| r.bits[cell]).count();
                    assert_eq!(on, 1, "{} cell {cell} of {g} states", p.inline());
                }
            }
        }
    }

    #[test]
    fn random_automata_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..6 {
            let a = random_automaton(&mut rng, 1, 2, 3, 0.7);
            same(&real_time(&a), &LanguageDef::Sentence(automaton_to_sentence(&a)), 1, &ab(), 4);
        }
        let a = random_automaton(&mut rng, 2, 2, 2, 0.8);
        same(&real_time(&a), &LanguageDef::Sentence(automaton_to_sentence(&a)), 2, &ab(), 2);
    }

    #[test]
    fn symbolic_automata_from_sorted_sentences() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        let t = parse_sentence("(forall (x t) (true))", &sig).unwrap();
        same(&symbolic(sentence_to_automaton(&t, 1).unwrap()), &LanguageDef::custom("all", |_| Ok(true)), 1, &ab(), 4);
        let s = parse_sentence("(forall (x t) (implies (min t) (Q_a x)))", &sig).unwrap();
        let aut = sentence_to_automaton(&s, 1).unwrap();
        same(&symbolic(aut.clone()), &LanguageDef::Sentence(s.clone()), 1, &ab(), 4);
        let explicit = aut.to_explicit(DEFAULT_STATE_CAP).unwrap();
        same(&real_time(&explicit), &LanguageDef::Sentence(s), 1, &ab(), 4);
        let not_sorted = parse_sentence("(exists-rel ((R 2)) (forall (x t) (R t x)))", &sig).unwrap();
        assert!(sentence_to_automaton(&not_sorted, 1).is_err());
        let big = parse_sentence("(exists-rel ((R 2) (S 2) (U 2)) (forall (x t) (and (R x t) (S x t) (U x t))))", &sig)
            .unwrap();
        assert!(sentence_to_automaton(&big, 1).unwrap().to_explicit(1 << 10).is_err());
    }

    #[test]
    fn symbolic_automata_read_wraps() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        // R is the input copied along time; the cyclic read R(x, suc t) at t = n sees t = 1
        let s = parse_sentence(
            "(exists-rel ((R 2)) (forall (x t) (and (implies (min t) (iff (R x t) (Q_a x))) (iff (R x t) (R x (suc t))) (or (R x t) (R (suc x) t)))))",
            &sig,
        )
        .unwrap();
        same(&symbolic(sentence_to_automaton(&s, 1).unwrap()), &LanguageDef::Sentence(s), 1, &ab(), 4);
    }

    #[test]
    fn automaton_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..4 {
            let a = random_automaton(&mut rng, 1, 2, 3, 0.7);
            let back = sentence_to_automaton(&automaton_to_sentence(&a), 1).unwrap();
            same(&real_time(&a), &symbolic(back), 1, &ab(), 3);
        }
        let a = random_automaton(&mut rng, 2, 1, 2, 0.8);
        let back = sentence_to_automaton(&automaton_to_sentence(&a), 2).unwrap();
        same(&real_time(&a), &symbolic(back), 2, &["a".to_string()], 3);
    }

    #[test]
    fn pipeline_outputs_become_automata() {
        let sig = Signature::coordinate(1, &["a", "b"]);
        for text in [
            "(forall (x y) (iff (Q_a x) (Q_a y)))",
            "(exists-rel ((R 2)) (forall (x y) (and (iff (R x y) (R y x)) (implies (< x y) (or (R x y) (Q_a y))))))",
        ] {
            let s = parse_sentence(text, &sig).unwrap();
            let sorted = sort_pipeline(&s, 1).unwrap();
            same(&symbolic(sentence_to_automaton(&sorted, 1).unwrap()), &LanguageDef::Sentence(s), 1, &ab(), 3);
        }
    }
}
