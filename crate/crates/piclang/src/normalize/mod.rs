//! Normal forms: localized monadic pixel sentences, cardinality counters,
//! universal Skolemization with witness relations, and arity reduction.

mod arity;
mod cardinality;
mod localize;
mod skolem;

use std::collections::BTreeSet;

pub use arity::reduce_arities;
pub use cardinality::{cardinality_to_monadic, CardinalityFormula, CardinalitySentence, MAX_THRESHOLD};
pub use localize::{local_form, localize_pixel_sentence, LocalForm, MAX_SHIFT};
pub use skolem::skolemize_universal;

use crate::logic::EsoSentence;

/// Deterministic fresh relation names avoiding every name already in use.
pub(crate) struct Fresh {
    used: BTreeSet<String>,
}

impl Fresh {
    pub fn for_sentence(s: &EsoSentence) -> Self {
        let mut used: BTreeSet<String> = s.guessed.iter().map(|(g, _)| g.clone()).collect();
        used.extend(s.sig.alphabet.iter().map(|a| crate::picture::letter_relation(a)));
        Fresh { used }
    }

    /// `base` itself when unused, else `base'`, `base''`, ...
    pub fn name(&mut self, base: &str) -> String {
        let mut s = base.to_string();
        while self.used.contains(&s) || !crate::logic::ast::is_identifier(&s) {
            s.push('\'');
        }
        self.used.insert(s.clone());
        s
    }
}
