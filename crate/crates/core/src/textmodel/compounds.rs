use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::token::Sentence;
use crate::lexicon::{Feature, Lexicon, Pos, WordEntry};

/// A content unit: a single content token or a run of adjacent nouns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    /// First token index.
    pub start: usize,
    /// Exclusive end token index.
    pub end: usize,
    pub lemma: String,
    pub pos: Pos,
    pub features: BTreeSet<Feature>,
}

impl Unit {
    pub fn has(&self, f: Feature) -> bool {
        self.features.contains(&f)
    }

    pub fn overlaps(&self, span: &std::ops::Range<usize>) -> bool {
        self.start < span.end && span.start < self.end
    }
}

/// Words after which a noun/verb homograph is read as a verb.
const VERB_CUES: &[&str] =
    &["to", "shall", "must", "should", "will", "can", "may", "might", "could", "would", "cannot", "do", "please"];

fn entry(entries: &[WordEntry], pos: Pos) -> Option<&WordEntry> {
    entries.iter().find(|e| e.pos == pos)
}

/// Splits a sentence into content units. Stopwords and punctuation are
/// dropped; maximal runs of adjacent noun-category tokens are merged into one
/// compound whose lemma is the space-joined member lemmas.
///
/// Without a tagger, a noun/verb homograph ("heat") counts as a verb when it
/// opens the clause (no content word before it) or follows a modal or "to".
pub fn group_compounds(s: &Sentence, lex: &Lexicon) -> Vec<Unit> {
    let mut units: Vec<Unit> = Vec::new();
    let mut seen_content = false;
    let mut run_open = false;
    for (i, tok) in s.tokens.iter().enumerate() {
        let entries = if tok.is_punct() { Vec::new() } else { lex.categorize(&tok.surface) };
        if entries.is_empty() {
            run_open = false;
            continue;
        }
        let lemma = lex.lemma(&tok.surface);
        let verb_position = !seen_content
            || i.checked_sub(1).is_some_and(|p| VERB_CUES.contains(&s.tokens[p].surface.to_lowercase().as_str()));
        let noun = entry(&entries, Pos::Noun);
        let verb = entry(&entries, Pos::Verb);
        let is_noun = noun.is_some() && !(verb.is_some() && verb_position);
        let (pos, features) = match (is_noun, noun, verb) {
            (true, Some(n), _) => (Pos::Noun, n.features.clone()),
            (_, _, Some(v)) => (Pos::Verb, v.features.clone()),
            _ => (entries[0].pos, entries[0].features.clone()),
        };
        if matches!(pos, Pos::Noun | Pos::Adjective | Pos::Verb) {
            seen_content = true;
        }
        match units.last_mut() {
            Some(prev) if is_noun && run_open && prev.end == i => {
                prev.end = i + 1;
                prev.lemma.push(' ');
                prev.lemma.push_str(&lemma);
                prev.features = features;
            }
            _ => units.push(Unit { start: i, end: i + 1, lemma, pos, features }),
        }
        run_open = is_noun;
    }
    units
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::tokenize;
    use proptest::prelude::*;

    fn lemmas(text: &str) -> Vec<String> {
        let lex = Lexicon::builtin();
        let s = &tokenize(text)[0];
        group_compounds(s, &lex).into_iter().map(|u| u.lemma).collect()
    }

    #[test]
    fn fire_alarms_compound() {
        assert_eq!(lemmas("minimize fire alarms"), vec!["minimize", "fire alarm"]);
    }

    #[test]
    fn stopwords_dropped() {
        assert_eq!(lemmas("close the pipe"), vec!["close", "pipe"]);
    }

    #[test]
    fn three_noun_compound() {
        // outside: unknown, default noun; air, temperature: nouns in the
        // word-category file
        assert_eq!(lemmas("outside air temperature"), vec!["outside air temperature"]);
    }

    #[test]
    fn homograph_reading() {
        let lex = Lexicon::builtin();
        let s = &tokenize("heat the probe")[0];
        let units = group_compounds(s, &lex);
        assert_eq!(units[0].pos, Pos::Verb);
        assert!(units[0].has(Feature::Durative));
        let s = &tokenize("the engine heat")[0];
        let units = group_compounds(s, &lex);
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].lemma, "engine heat");
    }

    #[test]
    fn punctuation_breaks_runs() {
        assert_eq!(lemmas("check pump, valve"), vec!["check", "pump", "valve"]);
    }

    #[test]
    fn compound_takes_last_features() {
        let lex = Lexicon::builtin();
        let s = &tokenize("park near the hangar gate")[0];
        let units = group_compounds(s, &lex);
        let last = units.last().unwrap();
        assert_eq!(last.lemma, "hangar gate");
        assert!(last.has(Feature::Location));
    }

    proptest! {
        #[test]
        fn units_ordered_and_disjoint(text in "[a-z ,.]{0,60}") {
            let lex = Lexicon::builtin();
            for s in tokenize(&text) {
                let units = group_compounds(&s, &lex);
                let mut last_end = 0;
                for u in &units {
                    prop_assert!(u.start >= last_end);
                    prop_assert!(u.end > u.start && u.end <= s.tokens.len());
                    last_end = u.end;
                }
            }
        }
    }
}
