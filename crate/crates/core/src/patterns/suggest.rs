//! Suggestions for one alert: matching patterns with slots filled from
//! memory, or past corrections when no pattern applies.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::catalog::Catalog;
use super::matcher::{apply, match_at, ApplyError, Binding};
use super::syntax::{CorrectionPattern, RhsElem};
use crate::detector::{context_match, context_match_unanchored, Alert};
use crate::kv;
use crate::lexicon::Lexicon;
use crate::memory::{Filler, MemoryStore};
use crate::textmodel::{detokenize, tokenize, Sentence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub alert_id: usize,
    /// Absent for a list of raw past corrections.
    pub pattern: Option<String>,
    /// Rewritten sentence; unfilled slots show as `⟨type⟩`.
    pub text: String,
    /// Ranked candidates for the first slot, or past corrections.
    pub fillers: Vec<Filler>,
}

fn is_punct(w: &str) -> bool {
    w.chars().all(|c| !c.is_alphanumeric())
}

/// Words a filler must not start or end with for pattern `p`: the pattern's
/// own literals, the item and the copied variables, since the rewrite
/// emits those itself.
pub fn strip_words(p: &CorrectionPattern, b: &Binding, surfaces: &[&str]) -> BTreeSet<String> {
    let mut words = p.rhs_literals();
    let mut add = |r: &Range<usize>| words.extend(surfaces[r.clone()].iter().map(|w| w.to_lowercase()));
    add(&b.item);
    for e in &p.rhs {
        if let RhsElem::Copy(v) = e {
            if let Some(r) = b.vars.get(v) {
                add(r);
            }
        }
    }
    words
}

/// Trims `tokens` at both ends while they are punctuation or in `strip`.
pub fn trim_filler<S: AsRef<str>>(tokens: &[S], strip: &BTreeSet<String>) -> String {
    let drop = |t: &S| is_punct(t.as_ref()) || strip.contains(&t.as_ref().to_lowercase());
    let start = tokens.iter().position(|t| !drop(t)).unwrap_or(tokens.len());
    let end = tokens.iter().rposition(|t| !drop(t)).map_or(start, |e| e + 1);
    detokenize(&tokens[start..end.max(start)])
}

fn text_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().flat_map(|s| s.tokens).map(|t| t.surface).collect()
}

/// Candidates for the first slot of `p`, merged from the recommendation
/// table and, for quantity slots, from mined realizations.
fn pattern_fillers(
    p: &CorrectionPattern,
    b: &Binding,
    s: &Sentence,
    alert: &Alert,
    store: &MemoryStore,
    lex: &Lexicon,
    k: usize,
) -> Vec<Filler> {
    let Some(slot) = p.slots().first().copied() else {
        return Vec::new();
    };
    let syn = lex.synonyms();
    let mut merged: Vec<Filler> = Vec::new();
    for r in &store.derived.recommendations {
        if r.pattern.as_deref() == Some(p.id.as_str())
            && r.item == alert.item.lemma
            && context_match(&r.context, &alert.context, k, syn)
        {
            r.fillers.iter().for_each(|f| Filler::merge(&mut merged, f));
        }
    }
    if slot.slot_type.is_quantity() {
        let strip = strip_words(p, b, &s.surfaces());
        for rc in &store.derived.realization_classes {
            if !context_match_unanchored(&rc.context, &alert.context, k, syn) {
                continue;
            }
            for f in &rc.fillers {
                let text = trim_filler(&text_tokens(&f.text), &strip);
                if !text.is_empty() {
                    Filler::merge(&mut merged, &Filler { text, ..f.clone() });
                }
            }
        }
    }
    Filler::rank(&mut merged);
    merged
}

/// Suggestions for `alert` in sentence `s`, one per matching pattern in
/// catalog order. Without a match, one pattern-free suggestion carries
/// the past corrections of the item in matching contexts.
pub fn suggest(
    alert: &Alert,
    s: &Sentence,
    store: &MemoryStore,
    catalog: &Catalog,
    lex: &Lexicon,
    k: usize,
) -> Result<Vec<Suggestion>, ApplyError> {
    let mut out = Vec::new();
    for p in &catalog.patterns {
        let Some(b) = match_at(p, s, alert.span.clone(), lex) else {
            continue;
        };
        let fillers = pattern_fillers(p, &b, s, alert, store, lex, k);
        let mut assign = BTreeMap::new();
        if let (Some(slot), Some(top)) = (p.slots().first(), fillers.first()) {
            assign.insert(slot.name.clone(), top.text.clone());
        }
        let rewrite = apply(p, &b, s, &assign)?;
        out.push(Suggestion { alert_id: alert.id, pattern: Some(p.id.clone()), text: rewrite.text(), fillers });
    }
    if out.is_empty() {
        let mut fillers: Vec<Filler> = Vec::new();
        for r in &store.derived.recommendations {
            if r.pattern.is_none()
                && r.item == alert.item.lemma
                && context_match(&r.context, &alert.context, k, lex.synonyms())
            {
                r.fillers.iter().for_each(|f| Filler::merge(&mut fillers, f));
            }
        }
        Filler::rank(&mut fillers);
        let text = fillers.first().map_or_else(|| s.text(), |f| f.text.clone());
        out.push(Suggestion { alert_id: alert.id, pattern: None, text, fillers });
    }
    Ok(out)
}

/// `text@freq` items joined for a report line.
pub fn render_fillers(fillers: &[Filler]) -> String {
    let items: Vec<String> = fillers.iter().map(|f| format!("{}@{}", f.text, f.freq)).collect();
    kv::join_list(&items)
}

/// One tab-separated `key=value` line.
pub fn suggestion_line(doc: &str, s: &Suggestion) -> String {
    kv::encode(&[
        ("doc", doc.to_string()),
        ("alert", s.alert_id.to_string()),
        ("pattern", s.pattern.clone().unwrap_or_else(|| "-".into())),
        ("text", s.text.clone()),
        ("fillers", render_fillers(&s.fillers)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{detect, Context, DeactivationSet};
    use crate::memory::{RealizationClass, Recommendation};
    use crate::textmodel::Document;

    fn filler(text: &str, freq: usize, last_seq: u64) -> Filler {
        Filler { text: text.into(), freq, last_seq, sources: (1..=freq as u64).collect() }
    }

    fn setup(text: &str) -> (Lexicon, Document, Alert) {
        let lex = Lexicon::builtin();
        let doc = Document::new("d", text);
        let alert = detect(&doc, &lex, &DeactivationSet::default()).remove(0);
        (lex, doc, alert)
    }

    #[test]
    fn empty_memory_gives_placeholders() {
        let (lex, doc, alert) = setup("progressively heat the probe");
        let out = suggest(&alert, &doc.sentences[0], &MemoryStore::new(""), &Catalog::builtin(), &lex, 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].pattern.as_deref(), Some("P-prog"));
        assert_eq!(out[0].text, "progressively heat the probe ⟨time_interval⟩");
        assert!(out[0].fillers.is_empty());
    }

    #[test]
    fn records_and_realizations_merge() {
        let (lex, doc, alert) = setup("progressively heat the probe");
        let mut store = MemoryStore::new("");
        store.derived.recommendations.push(Recommendation {
            pattern: Some("P-prog".into()),
            item: "progressively".into(),
            class: "progressively:heat:1".into(),
            context: alert.context.clone(),
            fillers: vec![filler("in 5 seconds", 1, 1)],
        });
        store.derived.realization_classes.push(RealizationClass {
            id: "real:heat:1".into(),
            context: Context { item_lemma: String::new(), ..alert.context.clone() },
            fillers: vec![filler("in 2 to 4 mns", 2, 3)],
        });
        let out = suggest(&alert, &doc.sentences[0], &store, &Catalog::builtin(), &lex, 2).unwrap();
        let texts: Vec<(&str, usize)> = out[0].fillers.iter().map(|f| (f.text.as_str(), f.freq)).collect();
        assert_eq!(texts, [("in 2 to 4 mns", 2), ("in 5 seconds", 1)]);
        assert_eq!(out[0].text, "progressively heat the probe in 2 to 4 mns");
    }

    #[test]
    fn realization_trimmed_to_slot() {
        let (lex, doc, alert) = setup("park near the gate");
        let mut store = MemoryStore::new("");
        store.derived.realization_classes.push(RealizationClass {
            id: "real:park:1".into(),
            context: Context { item_lemma: String::new(), ..alert.context.clone() },
            fillers: vec![filler("less than 100 meters from", 1, 1)],
        });
        let out = suggest(&alert, &doc.sentences[0], &store, &Catalog::builtin(), &lex, 2).unwrap();
        assert_eq!(out[0].text, "park less than 100 meters from the gate");
    }

    #[test]
    fn raw_suggestion_without_pattern() {
        let (lex, doc, alert) = setup("the pump works normally.");
        let mut store = MemoryStore::new("");
        store.derived.recommendations.push(Recommendation {
            pattern: None,
            item: "normally".into(),
            class: "x".into(),
            context: alert.context.clone(),
            fillers: vec![filler("the pump delivers 3 bar.", 1, 4)],
        });
        let out = suggest(&alert, &doc.sentences[0], &store, &Catalog::builtin(), &lex, 2).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].pattern, None);
        assert_eq!(out[0].text, "the pump delivers 3 bar.");
    }

    #[test]
    fn trimming() {
        let strip: BTreeSet<String> = ["less", "than", "from"].iter().map(|s| s.to_string()).collect();
        assert_eq!(trim_filler(&["less", "than", "100", "meters", "from"], &strip), "100 meters");
        assert_eq!(trim_filler(&["less", ","], &strip), "");
    }

    #[test]
    fn line_format() {
        let s = Suggestion { alert_id: 2, pattern: None, text: "a\tb".into(), fillers: vec![filler("x", 3, 1)] };
        assert_eq!(suggestion_line("d", &s), "doc=d\talert=2\tpattern=-\ttext=a\\tb\tfillers=x@3");
    }
}
