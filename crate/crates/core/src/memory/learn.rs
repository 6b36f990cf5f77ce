//! Recording corrections and mining correct realizations.

use std::ops::Range;

use thiserror::Error;

use super::align::{Alignment, Op};
use super::classify::{classify, is_quantity_token, Case, QUANTITY_WORDS};
use super::store::{CorrectionRecord, MemoryStore, Realization};
use crate::config::Config;
use crate::detector::{context_around, detect_sentence};
use crate::lexicon::{Lexicon, Pos};
use crate::textmodel::{detokenize, lemmatize, Document, Sentence, TagKind, TaggedFragment};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error(
        "sentence counts differ ({original} original, {corrected} corrected); first unmatched sentence is {index}"
    )]
    SentenceMismatch { index: usize, original: usize, corrected: usize },
    #[error("a writer id is required")]
    MissingWriter,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LearnSummary {
    pub records: usize,
    /// Records per case, index 0 for case 1.
    pub cases: [usize; 5],
}

/// The corrected-side span covering every edit: the corrected positions of
/// insertions and substitutions, or an empty span where the first deletion
/// happened when nothing was inserted.
pub fn revised_region(al: &Alignment) -> Range<usize> {
    let touched: Vec<usize> = al
        .ops
        .iter()
        .filter_map(|o| match o {
            Op::Substitute(_, j) | Op::Insert(j) => Some(*j),
            _ => None,
        })
        .collect();
    if let (Some(lo), Some(hi)) = (touched.iter().min(), touched.iter().max()) {
        return *lo..*hi + 1;
    }
    // corrected position of the first deletion: the tokens kept before it
    let mut j = 0;
    for o in &al.ops {
        match o {
            Op::Keep(_, jj) => j = jj + 1,
            Op::Delete(_) => break,
            _ => {}
        }
    }
    j..j
}

/// Appends one record per alert of `original`, classified against the
/// sentence at the same index in `corrected`. Existing records are left
/// untouched.
pub fn learn(
    original: &Document,
    corrected: &Document,
    writer: &str,
    lex: &Lexicon,
    store: &mut MemoryStore,
    config: &Config,
) -> Result<LearnSummary, LearnError> {
    if writer.trim().is_empty() {
        return Err(LearnError::MissingWriter);
    }
    let (n, m) = (original.sentences.len(), corrected.sentences.len());
    if n != m {
        return Err(LearnError::SentenceMismatch { index: n.min(m), original: n, corrected: m });
    }
    let params = config.detect_params();
    let cparams = config.classify_params();
    let mut summary = LearnSummary::default();
    let mut next_id = 1;
    let mut seq = store.next_seq();
    let deact = store.derived.deactivations.clone();
    for (so, sc) in original.sentences.iter().zip(&corrected.sentences) {
        let osurf = so.surfaces();
        let csurf = sc.surfaces();
        for alert in detect_sentence(so, lex, &deact, &params, &mut next_id) {
            let c = classify(&osurf, &csurf, alert.span.clone(), lex, &cparams);
            let corrected_fragment = (c.case != Case::NotCorrected)
                .then(|| TaggedFragment::with_region(&csurf, revised_region(&c.alignment), TagKind::Revised));
            store.records.push(CorrectionRecord {
                seq,
                doc: original.id.clone(),
                sentence: so.index,
                item: alert.item.lemma.clone(),
                category: alert.item.category,
                severity: alert.severity,
                original: TaggedFragment::with_region(&osurf, alert.span.clone(), TagKind::Fuzzy),
                corrected: corrected_fragment,
                writer: writer.to_string(),
                context: alert.context,
                case: c.case,
            });
            seq += 1;
            summary.records += 1;
            summary.cases[usize::from(c.case.number()) - 1] += 1;
        }
    }
    Ok(summary)
}

const LEAD_PREPOSITIONS: &[&str] = &["in", "within", "for", "over", "during", "after", "at", "from", "by"];

/// Quantity expressions of a sentence: maximal runs of quantity tokens that
/// hold a numeral, without trailing comparator or connective words, plus a
/// directly preceding temporal or spatial preposition.
pub fn quantity_expressions(s: &Sentence, lex: &Lexicon) -> Vec<Range<usize>> {
    let lemmas: Vec<String> = s.tokens.iter().map(|t| lemmatize(&t.surface)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lemmas.len() {
        if !is_quantity_token(&lemmas[i], lex) {
            i += 1;
            continue;
        }
        let start = i;
        while i < lemmas.len() && is_quantity_token(&lemmas[i], lex) {
            i += 1;
        }
        let mut end = i;
        while end > start && QUANTITY_WORDS.contains(&lemmas[end - 1].as_str()) {
            end -= 1;
        }
        if !s.tokens[start..end].iter().any(|t| t.is_numeric()) {
            continue;
        }
        let start =
            if start > 0 && LEAD_PREPOSITIONS.contains(&lemmas[start - 1].as_str()) { start - 1 } else { start };
        out.push(start..end);
    }
    out
}

/// Indexes the quantity expressions of every sentence that raises no
/// active alert. A sentence already mined is not counted twice. Returns
/// the number of new realizations.
pub fn mine_correct(corpus: &[Document], lex: &Lexicon, store: &mut MemoryStore, config: &Config) -> usize {
    let params = config.detect_params();
    let deact = store.derived.deactivations.clone();
    let mut seq = store.next_seq();
    let mut added = 0;
    for doc in corpus {
        let mut next_id = 1;
        for s in &doc.sentences {
            if !detect_sentence(s, lex, &deact, &params, &mut next_id).is_empty() {
                continue;
            }
            let surf = s.surfaces();
            for span in quantity_expressions(s, lex) {
                let text = detokenize(&surf[span.clone()]);
                let known =
                    store.realizations.iter().any(|r| r.doc == doc.id && r.sentence == s.index && r.text == text);
                if known {
                    continue;
                }
                let context = context_around(s, &span, "", Pos::Adverb, lex, params.context_size, true);
                store.realizations.push(Realization { seq, doc: doc.id.clone(), sentence: s.index, text, context });
                seq += 1;
                added += 1;
            }
        }
    }
    added
}
