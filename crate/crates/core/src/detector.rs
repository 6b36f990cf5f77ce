//! Fuzzy item detection, context extraction and learned suppression.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::kv;
use crate::lexicon::{Category, Feature, FuzzyItem, Lexicon, Pos, Severity, Synonyms};
use crate::textmodel::{group_compounds, lemmatize, Document, Sentence, Unit};

pub const DEFAULT_CONTEXT_SIZE: usize = 4;
pub const DEFAULT_MATCH_K: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContextWord {
    pub lemma: String,
    pub pos: Pos,
}

/// Head word plus nearby content words around a fuzzy item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Context {
    pub item_lemma: String,
    pub head: Option<String>,
    pub additional: Vec<ContextWord>,
}

impl Context {
    pub fn head_str(&self) -> &str {
        self.head.as_deref().unwrap_or("")
    }

    pub fn additional_lemmas(&self) -> Vec<&str> {
        self.additional.iter().map(|w| w.lemma.as_str()).collect()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} [{}]",
            self.item_lemma,
            self.head.as_deref().unwrap_or("-"),
            self.additional_lemmas().join(", ")
        )
    }
}

/// Any unit that can serve as an additional context word.
fn eligible(u: &Unit) -> bool {
    match u.pos {
        Pos::Noun | Pos::Adjective => true,
        Pos::Verb => u.has(Feature::Action),
        _ => false,
    }
}

/// Token distance from a span: 1 for an adjacent unit.
fn distance(u: &Unit, span: &Range<usize>) -> usize {
    if u.start >= span.end {
        u.start - span.end + 1
    } else {
        span.start.saturating_sub(u.end) + 1
    }
}

/// Orders units by nearness, breaking ties toward the following unit.
fn nearness(u: &Unit, span: &Range<usize>) -> (usize, bool, usize) {
    (distance(u, span), u.start < span.start, u.start)
}

fn nearest<'a>(units: &[&'a Unit], span: &Range<usize>, pred: impl Fn(&Unit) -> bool) -> Option<&'a Unit> {
    units.iter().copied().filter(|u| pred(u)).min_by_key(|u| nearness(u, span))
}

fn pick_head<'a>(units: &[&'a Unit], span: &Range<usize>, pos: Pos) -> Option<&'a Unit> {
    let following = |u: &Unit| u.start >= span.end;
    let is_noun = |u: &Unit| u.pos == Pos::Noun;
    let is_verb = |u: &Unit| u.pos == Pos::Verb;
    match pos {
        Pos::Adverb => nearest(units, span, is_verb),
        Pos::Adjective | Pos::Determiner => nearest(units, span, |u| is_noun(u) && following(u))
            .or_else(|| nearest(units, span, |u| is_noun(u) && !following(u))),
        Pos::Preposition | Pos::Verb => nearest(units, span, |u| is_noun(u) && following(u)),
        Pos::Noun | Pos::Other => nearest(units, span, |u| is_verb(u) && !following(u))
            .or_else(|| nearest(units, span, |u| matches!(u.pos, Pos::Noun | Pos::Adjective | Pos::Verb))),
    }
}

/// Builds the context around `span` for an item playing part of speech
/// `pos`. Shared by alert contexts and mined quantity expressions.
pub(crate) fn context_around(
    s: &Sentence,
    span: &Range<usize>,
    item_lemma: &str,
    pos: Pos,
    lex: &Lexicon,
    size: usize,
    verb_then_noun: bool,
) -> Context {
    let units = group_compounds(s, lex);
    let candidates: Vec<&Unit> = units.iter().filter(|u| !u.overlaps(span) && u.lemma != item_lemma).collect();
    let mut head = pick_head(&candidates, span, pos);
    if head.is_none() && verb_then_noun {
        head = nearest(&candidates, span, |u| u.pos == Pos::Noun);
    }
    let mut ranked: Vec<&Unit> = candidates.iter().copied().filter(|u| eligible(u)).collect();
    ranked.sort_by_key(|u| nearness(u, span));
    let head_lemma = head.map(|h| h.lemma.clone());
    let mut seen = BTreeSet::new();
    let mut additional = Vec::new();
    for u in ranked {
        if additional.len() >= size {
            break;
        }
        if Some(&u.lemma) == head_lemma.as_ref() || !seen.insert(u.lemma.clone()) {
            continue;
        }
        additional.push(ContextWord { lemma: u.lemma.clone(), pos: u.pos });
    }
    Context { item_lemma: item_lemma.to_string(), head: head_lemma, additional }
}

/// Context of a fuzzy item occurrence: the head is chosen by the item's
/// category, the additional words are the `size` nearest eligible units
/// (nouns and compounds, adjectives, action verbs).
pub fn extract_context(s: &Sentence, span: Range<usize>, item: &FuzzyItem, lex: &Lexicon, size: usize) -> Context {
    context_around(s, &span, &item.lemma, item.category.pos(), lex, size, false)
}

fn same_head(a: &Option<String>, b: &Option<String>, syn: &Synonyms) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => syn.same(x, y),
        _ => false,
    }
}

fn additional_overlap(c1: &Context, c2: &Context, k: usize, syn: &Synonyms) -> bool {
    let a1: BTreeSet<&str> = c1.additional.iter().map(|w| syn.canonical(&w.lemma)).collect();
    let a2: BTreeSet<&str> = c2.additional.iter().map(|w| syn.canonical(&w.lemma)).collect();
    a1.intersection(&a2).count() >= k.min(a1.len()).min(a2.len())
}

/// Same item, same head (or synonyms) and at least `min(k, |a1|, |a2|)`
/// shared additional words.
pub fn context_match(c1: &Context, c2: &Context, k: usize, syn: &Synonyms) -> bool {
    c1.item_lemma == c2.item_lemma && context_match_unanchored(c1, c2, k, syn)
}

/// [`context_match`] without the item condition, for contexts of correct
/// realizations that carry no fuzzy item.
pub fn context_match_unanchored(c1: &Context, c2: &Context, k: usize, syn: &Synonyms) -> bool {
    same_head(&c1.head, &c2.head, syn) && additional_overlap(c1, c2, k, syn)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualDeactivation {
    pub id: String,
    pub context: Context,
    pub validated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDeactivation {
    pub id: String,
    pub item: String,
    pub validated: bool,
}

/// Learned suppressions. Only validated entries take effect.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeactivationSet {
    pub contextual: Vec<ContextualDeactivation>,
    pub global: Vec<GlobalDeactivation>,
}

impl DeactivationSet {
    pub fn is_empty(&self) -> bool {
        self.contextual.is_empty() && self.global.is_empty()
    }

    pub fn len(&self) -> usize {
        self.contextual.len() + self.global.len()
    }

    /// The id of the first validated entry suppressing this context.
    pub fn suppressing(&self, ctx: &Context, k: usize, syn: &Synonyms) -> Option<&str> {
        if let Some(g) = self.global.iter().find(|g| g.validated && g.item == ctx.item_lemma) {
            return Some(&g.id);
        }
        self.contextual.iter().find(|c| c.validated && context_match(&c.context, ctx, k, syn)).map(|c| c.id.as_str())
    }

    pub fn suppresses(&self, ctx: &Context, k: usize, syn: &Synonyms) -> bool {
        self.suppressing(ctx, k, syn).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    /// 1-based, unique within one document.
    pub id: usize,
    pub doc_id: String,
    pub sentence_index: usize,
    pub span: Range<usize>,
    /// Character range of the span in the source text.
    pub chars: Range<usize>,
    pub line: usize,
    pub item: FuzzyItem,
    pub severity: Severity,
    pub context: Context,
}

impl Alert {
    pub fn category(&self) -> Category {
        self.item.category
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectParams {
    pub context_size: usize,
    pub match_k: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams { context_size: DEFAULT_CONTEXT_SIZE, match_k: DEFAULT_MATCH_K }
    }
}

/// Lexicon matches in one sentence: `(span, item)`, longest first, then
/// leftmost, never overlapping.
pub fn find_items<'a>(s: &Sentence, lex: &'a Lexicon) -> Vec<(Range<usize>, &'a FuzzyItem)> {
    let lemmas: Vec<String> = s.tokens.iter().map(|t| lemmatize(&t.surface)).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lemmas.len() {
        let hit = lex
            .forms_starting_with(&lemmas[i])
            .iter()
            .find(|(words, _)| i + words.len() <= lemmas.len() && words.iter().zip(&lemmas[i..]).all(|(w, l)| w == l));
        match hit {
            Some((words, idx)) => {
                out.push((i..i + words.len(), lex.item_at(*idx)));
                i += words.len();
            }
            None => i += 1,
        }
    }
    out
}

/// Alerts for one sentence, numbered from `next_id`.
pub fn detect_sentence(
    s: &Sentence,
    lex: &Lexicon,
    deact: &DeactivationSet,
    params: &DetectParams,
    next_id: &mut usize,
) -> Vec<Alert> {
    let mut alerts = Vec::new();
    for (span, item) in find_items(s, lex) {
        let context = extract_context(s, span.clone(), item, lex, params.context_size);
        if deact.suppresses(&context, params.match_k, lex.synonyms()) {
            continue;
        }
        let first = &s.tokens[span.start];
        let last = &s.tokens[span.end - 1];
        alerts.push(Alert {
            id: *next_id,
            doc_id: s.doc_id.clone(),
            sentence_index: s.index,
            chars: first.offset..last.offset + last.char_len(),
            line: first.line,
            span,
            item: item.clone(),
            severity: item.severity,
            context,
        });
        *next_id += 1;
    }
    alerts
}

pub fn detect_with(doc: &Document, lex: &Lexicon, deact: &DeactivationSet, params: &DetectParams) -> Vec<Alert> {
    let mut next_id = 1;
    doc.sentences.iter().flat_map(|s| detect_sentence(s, lex, deact, params, &mut next_id)).collect()
}

/// All non-suppressed fuzzy item occurrences, ordered by sentence and span.
pub fn detect(doc: &Document, lex: &Lexicon, deact: &DeactivationSet) -> Vec<Alert> {
    detect_with(doc, lex, deact, &DetectParams::default())
}

/// A source of alerts. [`FuzzyDetector`] is the lexicon-driven one; other
/// error types can plug in behind the same interface.
pub trait Detector {
    fn detect(&self, doc: &Document) -> Vec<Alert>;
}

pub struct FuzzyDetector<'a> {
    pub lexicon: &'a Lexicon,
    pub deactivations: &'a DeactivationSet,
    pub params: DetectParams,
}

impl Detector for FuzzyDetector<'_> {
    fn detect(&self, doc: &Document) -> Vec<Alert> {
        detect_with(doc, self.lexicon, self.deactivations, &self.params)
    }
}

/// Source text with each alert wrapped in `<fuzzy id=N sev=S>…</fuzzy>`.
pub fn annotate(text: &str, alerts: &[Alert]) -> String {
    let mut sorted: Vec<&Alert> = alerts.iter().collect();
    sorted.sort_by_key(|a| a.chars.start);
    let mut out = String::with_capacity(text.len() + alerts.len() * 32);
    let mut next = sorted.into_iter().peekable();
    let mut open_end: Option<usize> = None;
    for (ci, c) in text.chars().enumerate() {
        if open_end == Some(ci) {
            out.push_str("</fuzzy>");
            open_end = None;
        }
        if let Some(a) = next.next_if(|a| a.chars.start == ci) {
            out.push_str(&format!("<fuzzy id={} sev={}>", a.id, a.severity));
            open_end = Some(a.chars.end);
        }
        out.push(c);
    }
    if open_end.is_some() {
        out.push_str("</fuzzy>");
    }
    out
}

fn encode_words(ws: &[ContextWord]) -> String {
    let items: Vec<String> = ws.iter().map(|w| format!("{}:{}", w.lemma, w.pos)).collect();
    kv::join_list(&items)
}

fn decode_words(value: &str) -> Result<Vec<ContextWord>, kv::KvError> {
    kv::split_list(value)
        .into_iter()
        .map(|item| {
            let (lemma, pos) = item.rsplit_once(':').ok_or_else(|| kv::KvError::BadValue {
                key: "additional".into(),
                message: format!("expected lemma:pos, got {item:?}"),
            })?;
            let pos = pos.parse().map_err(|m| kv::KvError::BadValue { key: "additional".into(), message: m })?;
            Ok(ContextWord { lemma: lemma.to_string(), pos })
        })
        .collect()
}

/// Context as key-value fields (`item`, `head`, `additional`).
pub fn context_fields(ctx: &Context) -> Vec<(&'static str, String)> {
    vec![
        ("item", ctx.item_lemma.clone()),
        ("head", ctx.head.clone().unwrap_or_default()),
        ("additional", encode_words(&ctx.additional)),
    ]
}

pub fn context_from_record(rec: &kv::Record) -> Result<Context, kv::KvError> {
    let head = rec.require("head")?;
    Ok(Context {
        item_lemma: rec.require("item")?.to_string(),
        head: (!head.is_empty()).then(|| head.to_string()),
        additional: decode_words(rec.require("additional")?)?,
    })
}

/// One alert report line.
pub fn alert_line(a: &Alert) -> String {
    let mut fields = vec![
        ("id", a.id.to_string()),
        ("doc", a.doc_id.clone()),
        ("line", a.line.to_string()),
        ("sentence", a.sentence_index.to_string()),
        ("span", format!("{}..{}", a.span.start, a.span.end)),
        ("category", a.item.category.to_string()),
        ("severity", a.severity.to_string()),
    ];
    fields.extend(context_fields(&a.context));
    kv::encode(&fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::tokenize;
    use proptest::prelude::*;

    fn lex() -> Lexicon {
        Lexicon::builtin()
    }

    fn ctx_of(text: &str, item: &str) -> Context {
        let lex = lex();
        let s = &tokenize(text)[0];
        let (span, it) = find_items(s, &lex).into_iter().find(|(_, i)| i.lemma == item).unwrap();
        extract_context(s, span, it, &lex, 4)
    }

    fn words(ws: &[(&str, Pos)]) -> Vec<ContextWord> {
        ws.iter().map(|(l, p)| ContextWord { lemma: l.to_string(), pos: *p }).collect()
    }

    #[test]
    fn context_take_off_knots() {
        // units: take-off(0) knot(3) above(4, preposition) v1(5); span 1..3
        let c = ctx_of("take-off a few knots above V1", "a few");
        assert_eq!(c.head.as_deref(), Some("knot"));
        assert_eq!(c.additional, words(&[("take-off", Pos::Noun), ("v1", Pos::Noun)]));
    }

    #[test]
    fn degenerate_context() {
        let c = ctx_of("a few", "a few");
        assert_eq!(c.head, None);
        assert!(c.additional.is_empty());
    }

    #[test]
    fn context_by_distance() {
        // tokens: progressively(0) heat(1) the probe(3) until the chamber(6)
        // sensor(7) reads(8) stable(9) values(10); distances from span 0..1:
        // probe 3, chamber sensor 6, read 8, stable 9, value 10
        let c = ctx_of("progressively heat the probe until the chamber sensor reads stable values", "progressively");
        assert_eq!(c.head.as_deref(), Some("heat"));
        assert_eq!(
            c.additional,
            words(&[
                ("probe", Pos::Noun),
                ("chamber sensor", Pos::Noun),
                ("read", Pos::Verb),
                ("stable", Pos::Adjective)
            ])
        );
    }

    #[test]
    fn verb_item_head_is_object() {
        let c = ctx_of("to minimize fire alarms", "minimize");
        assert_eq!(c.head.as_deref(), Some("fire alarm"));
    }

    #[test]
    fn adjective_head_and_preceding_fallback() {
        assert_eq!(
            ctx_of("a location that allows easy viewing during inspection", "easy").head.as_deref(),
            Some("viewing")
        );
        assert_eq!(ctx_of("the valve is normal", "normal").head.as_deref(), Some("valve"));
    }

    #[test]
    fn ties_prefer_following() {
        // pump and valve are both adjacent to "carefully"; check is the head
        let c = ctx_of("check pump carefully valve", "carefully");
        assert_eq!(c.head.as_deref(), Some("check"));
        assert_eq!(c.additional_lemmas(), vec!["valve", "pump"]);
    }

    #[test]
    fn detect_single_alert() {
        let lex = lex();
        let doc = Document::new("d", "Progressively heat the probe.");
        let alerts = detect(&doc, &lex, &DeactivationSet::default());
        assert_eq!(alerts.len(), 1);
        assert_eq!(alerts[0].item.lemma, "progressively");
        assert_eq!(alerts[0].severity.get(), 3);
        assert_eq!(alerts[0].chars, 0..13);
    }

    #[test]
    fn contextual_deactivation_suppresses() {
        let lex = lex();
        let doc = Document::new("d", "Progressively heat the probe.");
        let ctx = detect(&doc, &lex, &DeactivationSet::default())[0].context.clone();
        let mut deact = DeactivationSet::default();
        deact.contextual.push(ContextualDeactivation { id: "x".into(), context: ctx, validated: false });
        assert_eq!(detect(&doc, &lex, &deact).len(), 1, "unvalidated entries are inert");
        deact.contextual[0].validated = true;
        assert!(detect(&doc, &lex, &deact).is_empty());
        let global = DeactivationSet {
            contextual: vec![],
            global: vec![GlobalDeactivation { id: "g".into(), item: "progressively".into(), validated: true }],
        };
        assert!(detect(&Document::new("d", "progressively close the pipe"), &lex, &global).is_empty());
    }

    #[test]
    fn longest_match_without_overlap() {
        // "a few" at 0..2 consumes "few"; the second "few" at 4 stands alone
        let lex = lex();
        let alerts = detect(&Document::new("d", "a few of the few options"), &lex, &DeactivationSet::default());
        let got: Vec<(Range<usize>, &str)> = alerts.iter().map(|a| (a.span.clone(), a.item.lemma.as_str())).collect();
        assert_eq!(got, vec![(0..2, "a few"), (4..5, "few")]);
    }

    #[test]
    fn inflected_items_found() {
        let lex = lex();
        let alerts = detect(&Document::new("d", "It minimizes issues."), &lex, &DeactivationSet::default());
        let got: Vec<&str> = alerts.iter().map(|a| a.item.lemma.as_str()).collect();
        assert_eq!(got, vec!["minimize", "issue"]);
    }

    #[test]
    fn context_match_examples() {
        let syn = Synonyms::default();
        let mk = |head: &str, add: &[&str]| Context {
            item_lemma: "progressively".into(),
            head: Some(head.into()),
            additional: add.iter().map(|l| ContextWord { lemma: l.to_string(), pos: Pos::Noun }).collect(),
        };
        let a = mk("heat", &["heat", "probe", "sensor", "valve"]);
        assert!(context_match(&a, &a, 2, &syn));
        assert!(!context_match(&mk("pipe", &["x", "y"]), &mk("probe", &["x", "y"]), 2, &syn));
        // {heat, probe, sensor, valve} ∩ {probe, heat, gauge} = {heat, probe}
        assert!(context_match(&a, &mk("heat", &["probe", "heat", "gauge"]), 2, &syn));
        assert!(!context_match(&a, &mk("heat", &["probe", "gauge", "x"]), 2, &syn));
        let syn = Synonyms::parse("pipe,tube\n").unwrap();
        assert!(context_match(&mk("pipe", &["a"]), &mk("tube", &["a"]), 2, &syn));
    }

    #[test]
    fn annotation() {
        let lex = lex();
        let text = "Park near the gate.\nAdd a few drops.";
        let doc = Document::new("d", text);
        let alerts = detect(&doc, &lex, &DeactivationSet::default());
        assert_eq!(
            annotate(text, &alerts),
            "Park <fuzzy id=1 sev=3>near</fuzzy> the gate.\nAdd <fuzzy id=2 sev=3>a few</fuzzy> drops."
        );
    }

    #[test]
    fn alert_line_fields() {
        let lex = lex();
        let alerts = detect(&Document::new("doc1", "take-off a few knots above V1"), &lex, &DeactivationSet::default());
        let rec = kv::decode(&alert_line(&alerts[0])).unwrap();
        assert_eq!(rec.get("span"), Some("1..3"));
        assert_eq!(rec.get("item"), Some("a few"));
        assert_eq!(rec.get("head"), Some("knot"));
        assert_eq!(rec.get("additional"), Some("take-off:noun|v1:noun"));
        assert_eq!(context_from_record(&rec).unwrap(), alerts[0].context);
    }

    fn context_strategy() -> impl Strategy<Value = Context> {
        (
            prop::option::of(prop::sample::select(vec!["heat", "pipe", "probe", "tube"])),
            prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e", "tube", "pipe"]), 0..5),
        )
            .prop_map(|(head, add)| Context {
                item_lemma: "near".into(),
                head: head.map(String::from),
                additional: add.into_iter().map(|l| ContextWord { lemma: l.into(), pos: Pos::Noun }).collect(),
            })
    }

    proptest! {
        #[test]
        fn context_match_symmetric_and_reflexive(a in context_strategy(), b in context_strategy(), k in 0usize..5) {
            let syn = Synonyms::parse("pipe,tube\n").unwrap();
            prop_assert_eq!(context_match(&a, &b, k, &syn), context_match(&b, &a, k, &syn));
            prop_assert!(context_match(&a, &a, k, &syn));
        }

        #[test]
        fn context_invariants(words in prop::collection::vec(prop::sample::select(vec![
            "heat", "the", "probe", "near", "gate", "valve", "fire", "alarm", "close", "a", "few",
            "progressively", "pipe", "of", "reads", "stable", ",", "inspect", "landing", "gear",
        ]), 1..16)) {
            let lex = Lexicon::builtin();
            let s = Sentence::from_surfaces(&words);
            for a in detect_sentence(&s, &lex, &DeactivationSet::default(), &DetectParams::default(), &mut 1) {
                let c = &a.context;
                prop_assert!(c.additional.len() <= 4);
                let lemmas = c.additional_lemmas();
                prop_assert!(!lemmas.contains(&c.item_lemma.as_str()));
                if let Some(h) = &c.head {
                    prop_assert!(!lemmas.contains(&h.as_str()));
                    prop_assert!(h != &c.item_lemma);
                }
                let span_lemmas: Vec<String> = s.tokens[a.span.clone()].iter().map(|t| lemmatize(&t.surface)).collect();
                prop_assert!(a.item.forms().any(|f| f.split(' ').map(lemmatize).collect::<Vec<_>>() == span_lemmas));
            }
        }
    }
}
