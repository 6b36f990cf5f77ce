//! Anchored matching and rewriting.

use std::collections::BTreeMap;
use std::ops::Range;

use thiserror::Error;

use super::syntax::{CorrectionPattern, ItemSlot, LhsElem, RhsElem, VarPos};
use crate::lexicon::{Lexicon, Pos};
use crate::textmodel::{detokenize, group_compounds, lemmatize, tokenize, Sentence, TagKind, TaggedFragment, Unit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("pattern {pattern}: ${var} is not bound")]
    Unbound { pattern: String, var: String },
}

/// Token spans bound by a successful match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    /// Tokens covered by the whole left-hand side.
    pub span: Range<usize>,
    pub item: Range<usize>,
    pub vars: BTreeMap<String, Range<usize>>,
}

struct Matcher<'a> {
    p: &'a CorrectionPattern,
    s: &'a Sentence,
    lex: &'a Lexicon,
    lemmas: Vec<String>,
    units: Vec<Unit>,
    anchor: Range<usize>,
}

impl Matcher<'_> {
    fn is_punct(&self, i: usize) -> bool {
        self.s.tokens[i].is_punct()
    }

    fn item_ok(&self, slot: &ItemSlot) -> bool {
        let span_lemmas = &self.lemmas[self.anchor.clone()];
        match slot {
            ItemSlot::Any => true,
            ItemSlot::Lemmas(options) => options.iter().any(|o| {
                let words: Vec<String> = o.split(' ').map(lemmatize).collect();
                words == span_lemmas
            }),
            ItemSlot::Category(c) => {
                let text: Vec<&str> = self.s.tokens[self.anchor.clone()].iter().map(|t| t.surface.as_str()).collect();
                self.lex.lookup_fuzzy(&text.join(" ")).is_some_and(|i| i.category == *c)
            }
        }
    }

    /// End positions a category variable can reach from `i`.
    fn cat_var_end(&self, i: usize, pos: VarPos, features: &[crate::lexicon::Feature]) -> Option<usize> {
        let tok = self.s.tokens.get(i)?;
        match pos {
            VarPos::Number => tok.is_numeric().then_some(i + 1),
            VarPos::Pos(Pos::Noun) => {
                let unit = self.units.iter().find(|u| u.start == i && u.pos == Pos::Noun)?;
                features.iter().all(|f| unit.has(*f)).then_some(unit.end)
            }
            VarPos::Pos(p) => {
                let ok =
                    self.lex.categorize(&tok.surface).iter().any(|e| e.pos == p && features.iter().all(|f| e.has(*f)));
                ok.then_some(i + 1)
            }
        }
    }

    /// Matches `lhs[k..]` from token `i`; returns the end of the match.
    fn go(&self, k: usize, i: usize, vars: &mut BTreeMap<String, Range<usize>>) -> Option<usize> {
        let n = self.s.tokens.len();
        let Some(el) = self.p.lhs.get(k) else {
            return Some(i);
        };
        match el {
            LhsElem::Start => (i == 0).then(|| self.go(k + 1, i, vars)).flatten(),
            LhsElem::End => (i..n).all(|j| self.is_punct(j)).then_some(i),
            LhsElem::Literal(w) => {
                let words: Vec<String> = w.split(' ').map(lemmatize).collect();
                let end = i + words.len();
                (end <= n && self.lemmas[i..end] == words[..]).then(|| self.go(k + 1, end, vars)).flatten()
            }
            LhsElem::Item(slot) => {
                (i == self.anchor.start && self.item_ok(slot)).then(|| self.go(k + 1, self.anchor.end, vars)).flatten()
            }
            LhsElem::CatVar { name, pos, features } => {
                let end = self.cat_var_end(i, *pos, features)?;
                vars.insert(name.clone(), i..end);
                let r = self.go(k + 1, end, vars);
                if r.is_none() {
                    vars.remove(name);
                }
                r
            }
            LhsElem::Gap { name, min, max } => {
                let trailing = k + 1 == self.p.lhs.len();
                let mut longest = 0;
                while longest < *max && i + longest < n && !self.is_punct(i + longest) {
                    longest += 1;
                }
                for len in (*min..=longest).rev() {
                    if trailing && len > 0 && self.lex.is_stopword(&self.lemmas[i + len - 1]) {
                        continue;
                    }
                    if let Some(name) = name {
                        vars.insert(name.clone(), i..i + len);
                    }
                    if let Some(end) = self.go(k + 1, i + len, vars) {
                        return Some(end);
                    }
                }
                if let Some(name) = name {
                    vars.remove(name);
                }
                None
            }
        }
    }
}

/// Matches `p` with its item slot on `anchor`. Elements before the slot are
/// tried from the closest start position outwards.
pub fn match_at(p: &CorrectionPattern, s: &Sentence, anchor: Range<usize>, lex: &Lexicon) -> Option<Binding> {
    if anchor.end > s.tokens.len() || anchor.is_empty() {
        return None;
    }
    let m = Matcher {
        p,
        s,
        lex,
        lemmas: s.tokens.iter().map(|t| lemmatize(&t.surface)).collect(),
        units: group_compounds(s, lex),
        anchor: anchor.clone(),
    };
    let before_item = p.lhs.iter().take_while(|e| !matches!(e, LhsElem::Item(_))).count();
    let starts: Vec<usize> = if before_item == 0 { vec![anchor.start] } else { (0..=anchor.start).rev().collect() };
    for start in starts {
        let mut vars = BTreeMap::new();
        if let Some(end) = m.go(0, start, &mut vars) {
            return Some(Binding { span: start..end, item: anchor, vars });
        }
    }
    None
}

/// Every match of `p` in the sentence, one per item-slot position.
pub fn find_matches(p: &CorrectionPattern, s: &Sentence, lex: &Lexicon) -> Vec<Binding> {
    let lemmas: Vec<String> = s.tokens.iter().map(|t| lemmatize(&t.surface)).collect();
    let mut anchors: Vec<Range<usize>> = Vec::new();
    match p.item_slot() {
        ItemSlot::Lemmas(options) => {
            for o in options {
                let words: Vec<String> = o.split(' ').map(lemmatize).collect();
                for i in 0..lemmas.len() {
                    if i + words.len() <= lemmas.len() && lemmas[i..i + words.len()] == words[..] {
                        anchors.push(i..i + words.len());
                    }
                }
            }
        }
        ItemSlot::Any | ItemSlot::Category(_) => {
            anchors.extend(crate::detector::find_items(s, lex).into_iter().map(|(span, _)| span));
        }
    }
    anchors.sort_by_key(|a| (a.start, a.end));
    anchors.dedup();
    anchors.into_iter().filter_map(|a| match_at(p, s, a, lex)).collect()
}

/// Result of rewriting one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub tokens: Vec<String>,
    /// Changed tokens, after trimming what the rewrite shares with the
    /// matched text at both ends.
    pub revised: Range<usize>,
}

impl Rewrite {
    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }

    pub fn fragment(&self) -> TaggedFragment {
        TaggedFragment::with_region(&self.tokens, self.revised.clone(), TagKind::Revised)
    }
}

/// Rewrites the matched span with the right-hand side. Slots take the
/// tokens of `fillers[slot name]` or render as `⟨type⟩`.
pub fn apply(
    p: &CorrectionPattern,
    b: &Binding,
    s: &Sentence,
    fillers: &BTreeMap<String, String>,
) -> Result<Rewrite, ApplyError> {
    let surfaces = s.surfaces();
    let mut rhs: Vec<String> = Vec::new();
    for el in &p.rhs {
        match el {
            RhsElem::Literal(w) => rhs.push(w.clone()),
            RhsElem::Copy(v) => {
                let span = if v == "@" { Some(&b.item) } else { b.vars.get(v) };
                let span = span.ok_or_else(|| ApplyError::Unbound { pattern: p.id.clone(), var: v.clone() })?;
                rhs.extend(surfaces[span.clone()].iter().map(|t| t.to_string()));
            }
            RhsElem::Slot(slot) => match fillers.get(&slot.name) {
                Some(text) => rhs.extend(tokenize(text).into_iter().flat_map(|s| s.tokens).map(|t| t.surface)),
                None => rhs.push(slot.slot_type.placeholder()),
            },
        }
    }
    let matched: Vec<&str> = surfaces[b.span.clone()].to_vec();
    let limit = matched.len().min(rhs.len());
    let prefix = (0..limit).take_while(|&k| rhs[k] == matched[k]).count();
    let suffix = (0..limit - prefix).take_while(|&k| rhs[rhs.len() - 1 - k] == matched[matched.len() - 1 - k]).count();
    let base = b.span.start;
    let revised = base + prefix..base + rhs.len() - suffix;
    let mut tokens: Vec<String> = surfaces[..b.span.start].iter().map(|t| t.to_string()).collect();
    tokens.extend(rhs);
    tokens.extend(surfaces[b.span.end..].iter().map(|t| t.to_string()));
    Ok(Rewrite { tokens, revised })
}
