//! Sorting a writer's correction into one of five outcomes.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::align::{align, Alignment, Op};
use crate::lexicon::Lexicon;
use crate::textmodel::is_numeric_str;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Case {
    /// Left as is.
    NotCorrected = 1,
    /// Replaced or complemented by a value, an interval or a complement.
    Quantified = 2,
    /// Erased.
    Erased = 3,
    /// Replaced by a non-fuzzy expression.
    Replaced = 4,
    /// The sentence was rewritten.
    Rewritten = 5,
}

impl Case {
    pub const ALL: [Case; 5] = [Case::NotCorrected, Case::Quantified, Case::Erased, Case::Replaced, Case::Rewritten];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Case {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        Case::ALL.get(usize::from(n).wrapping_sub(1)).copied().ok_or_else(|| format!("case {n} out of range 1..=5"))
    }
}

impl From<Case> for u8 {
    fn from(c: Case) -> u8 {
        c.number()
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Comparators, interval markers and other words that may appear inside a
/// quantity expression.
pub const QUANTITY_WORDS: &[&str] = &[
    "less", "more", "than", "below", "above", "under", "over", "every", "to", "between", "and", "from", "within",
    "per", "least", "maximum", "minimum", "max", "min", "up", "exactly",
];

/// Numeral, unit lemma, or closed-list quantity word.
pub fn is_quantity_token(lemma: &str, lex: &Lexicon) -> bool {
    is_numeric_str(lemma) || lex.is_unit(lemma) || QUANTITY_WORDS.contains(&lemma)
}

fn is_punct(s: &str) -> bool {
    let mut c = s.chars();
    matches!((c.next(), c.next()), (Some(x), None) if !x.is_alphanumeric())
}

/// Derivational variant of an original word ("reduce" / "reduction").
fn restates(a: &str, b: &str) -> bool {
    let (la, lb) = (a.chars().count(), b.chars().count());
    if la < 4 || lb < 4 {
        return false;
    }
    let common = a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count();
    common >= 4.max(la.min(lb) - 2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    /// Largest edit ratio outside the replacement region for case 4.
    pub case4_edit_ratio: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { case4_edit_ratio: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub case: Case,
    pub alignment: Alignment,
    pub original_lemmas: Vec<String>,
    pub corrected_lemmas: Vec<String>,
}

/// Multiset difference `a - b`, punctuation dropped.
fn bag_minus(a: &[String], b: &[String]) -> BTreeMap<String, usize> {
    let mut bag: BTreeMap<String, usize> = BTreeMap::new();
    for x in a.iter().filter(|x| !is_punct(x)) {
        *bag.entry(x.clone()).or_default() += 1;
    }
    for y in b {
        if let Some(n) = bag.get_mut(y) {
            *n -= 1;
            if *n == 0 {
                bag.remove(y);
            }
        }
    }
    bag
}

/// Classifies the correction of the item at `span` in `original`.
///
/// Removed words R and added words A are the two multiset differences of
/// the lemma sequences, so a word that only moved counts as neither. Then:
///
/// 1. identical lemmas: case 1;
/// 2. only the item's tokens deleted, or the item removed with nothing
///    else removed and nothing but stopwords added: case 3;
/// 3. item removed, nothing else removed, additions all quantity words
///    (numerals, units, comparators): case 2;
/// 4. item removed, additions carry content words, and the edits outside
///    the replacement region stay within the ratio: case 4;
/// 5. item kept (possibly moved) and no content word removed: case 2;
/// 6. anything else: case 5.
///
/// Added words that restate an original word ("reduction" for "reduce")
/// are not counted as new content.
pub fn classify<S: AsRef<str>>(
    original: &[S],
    corrected: &[S],
    span: Range<usize>,
    lex: &Lexicon,
    params: &ClassifyParams,
) -> Classification {
    let ol: Vec<String> = original.iter().map(|t| lex.lemma(t.as_ref())).collect();
    let cl: Vec<String> = corrected.iter().map(|t| lex.lemma(t.as_ref())).collect();
    let alignment = align(&ol, &cl);
    let case = decide(&ol, &cl, &alignment, span, lex, params);
    Classification { case, alignment, original_lemmas: ol, corrected_lemmas: cl }
}

fn decide(
    ol: &[String],
    cl: &[String],
    al: &Alignment,
    span: Range<usize>,
    lex: &Lexicon,
    params: &ClassifyParams,
) -> Case {
    if al.cost == 0 {
        return Case::NotCorrected;
    }
    let non_keep: Vec<Op> = al.ops.iter().copied().filter(|o| !o.is_keep()).collect();
    if non_keep.len() == span.len() && non_keep.iter().all(|o| matches!(o, Op::Delete(i) if span.contains(i))) {
        return Case::Erased;
    }

    let mut removed = bag_minus(ol, cl);
    let added = bag_minus(cl, ol);
    let item_lemmas = &ol[span.clone()];
    let item_removed = item_lemmas.iter().any(|l| removed.contains_key(l) && !lex.is_stopword(l));
    for l in item_lemmas {
        if let Some(n) = removed.get_mut(l) {
            *n -= 1;
            if *n == 0 {
                removed.remove(l);
            }
        }
    }
    let removed_content = removed.keys().any(|l| !lex.is_stopword(l));
    let original_content: Vec<&String> = ol.iter().filter(|l| !lex.is_stopword(l) && !is_punct(l)).collect();
    let added_content: Vec<&String> = added
        .keys()
        .filter(|l| !lex.is_stopword(l))
        .filter(|l| !original_content.iter().any(|o| restates(o, l)))
        .collect();

    if item_removed && !removed_content {
        if added_content.is_empty() {
            return Case::Erased;
        }
        if added_content.iter().all(|l| is_quantity_token(l, lex)) {
            return Case::Quantified;
        }
    }
    if item_removed && added_content.iter().any(|l| !is_quantity_token(l, lex)) {
        let outside = outside_cost(al, &span);
        let ratio = outside as f64 / ol.len().max(cl.len()) as f64;
        if ratio <= params.case4_edit_ratio {
            return Case::Replaced;
        }
    }
    if !item_removed && !removed_content {
        return Case::Quantified;
    }
    Case::Rewritten
}

/// Cost of the non-keep ops outside the replacement region. The region
/// starts at the item's first edited token, extends forward over every
/// non-keep op and backward over insertions only, so that edits to
/// unrelated words just before the item still count as outside.
fn outside_cost(al: &Alignment, span: &Range<usize>) -> usize {
    let seeds: Vec<usize> = al
        .ops
        .iter()
        .enumerate()
        .filter(|(_, o)| !o.is_keep() && o.original().is_some_and(|i| span.contains(&i)))
        .map(|(k, _)| k)
        .collect();
    let (Some(&first), Some(&last)) = (seeds.first(), seeds.last()) else {
        return al.cost;
    };
    let mut lo = first;
    while lo > 0 && matches!(al.ops[lo - 1], Op::Insert(_)) {
        lo -= 1;
    }
    let mut hi = last + 1;
    while hi < al.ops.len() && !al.ops[hi].is_keep() {
        hi += 1;
    }
    let inside = al.ops[lo..hi].iter().filter(|o| !o.is_keep()).count();
    al.cost - inside
}
