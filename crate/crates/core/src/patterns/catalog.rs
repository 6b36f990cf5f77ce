//! Built-in correction patterns and user catalogs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::matcher::find_matches;
use super::syntax::{parse_patterns, CorrectionPattern, PatternError};
use crate::lexicon::Lexicon;
use crate::textmodel::tokenize;

pub const BUILTIN_PATTERNS: &str = r#"# Determiners become bounds.
P-few: [a few X:noun] -> [less than <value> $X]
note: fuzzy quantity replaced by an upper bound

P-most: [most X:noun] -> [more than <value> $X]
note: fuzzy quantity replaced by a lower bound

# Temporal adverbs become a period.
P-regularly: [regularly V:verb(action)] -> [every <time> $V]

P-frequently: [frequently V:verb(action)] -> [every <time> $V]

# Manner adverbs.
P-prog: [progressively V:verb(durative) G:gap] -> [$@ $V $G <time_interval>]
note: the adverb stays, a duration is appended

P-carefully-warn: [carefully V:verb(action) G:gap] -> [$@ $V $G <warning>]
note: the adverb stays, the risk is made explicit

P-carefully-skip: [carefully V:verb(action) G:gap] -> [$V $G]
note: the adverb is dropped

# Prepositions.
P-near: [@near|"next to" D:gap(0,2) L:noun(location)] -> [less than <distance> from $D $L]

P-around: [around D:gap(0,2) L:noun(location)] -> [within <distance> of $D $L]

P-about: [@about|around N:number] -> [<interval>]
note: an approximate value becomes an interval

# Adjectives.
P-adj-para: [@:adjective N:noun] -> [$N <paraphrase>]
note: the adjective is replaced by a precise relative clause

P-adj-erase: [@:adjective N:noun] -> [$N]
note: the adjective is dropped

# Purpose clauses are moved to their own sentence.
P-shall-purpose: [^ X:gap(1,8) shall Y:gap(1,12) @"in order to"|"so as to" Z:gap(1,20) $] -> [$X shall $Y . The goal is to $Z]
"#;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone)]
pub struct Catalog {
    /// Most specific first; ties keep file order.
    pub patterns: Vec<CorrectionPattern>,
    pub warnings: Vec<String>,
}

impl Catalog {
    pub fn builtin() -> Catalog {
        Catalog::from_parts(parse_patterns(BUILTIN_PATTERNS).expect("built-in patterns parse"), Vec::new())
    }

    fn from_parts(mut patterns: Vec<CorrectionPattern>, warnings: Vec<String>) -> Catalog {
        patterns.sort_by_key(|p| std::cmp::Reverse(p.specificity()));
        Catalog { patterns, warnings }
    }

    pub fn get(&self, id: &str) -> Option<&CorrectionPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Built-ins plus the patterns of `user`. A user pattern with a built-in id
/// replaces it. Returns the catalog with warnings for overrides and for
/// patterns from different families matching the same fixture item.
pub fn load_patterns(user: Option<&Path>, lex: &Lexicon) -> Result<Catalog, CatalogError> {
    let text = match user {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|source| CatalogError::Io { path: path.to_path_buf(), source })?
        }
        None => String::new(),
    };
    catalog_from_text(&text, lex)
}

/// [`load_patterns`] on file contents.
pub fn catalog_from_text(user: &str, lex: &Lexicon) -> Result<Catalog, CatalogError> {
    let mut patterns = parse_patterns(BUILTIN_PATTERNS).expect("built-in patterns parse");
    let mut warnings = Vec::new();
    for p in parse_patterns(user)? {
        match patterns.iter_mut().find(|b| b.id == p.id) {
            Some(b) => {
                warnings.push(format!("pattern {} overrides the built-in pattern", p.id));
                *b = p;
            }
            None => patterns.push(p),
        }
    }
    warnings.extend(overlap_warnings(&patterns, lex));
    Ok(Catalog::from_parts(patterns, warnings))
}

/// Patterns sharing a left-hand side are alternative rewrites of one
/// family; two families matching the same item occurrence overlap.
pub fn overlap_warnings(patterns: &[CorrectionPattern], lex: &Lexicon) -> Vec<String> {
    let sentences: Vec<_> = crate::fixtures::corpus().iter().flat_map(|t| tokenize(t)).collect();
    let mut hits: BTreeMap<(usize, usize, usize), BTreeSet<&str>> = BTreeMap::new();
    let mut family_of: BTreeMap<&str, &str> = BTreeMap::new();
    for p in patterns {
        let family = family_of.entry(p.lhs_text.as_str()).or_insert(p.id.as_str());
        for (n, s) in sentences.iter().enumerate() {
            for b in find_matches(p, s, lex) {
                hits.entry((n, b.item.start, b.item.end)).or_default().insert(family);
            }
        }
    }
    let mut out = BTreeSet::new();
    for ((n, start, end), families) in hits {
        if families.len() > 1 {
            let words = sentences[n].surfaces()[start..end].join(" ");
            let ids: Vec<&str> = families.into_iter().collect();
            out.insert(format!(
                "patterns {} overlap on {words:?} in fixture sentence {:?}",
                ids.join(", "),
                sentences[n].text()
            ));
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_do_not_overlap() {
        let lex = Lexicon::builtin();
        let c = catalog_from_text("", &lex).unwrap();
        assert_eq!(c.len(), 13);
        assert!(c.warnings.is_empty(), "{:?}", c.warnings);
    }

    #[test]
    fn specificity_order() {
        let c = Catalog::builtin();
        let spec: Vec<usize> = c.patterns.iter().map(|p| p.specificity()).collect();
        assert!(spec.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(c.patterns.last().unwrap().id, "P-adj-erase");
    }

    #[test]
    fn override_warns() {
        let lex = Lexicon::builtin();
        let c = catalog_from_text("P-few: [a few X:noun] -> [at most <value> $X]\n", &lex).unwrap();
        assert_eq!(c.len(), 13);
        assert!(c.warnings[0].contains("P-few"));
        assert!(matches!(c.get("P-few").unwrap().rhs[0], super::super::syntax::RhsElem::Literal(ref w) if w == "at"));
    }

    #[test]
    fn user_pattern_added() {
        let lex = Lexicon::builtin();
        let c = catalog_from_text("P-around-num: [around N:number] -> [<interval>]\n", &lex).unwrap();
        assert_eq!(c.len(), 14);
    }

    #[test]
    fn overlap_is_reported() {
        let lex = Lexicon::builtin();
        let c = catalog_from_text("P-special: [special N:noun] -> [$N]\n", &lex).unwrap();
        assert!(c.warnings.iter().any(|w| w.contains("P-special") && w.contains("P-adj-para")), "{:?}", c.warnings);
    }

    #[test]
    fn parse_errors_surface() {
        let lex = Lexicon::builtin();
        assert!(matches!(catalog_from_text("P-bad: [a few X:noun] -> [$Y]", &lex), Err(CatalogError::Pattern(_))));
    }
}
