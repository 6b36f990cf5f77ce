//! Fuzzy item lexicon and word-category resources.
//!
//! Three plain-text resources feed a [`Lexicon`]:
//!
//! * fuzzy items, `lemma<TAB>category<TAB>severity[<TAB>variants[<TAB>features]]`
//!   with comma-separated variants and features;
//! * word categories, `lemma<TAB>pos[<TAB>features]`;
//! * stopwords, one lemma per line.
//!
//! Lines starting with `#` and blank lines are ignored everywhere. A starter
//! set of each resource is compiled into the crate ([`Lexicon::builtin`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textmodel::{is_numeric_str, lemmatize};

const BUILTIN_FUZZY: &str = include_str!("../data/fuzzy.tsv");
const BUILTIN_WORDS: &str = include_str!("../data/words.tsv");
const BUILTIN_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const BUILTIN_SYNONYMS: &str = include_str!("../data/synonyms.txt");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate entry {lemma:?} ({category})")]
    Duplicate { line: usize, lemma: String, category: String },
    #[error("line {line}: invalid severity {value:?}, expected 1, 2 or 3")]
    InvalidSeverity { line: usize, value: String },
    #[error("form {form:?} maps to both {first:?} and {second:?}")]
    AmbiguousForm { form: String, first: String, second: String },
    #[error("{lemma:?} is both a stopword and a fuzzy item")]
    StopwordConflict { lemma: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    File { path: PathBuf, source: Box<LexiconError> },
}

fn parse_err(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse { line, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    MannerAdverb,
    TemporalLocationAdverb,
    Determiner,
    Preposition,
    VerbModal,
    Adjective,
    Noun,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::MannerAdverb,
        Category::TemporalLocationAdverb,
        Category::Determiner,
        Category::Preposition,
        Category::VerbModal,
        Category::Adjective,
        Category::Noun,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::MannerAdverb => "manner_adverb",
            Category::TemporalLocationAdverb => "temporal_location_adverb",
            Category::Determiner => "determiner",
            Category::Preposition => "preposition",
            Category::VerbModal => "verb_modal",
            Category::Adjective => "adjective",
            Category::Noun => "noun",
        }
    }

    /// The part of speech a fuzzy item of this category plays in a sentence.
    pub fn pos(self) -> Pos {
        match self {
            Category::MannerAdverb | Category::TemporalLocationAdverb => Pos::Adverb,
            Category::Determiner => Pos::Determiner,
            Category::Preposition => Pos::Preposition,
            Category::VerbModal => Pos::Verb,
            Category::Adjective => Pos::Adjective,
            Category::Noun => Pos::Noun,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// A-priori error severity, 1 (mild) to 3 (worst).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Severity(u8);

impl Severity {
    pub fn new(value: u8) -> Option<Self> {
        (1..=3).contains(&value).then_some(Severity(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Severity {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Severity::new(value).ok_or_else(|| format!("severity {value} out of range 1..=3"))
    }
}

impl From<Severity> for u8 {
    fn from(s: Severity) -> u8 {
        s.0
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzyItem {
    pub lemma: String,
    pub category: Category,
    pub severity: Severity,
    pub variants: Vec<String>,
    pub features: Vec<String>,
}

impl FuzzyItem {
    pub fn new(lemma: &str, category: Category, severity: Severity) -> Self {
        FuzzyItem { lemma: normalize_phrase(lemma), category, severity, variants: Vec::new(), features: Vec::new() }
    }

    /// The lemma split into words ("a few" -> ["a", "few"]).
    pub fn words(&self) -> Vec<&str> {
        self.lemma.split(' ').collect()
    }

    /// Lemma and variants, each as a word sequence.
    pub fn forms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.lemma.as_str()).chain(self.variants.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Noun,
    Adjective,
    Verb,
    Adverb,
    Determiner,
    Preposition,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 7] =
        [Pos::Noun, Pos::Adjective, Pos::Verb, Pos::Adverb, Pos::Determiner, Pos::Preposition, Pos::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Adjective => "adjective",
            Pos::Verb => "verb",
            Pos::Adverb => "adverb",
            Pos::Determiner => "determiner",
            Pos::Preposition => "preposition",
            Pos::Other => "other",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pos::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| format!("unknown part of speech {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Action,
    Durative,
    Location,
    Unit,
    Quantity,
}

impl Feature {
    pub const ALL: [Feature; 5] =
        [Feature::Action, Feature::Durative, Feature::Location, Feature::Unit, Feature::Quantity];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Action => "action",
            Feature::Durative => "durative",
            Feature::Location => "location",
            Feature::Unit => "unit",
            Feature::Quantity => "quantity",
        }
    }

    /// Part of speech the feature is restricted to, if any.
    fn required_pos(self) -> Option<Pos> {
        match self {
            Feature::Action | Feature::Durative => Some(Pos::Verb),
            Feature::Location | Feature::Unit => Some(Pos::Noun),
            Feature::Quantity => None,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordEntry {
    pub lemma: String,
    pub pos: Pos,
    pub features: BTreeSet<Feature>,
}

impl WordEntry {
    pub fn new(lemma: &str, pos: Pos, features: impl IntoIterator<Item = Feature>) -> Self {
        WordEntry { lemma: lemma.to_string(), pos, features: features.into_iter().collect() }
    }

    pub fn has(&self, f: Feature) -> bool {
        self.features.contains(&f)
    }
}

/// Synonym sets ("sisters"): lemmas in the same set compare equal in
/// context matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Synonyms {
    group_of: HashMap<String, usize>,
    groups: Vec<Vec<String>>,
}

impl Synonyms {
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut syn = Synonyms::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let members: Vec<String> = line.split(',').map(normalize_phrase).filter(|m| !m.is_empty()).collect();
            let id = syn.groups.len();
            for m in &members {
                if syn.group_of.insert(m.clone(), id).is_some() {
                    return Err(parse_err(n + 1, format!("{m:?} appears in two synonym sets")));
                }
            }
            syn.groups.push(members);
        }
        Ok(syn)
    }

    /// Canonical representative: the first member of the lemma's set, or the
    /// lemma itself.
    pub fn canonical<'a>(&'a self, lemma: &'a str) -> &'a str {
        match self.group_of.get(lemma) {
            Some(&g) => &self.groups[g][0],
            None => lemma,
        }
    }

    pub fn same(&self, a: &str, b: &str) -> bool {
        a == b || self.canonical(a) == self.canonical(b)
    }
}

/// Lowercase and collapse internal whitespace.
pub fn normalize_phrase(s: &str) -> String {
    s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

pub fn parse_fuzzy_items(text: &str) -> Result<Vec<FuzzyItem>, LexiconError> {
    let mut items: Vec<FuzzyItem> = Vec::new();
    let mut seen: BTreeMap<(String, Category), usize> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 3 || cols.len() > 5 {
            return Err(parse_err(line_no, format!("expected 3 to 5 tab-separated columns, found {}", cols.len())));
        }
        let lemma = normalize_phrase(cols[0]);
        if lemma.is_empty() {
            return Err(parse_err(line_no, "empty lemma"));
        }
        let category: Category = cols[1].trim().parse().map_err(|e: String| parse_err(line_no, e))?;
        let sev_raw = cols[2].trim();
        let severity = sev_raw
            .parse::<u8>()
            .ok()
            .and_then(Severity::new)
            .ok_or_else(|| LexiconError::InvalidSeverity { line: line_no, value: sev_raw.to_string() })?;
        let list = |i: usize| -> Vec<String> {
            cols.get(i)
                .map(|c| c.split(',').map(normalize_phrase).filter(|v| !v.is_empty()).collect())
                .unwrap_or_default()
        };
        let variants = list(3);
        let features = list(4);
        if seen.insert((lemma.clone(), category), line_no).is_some() {
            return Err(LexiconError::Duplicate { line: line_no, lemma, category: category.to_string() });
        }
        items.push(FuzzyItem { lemma, category, severity, variants, features });
    }
    Ok(items)
}

pub fn render_fuzzy_items(items: &[FuzzyItem]) -> String {
    let mut out = String::new();
    for item in items {
        let mut cols = vec![item.lemma.clone(), item.category.to_string(), item.severity.to_string()];
        if !item.variants.is_empty() || !item.features.is_empty() {
            cols.push(item.variants.join(","));
        }
        if !item.features.is_empty() {
            cols.push(item.features.join(","));
        }
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

pub fn parse_words(text: &str) -> Result<Vec<WordEntry>, LexiconError> {
    let mut words = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(parse_err(line_no, format!("expected 2 or 3 tab-separated columns, found {}", cols.len())));
        }
        let lemma = normalize_phrase(cols[0]);
        if lemma.is_empty() {
            return Err(parse_err(line_no, "empty lemma"));
        }
        let pos: Pos = cols[1].trim().parse().map_err(|e: String| parse_err(line_no, e))?;
        let mut features = BTreeSet::new();
        for f in cols.get(2).map(|c| c.split(',')).into_iter().flatten() {
            let f = f.trim();
            if f.is_empty() {
                continue;
            }
            let feature: Feature = f.parse().map_err(|e: String| parse_err(line_no, e))?;
            if let Some(required) = feature.required_pos() {
                if required != pos {
                    return Err(parse_err(line_no, format!("feature {feature} is only allowed on {required} entries")));
                }
            }
            features.insert(feature);
        }
        words.push(WordEntry { lemma, pos, features });
    }
    Ok(words)
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(normalize_phrase).collect()
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })
}

fn in_file<T>(path: &Path, r: Result<T, LexiconError>) -> Result<T, LexiconError> {
    r.map_err(|e| LexiconError::File { path: path.to_path_buf(), source: Box::new(e) })
}

/// Immutable lexicon shared by detection, context extraction and pattern
/// matching.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    items: Vec<FuzzyItem>,
    /// Every lemma/variant (space-joined words) to its item index.
    forms: HashMap<String, usize>,
    /// Lemmatized first word of a form to (lemmatized form words, item
    /// index), longest first.
    by_first_word: HashMap<String, Vec<(Vec<String>, usize)>>,
    words: BTreeMap<String, Vec<WordEntry>>,
    stopwords: BTreeSet<String>,
    synonyms: Synonyms,
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
            && self.words == other.words
            && self.stopwords == other.stopwords
            && self.synonyms == other.synonyms
    }
}

impl Lexicon {
    pub fn new(
        items: Vec<FuzzyItem>,
        words: Vec<WordEntry>,
        stopwords: BTreeSet<String>,
        synonyms: Synonyms,
    ) -> Result<Self, LexiconError> {
        let mut forms: HashMap<String, usize> = HashMap::new();
        for (idx, item) in items.iter().enumerate() {
            for form in item.forms() {
                if let Some(&prev) = forms.get(form) {
                    if prev != idx {
                        return Err(LexiconError::AmbiguousForm {
                            form: form.to_string(),
                            first: items[prev].lemma.clone(),
                            second: item.lemma.clone(),
                        });
                    }
                }
                forms.insert(form.to_string(), idx);
            }
            if stopwords.contains(&item.lemma) {
                return Err(LexiconError::StopwordConflict { lemma: item.lemma.clone() });
            }
        }
        let mut by_first_word: HashMap<String, Vec<(Vec<String>, usize)>> = HashMap::new();
        for (form, &idx) in &forms {
            let ws: Vec<String> = form.split(' ').map(lemmatize).collect();
            by_first_word.entry(ws[0].clone()).or_default().push((ws, idx));
        }
        for list in by_first_word.values_mut() {
            list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)).then(a.0.cmp(&b.0)));
        }
        let mut by_lemma: BTreeMap<String, Vec<WordEntry>> = BTreeMap::new();
        for w in words {
            let rows = by_lemma.entry(w.lemma.clone()).or_default();
            if !rows.contains(&w) {
                rows.push(w);
            }
        }
        Ok(Lexicon { items, forms, by_first_word, words: by_lemma, stopwords, synonyms })
    }

    /// Lexicon holding only fuzzy items.
    pub fn from_items(items: Vec<FuzzyItem>) -> Result<Self, LexiconError> {
        Lexicon::new(items, Vec::new(), BTreeSet::new(), Synonyms::default())
    }

    /// The starter resources compiled into the crate.
    pub fn builtin() -> Self {
        Lexicon::new(
            parse_fuzzy_items(BUILTIN_FUZZY).expect("builtin fuzzy lexicon"),
            parse_words(BUILTIN_WORDS).expect("builtin word categories"),
            parse_stopwords(BUILTIN_STOPWORDS),
            Synonyms::parse(BUILTIN_SYNONYMS).expect("builtin synonyms"),
        )
        .expect("builtin lexicon is consistent")
    }

    /// Loads a fuzzy item file into a lexicon without word categories.
    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = read(path)?;
        in_file(path, parse_fuzzy_items(&text).and_then(Lexicon::from_items))
    }

    /// Builds a lexicon from optional resource files, using the built-in
    /// resource for every path that is `None`.
    pub fn from_paths(
        fuzzy: Option<&Path>,
        words: Option<&Path>,
        stopwords: Option<&Path>,
        synonyms: Option<&Path>,
    ) -> Result<Self, LexiconError> {
        let items = match fuzzy {
            Some(p) => in_file(p, parse_fuzzy_items(&read(p)?))?,
            None => parse_fuzzy_items(BUILTIN_FUZZY)?,
        };
        let words = match words {
            Some(p) => in_file(p, parse_words(&read(p)?))?,
            None => parse_words(BUILTIN_WORDS)?,
        };
        let stop = match stopwords {
            Some(p) => parse_stopwords(&read(p)?),
            None => parse_stopwords(BUILTIN_STOPWORDS),
        };
        let syn = match synonyms {
            Some(p) => in_file(p, Synonyms::parse(&read(p)?))?,
            None => Synonyms::parse(BUILTIN_SYNONYMS)?,
        };
        Lexicon::new(items, words, stop, syn)
    }

    /// Writes the fuzzy items in the TSV format read by [`Lexicon::load`].
    pub fn save(&self, path: &Path) -> Result<(), LexiconError> {
        std::fs::write(path, render_fuzzy_items(&self.items))
            .map_err(|source| LexiconError::Io { path: path.to_path_buf(), source })
    }

    pub fn items(&self) -> &[FuzzyItem] {
        &self.items
    }

    pub fn item(&self, lemma: &str) -> Option<&FuzzyItem> {
        self.forms.get(lemma).map(|&i| &self.items[i])
    }

    pub fn synonyms(&self) -> &Synonyms {
        &self.synonyms
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Lexicon-aware lemma: declared forms (fuzzy variants, word-category and
    /// stopword entries) win over the suffix rules.
    pub fn lemma(&self, surface: &str) -> String {
        let lower = surface.to_lowercase();
        if let Some(&idx) = self.forms.get(&lower) {
            return self.items[idx].lemma.clone();
        }
        if self.words.contains_key(&lower) || self.stopwords.contains(&lower) {
            return lower;
        }
        lemmatize(&lower)
    }

    /// The fuzzy item whose lemma or variant matches the surface, after
    /// lowercasing and lemmatization (word by word for multiword input).
    pub fn lookup_fuzzy(&self, surface: &str) -> Option<&FuzzyItem> {
        let normalized = normalize_phrase(surface);
        if let Some(&idx) = self.forms.get(&normalized) {
            return Some(&self.items[idx]);
        }
        let lemmatized = normalized.split(' ').map(|w| self.lemma(w)).collect::<Vec<_>>().join(" ");
        self.forms.get(&lemmatized).map(|&idx| &self.items[idx])
    }

    /// Candidate forms (as lemmatized word sequences) whose first word
    /// lemmatizes to `lemma`, longest first.
    pub(crate) fn forms_starting_with(&self, lemma: &str) -> &[(Vec<String>, usize)] {
        self.by_first_word.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn item_at(&self, idx: usize) -> &FuzzyItem {
        &self.items[idx]
    }

    /// Word-category rows for the token's lemma. Stopwords and punctuation
    /// yield nothing; numerals are `other`; fuzzy items without a row take
    /// the part of speech of their category; anything else defaults to a
    /// plain noun.
    pub fn categorize(&self, token: &str) -> Vec<WordEntry> {
        let lower = token.to_lowercase();
        if lower.is_empty() || !lower.chars().any(char::is_alphanumeric) {
            return Vec::new();
        }
        if self.stopwords.contains(&lower) {
            return Vec::new();
        }
        let lemma = self.lemma(&lower);
        if self.stopwords.contains(&lemma) {
            return Vec::new();
        }
        if let Some(rows) = self.words.get(&lemma) {
            return rows.clone();
        }
        if is_numeric_str(&lower) {
            return vec![WordEntry::new(&lemma, Pos::Other, [])];
        }
        if let Some(item) = self.item(&lemma) {
            return vec![WordEntry::new(&lemma, item.category.pos(), [])];
        }
        vec![WordEntry::new(&lemma, Pos::Noun, [])]
    }

    /// True when the lemma carries the `unit` feature as a noun.
    pub fn is_unit(&self, lemma: &str) -> bool {
        self.words.get(lemma).is_some_and(|rows| rows.iter().any(|w| w.has(Feature::Unit)))
    }
}
