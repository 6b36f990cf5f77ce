use serde::{Deserialize, Serialize};

use super::lemma::lemmatize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Lowercased, suffix-stripped form. Lexicon-aware normalization is
    /// done by [`crate::lexicon::Lexicon::lemma`].
    pub lemma: String,
    /// Character (not byte) index of the first character in the source.
    pub offset: usize,
    /// 1-based source line.
    pub line: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, offset: usize, line: usize) -> Self {
        let surface = surface.into();
        let lemma = lemmatize(&surface);
        Token { surface, lemma, offset, line }
    }

    pub fn char_len(&self) -> usize {
        self.surface.chars().count()
    }

    /// True for single-character tokens that are neither letters nor digits.
    pub fn is_punct(&self) -> bool {
        let mut chars = self.surface.chars();
        matches!((chars.next(), chars.next()), (Some(c), None) if !c.is_alphanumeric())
    }

    /// Digits with optional decimal/thousands separators and a trailing `%`.
    pub fn is_numeric(&self) -> bool {
        is_numeric_str(&self.surface)
    }
}

pub fn is_numeric_str(s: &str) -> bool {
    let body = s.strip_suffix('%').unwrap_or(s);
    body.starts_with(|c: char| c.is_ascii_digit()) && body.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence from already separated token surfaces, with
    /// synthetic offsets as if they were joined by single spaces.
    pub fn from_surfaces<S: AsRef<str>>(surfaces: &[S]) -> Self {
        let mut offset = 0;
        let tokens = surfaces
            .iter()
            .map(|s| {
                let t = Token::new(s.as_ref(), offset, 1);
                offset += t.char_len() + 1;
                t
            })
            .collect();
        Sentence { doc_id: String::new(), index: 0, tokens }
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    pub fn text(&self) -> String {
        detokenize(&self.surfaces())
    }
}

/// A source document split into sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let id = id.into();
        let text = text.into();
        let mut sentences = tokenize(&text);
        for s in &mut sentences {
            s.doc_id = id.clone();
        }
        Document { id, text, sentences }
    }

    /// Physical lines of the source (a final unterminated line counts).
    pub fn line_count(&self) -> usize {
        self.text.lines().count()
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split text into sentences of tokens.
///
/// Sentences end after `.`, `!` or `?` (a run of terminators stays with its
/// sentence) and at every newline. Every non-whitespace character of the
/// input belongs to exactly one token.
pub fn tokenize(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut pending_close = false;
    let mut line = 1;
    let mut i = 0;

    let flush = |current: &mut Vec<Token>, sentences: &mut Vec<Sentence>| {
        if !current.is_empty() {
            let index = sentences.len();
            sentences.push(Sentence { doc_id: String::new(), index, tokens: std::mem::take(current) });
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            flush(&mut current, &mut sentences);
            pending_close = false;
            line += 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let end = scan_token(&chars, i);
        let surface: String = chars[start..end].iter().collect();
        let terminator = end - start == 1 && is_terminator(c);
        if pending_close && !terminator {
            flush(&mut current, &mut sentences);
            pending_close = false;
        }
        current.push(Token::new(surface, start, line));
        if terminator {
            pending_close = true;
        }
        i = end;
    }
    flush(&mut current, &mut sentences);
    sentences
}

/// Returns the exclusive end of the token starting at `i`.
fn scan_token(chars: &[char], i: usize) -> usize {
    let c = chars[i];
    if c == '⟨' {
        let mut j = i + 1;
        while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
            j += 1;
        }
        if j > i + 1 && j < chars.len() && chars[j] == '⟩' {
            return j + 1;
        }
        return i + 1;
    }
    if !c.is_alphanumeric() {
        return i + 1;
    }
    let mut j = i + 1;
    while j < chars.len() {
        let cur = chars[j];
        if cur.is_alphanumeric() {
            j += 1;
            continue;
        }
        let next_alnum = chars.get(j + 1).is_some_and(|n| n.is_alphanumeric());
        let prev = chars[j - 1];
        let joins = match cur {
            '-' | '/' | '.' => next_alnum,
            ',' => prev.is_ascii_digit() && chars.get(j + 1).is_some_and(|n| n.is_ascii_digit()),
            '\'' | '’' => prev.is_alphabetic() && chars.get(j + 1).is_some_and(|n| n.is_alphabetic()),
            '%' => prev.is_ascii_digit(),
            _ => false,
        };
        if !joins {
            break;
        }
        j += if cur == '%' { 1 } else { 2 };
        if cur == '%' {
            break;
        }
    }
    j
}

const NO_SPACE_BEFORE: &[&str] = &[".", ",", ";", ":", "!", "?", ")", "]", "%"];
const NO_SPACE_AFTER: &[&str] = &["(", "["];

/// Join token surfaces into readable text: single spaces, no space before
/// closing punctuation.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for t in tokens {
        let t = t.as_ref();
        if let Some(p) = prev {
            if !NO_SPACE_BEFORE.contains(&t) && !NO_SPACE_AFTER.contains(&p) {
                out.push(' ');
            }
        }
        out.push_str(t);
        prev = Some(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(s: &Sentence) -> Vec<&str> {
        s.surfaces()
    }

    #[test]
    fn single_instruction() {
        let s = tokenize("Progressively heat the probe.");
        assert_eq!(s.len(), 1);
        assert_eq!(surfaces(&s[0]), vec!["Progressively", "heat", "the", "probe", "."]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \n\n ").is_empty());
    }

    #[test]
    fn newline_ends_sentence() {
        let s = tokenize("Close valve A\nOpen valve B");
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].tokens[0].line, 2);
        assert_eq!(s[1].index, 1);
    }

    #[test]
    fn compound_tokens() {
        let s = tokenize("plug-in at 65% above V1, then 3.5 or 1,000 kts");
        assert_eq!(
            surfaces(&s[0]),
            vec!["plug-in", "at", "65%", "above", "V1", ",", "then", "3.5", "or", "1,000", "kts"]
        );
    }

    #[test]
    fn terminator_runs_stay_together() {
        let s = tokenize("Stop now... Then go!");
        assert_eq!(s.len(), 2);
        assert_eq!(surfaces(&s[0]), vec!["Stop", "now", ".", ".", "."]);
    }

    #[test]
    fn placeholder_is_one_token() {
        let s = tokenize("less than ⟨value⟩ knots");
        assert_eq!(surfaces(&s[0]), vec!["less", "than", "⟨value⟩", "knots"]);
    }

    #[test]
    fn detokenize_attaches_punctuation() {
        assert_eq!(detokenize(&["valve", ".", "The", "goal"]), "valve. The goal");
        assert_eq!(detokenize(&["reach", "65", "%"]), "reach 65%");
    }

    proptest! {
        #[test]
        fn offsets_cover_every_character(text in "[a-zA-Z0-9 .,!?%'\\-\n\t]{0,80}") {
            let chars: Vec<char> = text.chars().collect();
            let mut covered = vec![false; chars.len()];
            let mut last = None;
            for s in tokenize(&text) {
                prop_assert!(!s.tokens.is_empty());
                for t in &s.tokens {
                    if let Some(prev) = last {
                        prop_assert!(t.offset > prev);
                    }
                    last = Some(t.offset);
                    let span: String = chars[t.offset..t.offset + t.char_len()].iter().collect();
                    prop_assert_eq!(&span, &t.surface);
                    for c in covered.iter_mut().skip(t.offset).take(t.char_len()) {
                        *c = true;
                    }
                }
            }
            for (c, seen) in chars.iter().zip(covered) {
                prop_assert!(seen || c.is_whitespace(), "lost {:?}", c);
            }
        }

        #[test]
        fn deterministic(text in ".{0,60}") {
            prop_assert_eq!(tokenize(&text), tokenize(&text));
        }
    }
}
