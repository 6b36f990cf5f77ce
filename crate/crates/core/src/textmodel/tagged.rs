//! Tagged fragments: token sequences with `<fuzzy>` / `<revised>` regions.
//!
//! The canonical text form separates every token and tag by a single space,
//! e.g. `<fuzzy> progressively </fuzzy> heat the probe`. Parsing also
//! accepts tags glued to words (`<revised>progressively in 5 seconds</revised>`).

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::token::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagKind {
    Fuzzy,
    Revised,
}

impl TagKind {
    pub fn name(self) -> &'static str {
        match self {
            TagKind::Fuzzy => "fuzzy",
            TagKind::Revised => "revised",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "fuzzy" => Some(TagKind::Fuzzy),
            "revised" => Some(TagKind::Revised),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Token(String),
    Open(TagKind),
    Close(TagKind),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("unbalanced <{tag}> tag at offset {offset}")]
    Unbalanced { tag: String, offset: usize },
    #[error("unknown tag <{tag}> at offset {offset}")]
    UnknownTag { tag: String, offset: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TaggedFragment {
    pub elements: Vec<Element>,
}

impl TaggedFragment {
    /// A fragment with `kind` tags around `region` (token indices). An empty
    /// region yields adjacent open/close tags at `region.start`.
    pub fn with_region<S: AsRef<str>>(tokens: &[S], region: std::ops::Range<usize>, kind: TagKind) -> Self {
        let mut elements = Vec::with_capacity(tokens.len() + 2);
        for i in 0..=tokens.len() {
            if i == region.start {
                elements.push(Element::Open(kind));
            }
            if i == region.end {
                elements.push(Element::Close(kind));
            }
            if let Some(t) = tokens.get(i) {
                elements.push(Element::Token(t.as_ref().to_string()));
            }
        }
        TaggedFragment { elements }
    }

    pub fn plain(tokens: &[impl AsRef<str>]) -> Self {
        TaggedFragment { elements: tokens.iter().map(|t| Element::Token(t.as_ref().to_string())).collect() }
    }

    /// Token surfaces with tags stripped.
    pub fn tokens(&self) -> Vec<&str> {
        self.elements
            .iter()
            .filter_map(|e| match e {
                Element::Token(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Token-index ranges of every region of the given kind.
    pub fn regions(&self, kind: TagKind) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut idx = 0;
        let mut start = None;
        for e in &self.elements {
            match e {
                Element::Token(_) => idx += 1,
                Element::Open(k) if *k == kind => start = Some(idx),
                Element::Close(k) if *k == kind => {
                    if let Some(s) = start.take() {
                        out.push(s..idx);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

impl fmt::Display for TaggedFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_tagged(self))
    }
}

/// Stored as its canonical text.
impl Serialize for TaggedFragment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_tagged(self))
    }
}

impl<'de> Deserialize<'de> for TaggedFragment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_tagged(&text).map_err(serde::de::Error::custom)
    }
}

pub fn render_tagged(fragment: &TaggedFragment) -> String {
    let parts: Vec<String> = fragment
        .elements
        .iter()
        .map(|e| match e {
            Element::Token(t) => t.clone(),
            Element::Open(k) => format!("<{}>", k.name()),
            Element::Close(k) => format!("</{}>", k.name()),
        })
        .collect();
    parts.join(" ")
}

pub fn parse_tagged(text: &str) -> Result<TaggedFragment, TagError> {
    let chars: Vec<char> = text.chars().collect();
    let mut elements = Vec::new();
    let mut open: Option<(TagKind, usize)> = None;
    let mut segment_start = 0;
    let mut i = 0;

    let push_segment = |elements: &mut Vec<Element>, from: usize, to: usize| {
        let seg: String = chars[from..to].iter().collect();
        for s in tokenize(&seg) {
            elements.extend(s.tokens.into_iter().map(|t| Element::Token(t.surface)));
        }
    };

    while i < chars.len() {
        if chars[i] != '<' {
            i += 1;
            continue;
        }
        let closing = chars.get(i + 1) == Some(&'/');
        let name_start = if closing { i + 2 } else { i + 1 };
        if !chars.get(name_start).is_some_and(|c| c.is_ascii_alphabetic()) {
            // a literal '<', e.g. "< 5 bar"
            i += 1;
            continue;
        }
        let Some(rel_end) = chars[name_start..].iter().position(|&c| c == '>') else {
            let tag: String = chars[name_start..].iter().take_while(|c| c.is_ascii_alphanumeric()).collect();
            return Err(TagError::UnknownTag { tag, offset: i });
        };
        let name: String = chars[name_start..name_start + rel_end].iter().collect();
        let kind = TagKind::from_name(&name).ok_or_else(|| TagError::UnknownTag { tag: name.clone(), offset: i })?;

        push_segment(&mut elements, segment_start, i);
        match (closing, open) {
            (false, None) => {
                open = Some((kind, i));
                elements.push(Element::Open(kind));
            }
            (true, Some((k, _))) if k == kind => {
                open = None;
                elements.push(Element::Close(kind));
            }
            (false, Some(_)) | (true, _) => {
                return Err(TagError::Unbalanced { tag: name, offset: i });
            }
        }
        i = name_start + rel_end + 1;
        segment_start = i;
    }
    if let Some((kind, offset)) = open {
        return Err(TagError::Unbalanced { tag: kind.name().to_string(), offset });
    }
    push_segment(&mut elements, segment_start, chars.len());
    Ok(TaggedFragment { elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn glued_revised_region() {
        let f = parse_tagged("heat the probe <revised>progressively in 5 seconds</revised>").unwrap();
        assert_eq!(f.regions(TagKind::Revised), vec![3..7]);
        assert_eq!(f.tokens(), vec!["heat", "the", "probe", "progressively", "in", "5", "seconds"]);
        assert_eq!(render_tagged(&f), "heat the probe <revised> progressively in 5 seconds </revised>");
    }

    #[test]
    fn no_tags() {
        let f = parse_tagged("plain text").unwrap();
        assert_eq!(f.elements, vec![Element::Token("plain".into()), Element::Token("text".into())]);
    }

    #[test]
    fn mismatched_close_is_unbalanced() {
        let err = parse_tagged("<fuzzy>a</revised>").unwrap_err();
        assert_eq!(err, TagError::Unbalanced { tag: "revised".into(), offset: 8 });
    }

    #[test]
    fn nesting_and_unclosed() {
        assert!(matches!(parse_tagged("<fuzzy> a <revised> b </revised> </fuzzy>"), Err(TagError::Unbalanced { .. })));
        assert!(matches!(parse_tagged("x <revised> y"), Err(TagError::Unbalanced { offset: 2, .. })));
    }

    #[test]
    fn unknown_tags_and_attributes() {
        assert!(matches!(parse_tagged("<b>x</b>"), Err(TagError::UnknownTag { .. })));
        assert!(matches!(parse_tagged("<fuzzy id=1 sev=3>x</fuzzy>"), Err(TagError::UnknownTag { .. })));
    }

    #[test]
    fn literal_angle_bracket() {
        let f = parse_tagged("pressure < 5 bar").unwrap();
        assert_eq!(f.tokens(), vec!["pressure", "<", "5", "bar"]);
    }

    #[test]
    fn empty_region() {
        let f = TaggedFragment::with_region(&["any", "new", "conditions"], 2..2, TagKind::Revised);
        assert_eq!(render_tagged(&f), "any new <revised> </revised> conditions");
        assert_eq!(parse_tagged(&render_tagged(&f)).unwrap(), f);
        let tail = TaggedFragment::with_region(&["a", "b"], 2..2, TagKind::Revised);
        assert_eq!(render_tagged(&tail), "a b <revised> </revised>");
    }

    #[test]
    fn region_at_end() {
        let f = TaggedFragment::with_region(&["heat", "the", "probe", "in", "5", "s"], 3..6, TagKind::Revised);
        assert_eq!(render_tagged(&f), "heat the probe <revised> in 5 s </revised>");
    }

    fn token_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z]{1,8}",
            "[a-z]{1,4}-[a-z]{1,4}",
            "[0-9]{1,3}(\\.[0-9])?%?",
            "[A-Z][0-9]",
            prop::sample::select(vec![".", ",", ";", "!", "?", ":", "(", ")"]).prop_map(String::from),
        ]
    }

    fn fragment_strategy() -> impl Strategy<Value = TaggedFragment> {
        (prop::collection::vec(token_strategy(), 0..12), any::<u8>(), any::<u8>(), any::<bool>()).prop_map(
            |(tokens, a, b, fuzzy)| {
                if tokens.is_empty() || a % 3 == 0 {
                    return TaggedFragment::plain(&tokens);
                }
                let n = tokens.len();
                let (x, y) = ((a as usize) % (n + 1), (b as usize) % (n + 1));
                let region = x.min(y)..x.max(y);
                let kind = if fuzzy { TagKind::Fuzzy } else { TagKind::Revised };
                TaggedFragment::with_region(&tokens, region, kind)
            },
        )
    }

    proptest! {
        #[test]
        fn parse_inverts_render(f in fragment_strategy()) {
            let text = render_tagged(&f);
            let back = parse_tagged(&text).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(render_tagged(&back), text);
        }
    }
}
