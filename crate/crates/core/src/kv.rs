//! Line-oriented `key=value` records.
//!
//! Fields are separated by TAB. Inside values, `\`, TAB, LF and CR are
//! escaped as `\\`, `\t`, `\n`, `\r`. List values join items with `|`, and
//! a `|` inside an item is written `\|`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KvError {
    #[error("field {index}: missing '='")]
    MissingEquals { index: usize },
    #[error("invalid escape \\{0}")]
    BadEscape(char),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("field {key:?}: {message}")]
    BadValue { key: String, message: String },
}

fn escape_into(out: &mut String, s: &str, escape_bar: bool) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '|' if escape_bar => out.push_str("\\|"),
            c => out.push(c),
        }
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s, false);
    out
}

pub fn unescape(s: &str) -> Result<String, KvError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('|') => out.push('|'),
            Some(other) => return Err(KvError::BadEscape(other)),
            None => return Err(KvError::BadEscape(' ')),
        }
    }
    Ok(out)
}

/// Joins list items into one (unescaped) value; pair with [`encode`].
pub fn join_list<S: AsRef<str>>(items: &[S]) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        for c in item.as_ref().chars() {
            if c == '|' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
    }
    out
}

/// Inverse of [`join_list`]. The empty string is the empty list.
pub fn split_list(value: &str) -> Vec<String> {
    if value.is_empty() {
        return Vec::new();
    }
    let mut items = vec![String::new()];
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(n) = chars.next() {
                    items.last_mut().unwrap().push(n);
                }
            }
            '|' => items.push(String::new()),
            c => items.last_mut().unwrap().push(c),
        }
    }
    items
}

/// Builds one record line (without trailing newline).
pub fn encode<K: AsRef<str>, V: AsRef<str>>(fields: &[(K, V)]) -> String {
    let mut out = String::new();
    for (i, (k, v)) in fields.iter().enumerate() {
        if i > 0 {
            out.push('\t');
        }
        out.push_str(k.as_ref());
        out.push('=');
        escape_into(&mut out, v.as_ref(), false);
    }
    out
}

/// Parsed record with in-order fields.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Record {
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, KvError> {
        self.get(key).ok_or_else(|| KvError::MissingField(key.to_string()))
    }

    pub fn parse_field<T: std::str::FromStr>(&self, key: &str) -> Result<T, KvError>
    where
        T::Err: std::fmt::Display,
    {
        self.require(key)?
            .parse()
            .map_err(|e: T::Err| KvError::BadValue { key: key.to_string(), message: e.to_string() })
    }
}

pub fn decode(line: &str) -> Result<Record, KvError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let mut fields = Vec::new();
    if line.is_empty() {
        return Ok(Record { fields });
    }
    for (index, part) in line.split('\t').enumerate() {
        let (k, v) = part.split_once('=').ok_or(KvError::MissingEquals { index })?;
        fields.push((k.to_string(), unescape(v)?));
    }
    Ok(Record { fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encodes_special_characters() {
        let line = encode(&[("a", "x\ty"), ("b", "back\\slash\nnl")]);
        assert_eq!(line, "a=x\\ty\tb=back\\\\slash\\nnl");
        let rec = decode(&line).unwrap();
        assert_eq!(rec.get("a"), Some("x\ty"));
        assert_eq!(rec.get("b"), Some("back\\slash\nnl"));
    }

    #[test]
    fn lists() {
        let joined = join_list(&["in 30 seconds@3", "a|b", ""]);
        assert_eq!(split_list(&joined), vec!["in 30 seconds@3", "a|b", ""]);
        assert!(split_list("").is_empty());
    }

    #[test]
    fn malformed() {
        assert_eq!(decode("novalue"), Err(KvError::MissingEquals { index: 0 }));
        assert_eq!(decode("a=\\q"), Err(KvError::BadEscape('q')));
    }

    proptest! {
        #[test]
        fn record_round_trip(fields in prop::collection::vec(("[a-z_]{1,8}", ".{0,20}"), 1..6)) {
            let line = encode(&fields);
            prop_assert!(!line.contains('\n'));
            let rec = decode(&line).unwrap();
            prop_assert_eq!(rec.fields, fields);
        }

        #[test]
        fn list_round_trip(items in prop::collection::vec(".{0,10}", 1..5)) {
            prop_assume!(!(items.len() == 1 && items[0].is_empty()));
            prop_assert_eq!(split_list(&join_list(&items)), items);
        }
    }
}
