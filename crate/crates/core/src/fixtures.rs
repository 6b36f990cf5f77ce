//! Bundled worked examples: correction pairs with their expected case, and
//! pattern rewrites with the filler that produces them.

use crate::memory::Case;

const FIXTURES: &str = include_str!("../data/fixtures.tsv");
const REWRITES: &str = include_str!("../data/rewrites.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub id: String,
    pub item: String,
    pub case: Case,
    pub original: String,
    pub corrected: Option<String>,
}

impl Fixture {
    /// The corrected text, or the original when it was left as is.
    pub fn corrected_text(&self) -> &str {
        self.corrected.as_deref().unwrap_or(&self.original)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub pattern: String,
    pub input: String,
    pub item: String,
    pub filler: Option<String>,
    pub expected: String,
}

fn rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).map(|l| l.split('\t').collect())
}

fn optional(s: &str) -> Option<String> {
    (s != "-").then(|| s.to_string())
}

pub fn correction_fixtures() -> Vec<Fixture> {
    rows(FIXTURES)
        .map(|f| Fixture {
            id: f[0].into(),
            item: f[1].into(),
            case: f[2].parse::<u8>().ok().and_then(|n| Case::try_from(n).ok()).expect("fixture case"),
            original: f[3].into(),
            corrected: optional(f[4]),
        })
        .collect()
}

pub fn rewrite_fixtures() -> Vec<Rewrite> {
    rows(REWRITES)
        .map(|f| Rewrite {
            pattern: f[0].into(),
            input: f[1].into(),
            item: f[2].into(),
            filler: optional(f[3]),
            expected: f[4].into(),
        })
        .collect()
}

/// Every fixture text, used to check the pattern catalog for overlaps.
pub fn corpus() -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in correction_fixtures() {
        out.push(f.original);
    }
    for r in rewrite_fixtures() {
        if !out.contains(&r.input) {
            out.push(r.input);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_load() {
        let f = correction_fixtures();
        assert_eq!(f.len(), 13);
        assert_eq!(f.iter().filter(|x| x.case == Case::NotCorrected).count(), 2);
        assert!(f.iter().all(|x| x.corrected.is_none() == (x.case == Case::NotCorrected)));
        assert_eq!(rewrite_fixtures().len(), 8);
    }
}
