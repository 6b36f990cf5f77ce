//! Pattern file syntax.
//!
//! One pattern per block, blocks separated by blank lines:
//!
//! ```text
//! P-near: [@near|"next to" D:gap(0,2) L:noun(location)] -> [less than <distance> from $D $L]
//! note: preposition replaced by a bounded distance
//! ```
//!
//! Left-hand side elements:
//!
//! | form | meaning |
//! |------|---------|
//! | `word` | literal, compared by lemma |
//! | `@lemma`, `@"multi word"`, `@a\|"b c"` | the fuzzy item, restricted to these lemmas |
//! | `@:category` | the fuzzy item, restricted to a category |
//! | `@` | the fuzzy item, unrestricted |
//! | `Name:pos` or `Name:pos(feature,...)` | one word of that category (a whole compound for `noun`) |
//! | `Name:number` | a numeral |
//! | `Name:gap(min,max)`, `Name:gap`, `...` | `min..=max` tokens (default 0 to 3) |
//! | `^`, `$` | sentence start, sentence end |
//!
//! Without an `@` element, the leading run of literals is the item slot.
//! Right-hand side elements are literal words, `$Name` copies of bound
//! variables (`$@` is the item itself) and typed slots `<type>` or
//! `<name:type>`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lexicon::{normalize_phrase, Category, Feature, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pattern {id}: line {line}, element {position}: {message}")]
pub struct PatternError {
    pub id: String,
    pub line: usize,
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemSlot {
    Any,
    Lemmas(Vec<String>),
    Category(Category),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarPos {
    Pos(Pos),
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LhsElem {
    Literal(String),
    Item(ItemSlot),
    CatVar { name: String, pos: VarPos, features: Vec<Feature> },
    Gap { name: Option<String>, min: usize, max: usize },
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotType {
    Value,
    Interval,
    Time,
    TimeInterval,
    Distance,
    Warning,
    Paraphrase,
}

impl SlotType {
    pub const ALL: [SlotType; 7] = [
        SlotType::Value,
        SlotType::Interval,
        SlotType::Time,
        SlotType::TimeInterval,
        SlotType::Distance,
        SlotType::Warning,
        SlotType::Paraphrase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlotType::Value => "value",
            SlotType::Interval => "interval",
            SlotType::Time => "time",
            SlotType::TimeInterval => "time_interval",
            SlotType::Distance => "distance",
            SlotType::Warning => "warning",
            SlotType::Paraphrase => "paraphrase",
        }
    }

    /// Slots filled by measured quantities, which mined realizations can
    /// supply.
    pub fn is_quantity(self) -> bool {
        !matches!(self, SlotType::Warning | SlotType::Paraphrase)
    }

    pub fn placeholder(self) -> String {
        format!("⟨{}⟩", self.as_str())
    }
}

impl fmt::Display for SlotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlotType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlotType::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown slot type {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSpec {
    pub name: String,
    pub slot_type: SlotType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsElem {
    Literal(String),
    /// A bound variable; `@` is the item.
    Copy(String),
    Slot(SlotSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionPattern {
    pub id: String,
    pub lhs: Vec<LhsElem>,
    pub rhs: Vec<RhsElem>,
    pub notes: Vec<String>,
    /// Text of the rule line, used to group alternative rewrites.
    pub lhs_text: String,
}

impl CorrectionPattern {
    pub fn item_slot(&self) -> &ItemSlot {
        self.lhs
            .iter()
            .find_map(|e| match e {
                LhsElem::Item(s) => Some(s),
                _ => None,
            })
            .expect("parsed patterns have an item slot")
    }

    /// Literals, plus one when the item slot names lemmas.
    pub fn specificity(&self) -> usize {
        let literals = self.lhs.iter().filter(|e| matches!(e, LhsElem::Literal(_))).count();
        literals + usize::from(matches!(self.item_slot(), ItemSlot::Lemmas(_)))
    }

    pub fn slots(&self) -> Vec<&SlotSpec> {
        self.rhs
            .iter()
            .filter_map(|e| match e {
                RhsElem::Slot(s) => Some(s),
                _ => None,
            })
            .collect()
    }

    /// Literal words of the right-hand side, lowercased.
    pub fn rhs_literals(&self) -> BTreeSet<String> {
        self.rhs
            .iter()
            .filter_map(|e| match e {
                RhsElem::Literal(w) => Some(w.to_lowercase()),
                _ => None,
            })
            .collect()
    }
}

/// Splits on whitespace, keeping double-quoted runs inside one element.
fn split_elements(s: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                cur.push(c);
            }
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn unquote(s: &str) -> String {
    normalize_phrase(s.trim_matches('"'))
}

/// Splits `a|"b c"` on bars outside quotes.
fn split_alternatives(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in s.chars() {
        match c {
            '"' => quoted = !quoted,
            '|' if !quoted => out.push(std::mem::take(&mut cur)),
            c => cur.push(c),
        }
    }
    out.push(cur);
    out.into_iter().map(|a| normalize_phrase(&a)).collect()
}

fn is_var_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `gap(1,8)` or `noun(location)` into head and comma-separated arguments.
fn call(spec: &str) -> Result<(&str, Vec<&str>), String> {
    match spec.split_once('(') {
        None => Ok((spec, Vec::new())),
        Some((head, rest)) => {
            let args = rest.strip_suffix(')').ok_or_else(|| format!("missing ')' in {spec:?}"))?;
            Ok((head, args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect()))
        }
    }
}

fn parse_lhs_elem(el: &str) -> Result<LhsElem, String> {
    if el == "^" {
        return Ok(LhsElem::Start);
    }
    if el == "$" {
        return Ok(LhsElem::End);
    }
    if el == "..." {
        return Ok(LhsElem::Gap { name: None, min: 0, max: 3 });
    }
    if let Some(rest) = el.strip_prefix('@') {
        if rest.is_empty() {
            return Ok(LhsElem::Item(ItemSlot::Any));
        }
        if let Some(cat) = rest.strip_prefix(':') {
            return Ok(LhsElem::Item(ItemSlot::Category(cat.parse()?)));
        }
        let alts = split_alternatives(rest);
        if alts.iter().any(String::is_empty) {
            return Err(format!("empty alternative in {el:?}"));
        }
        return Ok(LhsElem::Item(ItemSlot::Lemmas(alts)));
    }
    if let Some((name, spec)) = el.split_once(':') {
        if !is_var_name(name) {
            return Err(format!("variable names start with an uppercase letter, got {name:?}"));
        }
        let (head, args) = call(spec)?;
        return match head {
            "gap" => {
                let (min, max) = match args.as_slice() {
                    [] => (0, 3),
                    [min, max] => (
                        min.parse().map_err(|_| format!("bad gap bound {min:?}"))?,
                        max.parse().map_err(|_| format!("bad gap bound {max:?}"))?,
                    ),
                    _ => return Err("gap takes two bounds".into()),
                };
                if min > max {
                    return Err(format!("gap bounds {min} > {max}"));
                }
                Ok(LhsElem::Gap { name: Some(name.to_string()), min, max })
            }
            "number" => Ok(LhsElem::CatVar { name: name.to_string(), pos: VarPos::Number, features: Vec::new() }),
            pos => {
                let pos: Pos = pos.parse()?;
                let features = args.iter().map(|f| f.parse::<Feature>()).collect::<Result<Vec<_>, _>>()?;
                Ok(LhsElem::CatVar { name: name.to_string(), pos: VarPos::Pos(pos), features })
            }
        };
    }
    if el.contains('"') {
        return Ok(LhsElem::Literal(unquote(el)));
    }
    Ok(LhsElem::Literal(el.to_lowercase()))
}

fn parse_rhs_elem(el: &str) -> Result<RhsElem, String> {
    if let Some(var) = el.strip_prefix('$') {
        if var == "@" || is_var_name(var) {
            return Ok(RhsElem::Copy(var.to_string()));
        }
        return Err(format!("bad variable reference {el:?}"));
    }
    if let Some(inner) = el.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        let (name, ty) = match inner.split_once(':') {
            Some((n, t)) => (n.to_string(), t),
            None => (inner.to_string(), inner),
        };
        return Ok(RhsElem::Slot(SlotSpec { name, slot_type: ty.parse()? }));
    }
    Ok(RhsElem::Literal(el.trim_matches('"').to_string()))
}

fn bracketed(s: &str) -> Option<&str> {
    s.trim().strip_prefix('[')?.strip_suffix(']')
}

/// Parses one rule line `ID: [lhs] -> [rhs]`.
pub fn parse_rule(line: &str, line_no: usize) -> Result<CorrectionPattern, PatternError> {
    let (id, body) = line.split_once(':').ok_or_else(|| PatternError {
        id: String::new(),
        line: line_no,
        position: 0,
        message: "expected `ID: [lhs] -> [rhs]`".into(),
    })?;
    let id = id.trim().to_string();
    let err = |position: usize, message: String| PatternError { id: id.clone(), line: line_no, position, message };
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(err(0, "pattern id must be one non-empty word".into()));
    }
    let (lhs_src, rhs_src) = body.split_once("->").ok_or_else(|| err(0, "missing `->`".into()))?;
    let lhs_inner = bracketed(lhs_src).ok_or_else(|| err(0, "left-hand side must be in [ ]".into()))?;
    let rhs_inner = bracketed(rhs_src).ok_or_else(|| err(0, "right-hand side must be in [ ]".into()))?;

    let lhs_els = split_elements(lhs_inner).map_err(|m| err(0, m))?;
    let mut lhs = Vec::new();
    for (i, el) in lhs_els.iter().enumerate() {
        lhs.push(parse_lhs_elem(el).map_err(|m| err(i + 1, m))?);
    }
    let item_slots = lhs.iter().filter(|e| matches!(e, LhsElem::Item(_))).count();
    if item_slots == 0 {
        let run = lhs.iter().take_while(|e| matches!(e, LhsElem::Literal(_))).count();
        if run == 0 {
            return Err(err(1, "no item slot: mark it with @ or start with the item's words".into()));
        }
        let words: Vec<String> = lhs
            .drain(..run)
            .map(|e| match e {
                LhsElem::Literal(w) => w,
                _ => unreachable!(),
            })
            .collect();
        lhs.insert(0, LhsElem::Item(ItemSlot::Lemmas(vec![words.join(" ")])));
    } else if item_slots > 1 {
        return Err(err(0, "more than one item slot".into()));
    }

    let mut bound = BTreeSet::new();
    for (i, e) in lhs.iter().enumerate() {
        let name = match e {
            LhsElem::CatVar { name, .. } | LhsElem::Gap { name: Some(name), .. } => name,
            _ => continue,
        };
        if !bound.insert(name.clone()) {
            return Err(err(i + 1, format!("variable {name} bound twice")));
        }
    }
    for (i, e) in lhs.iter().enumerate() {
        let misplaced = match e {
            LhsElem::Start => i != 0,
            LhsElem::End => i + 1 != lhs.len(),
            _ => false,
        };
        if misplaced {
            return Err(err(i + 1, "^ must come first and $ last".into()));
        }
    }

    let rhs_els = split_elements(rhs_inner).map_err(|m| err(0, m))?;
    let mut rhs = Vec::new();
    let mut slot_names = BTreeSet::new();
    for (i, el) in rhs_els.iter().enumerate() {
        let parsed = parse_rhs_elem(el).map_err(|m| err(lhs_els.len() + i + 1, m))?;
        match &parsed {
            RhsElem::Copy(v) if v != "@" && !bound.contains(v) => {
                return Err(err(lhs_els.len() + i + 1, format!("${v} is not bound on the left-hand side")));
            }
            RhsElem::Slot(s) if !slot_names.insert(s.name.clone()) => {
                return Err(err(lhs_els.len() + i + 1, format!("slot name {} used twice", s.name)));
            }
            RhsElem::Literal(w) => {
                // a literal may hold several words when quoted
                for word in w.split_whitespace() {
                    rhs.push(RhsElem::Literal(word.to_string()));
                }
                continue;
            }
            _ => {}
        }
        rhs.push(parsed);
    }

    Ok(CorrectionPattern { id, lhs, rhs, notes: Vec::new(), lhs_text: lhs_els.join(" ") })
}

/// Parses a whole pattern file.
pub fn parse_patterns(text: &str) -> Result<Vec<CorrectionPattern>, PatternError> {
    let mut out: Vec<CorrectionPattern> = Vec::new();
    let mut in_block = false;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            in_block = false;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(note) = line.strip_prefix("note:") {
            match (in_block, out.last_mut()) {
                (true, Some(p)) => p.notes.push(note.trim().to_string()),
                _ => {
                    return Err(PatternError {
                        id: String::new(),
                        line: n + 1,
                        position: 0,
                        message: "note outside a pattern block".into(),
                    })
                }
            }
            continue;
        }
        if in_block {
            let id = out.last().map(|p| p.id.clone()).unwrap_or_default();
            return Err(PatternError { id, line: n + 1, position: 0, message: "one pattern per block".into() });
        }
        out.push(parse_rule(line, n + 1)?);
        in_block = true;
    }
    Ok(out)
}

/// Canonical text of a pattern, parseable by [`parse_rule`].
pub fn render_rule(p: &CorrectionPattern) -> String {
    let rhs: Vec<String> = p
        .rhs
        .iter()
        .map(|e| match e {
            RhsElem::Literal(w) => w.clone(),
            RhsElem::Copy(v) => format!("${v}"),
            RhsElem::Slot(s) if s.name == s.slot_type.as_str() => format!("<{}>", s.slot_type),
            RhsElem::Slot(s) => format!("<{}:{}>", s.name, s.slot_type),
        })
        .collect();
    format!("{}: [{}] -> [{}]", p.id, p.lhs_text, rhs.join(" "))
}
