//! Correction patterns: a left-hand template anchored on the fuzzy item,
//! rewritten into a right-hand template with typed slots.

mod catalog;
mod matcher;
mod suggest;
mod syntax;

pub use catalog::{catalog_from_text, load_patterns, overlap_warnings, Catalog, CatalogError, BUILTIN_PATTERNS};
pub use matcher::{apply, find_matches, match_at, ApplyError, Binding, Rewrite};
pub use suggest::{render_fillers, strip_words, suggest, suggestion_line, trim_filler, Suggestion};
pub use syntax::{
    parse_patterns, parse_rule, render_rule, CorrectionPattern, ItemSlot, LhsElem, PatternError, RhsElem, SlotSpec,
    SlotType, VarPos,
};
