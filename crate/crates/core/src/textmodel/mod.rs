//! Tokens, sentences, lemmas, content units and tagged fragments.

mod compounds;
mod lemma;
mod tagged;
mod token;

pub use compounds::{group_compounds, Unit};
pub use lemma::lemmatize;
pub use tagged::{parse_tagged, render_tagged, Element, TagError, TagKind, TaggedFragment};
pub use token::{detokenize, is_numeric_str, tokenize, Document, Sentence, Token};
