//! Correction memory: alignment, classification, the on-disk store, and
//! what is learned and induced from it.

mod align;
mod classify;
mod induce;
mod learn;
mod store;

pub use align::{align, Alignment, Op};
pub use classify::{classify, is_quantity_token, Case, Classification, ClassifyParams, QUANTITY_WORDS};
pub use induce::{class_id, induce, InduceSummary};
pub use learn::{learn, mine_correct, revised_region, LearnError, LearnSummary};
pub use store::{
    write_atomic, CorrectionRecord, Demotion, Derived, Filler, Header, MemoryStore, PatternSupport, Realization,
    RealizationClass, Recommendation, StoreError, StoreLock, Validation, STORE_FORMAT, STORE_VERSION,
};
