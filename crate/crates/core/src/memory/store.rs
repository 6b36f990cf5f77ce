//! On-disk correction memory.
//!
//! The store is a JSON-lines file: a header line, then one line per
//! correction record, mined realization and operator validation, each tagged
//! with `"kind"`. Every line carries a store-wide sequence number used as a
//! logical timestamp. Tables derived by induction live in a sibling
//! `<store>.derived` file and can always be rebuilt from the main file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::classify::Case;
use crate::detector::{Context, DeactivationSet};
use crate::lexicon::{Category, Severity};
use crate::textmodel::{TagKind, TaggedFragment};

pub const STORE_FORMAT: &str = "fuzzmem-store";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported store header: {0}")]
    Header(String),
    #[error("store is locked by another process ({0} exists)")]
    Locked(PathBuf),
    #[error("no deactivation with id {0:?}")]
    UnknownDeactivation(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub written_at: Option<String>,
}

/// One observed alert with the writer's correction (or lack of one).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    pub seq: u64,
    pub doc: String,
    pub sentence: usize,
    pub item: String,
    pub category: Category,
    pub severity: Severity,
    /// Whole sentence with the item inside `<fuzzy>` tags.
    pub original: TaggedFragment,
    /// Whole corrected sentence with the changed part inside `<revised>`
    /// tags; absent when the sentence was left as is.
    pub corrected: Option<TaggedFragment>,
    pub writer: String,
    pub context: Context,
    pub case: Case,
}

impl CorrectionRecord {
    pub fn item_span(&self) -> Range<usize> {
        self.original.regions(TagKind::Fuzzy).into_iter().next().unwrap_or(0..0)
    }

    pub fn revised_span(&self) -> Option<Range<usize>> {
        self.corrected.as_ref().and_then(|c| c.regions(TagKind::Revised).into_iter().next())
    }

    pub fn is_corrected(&self) -> bool {
        self.case != Case::NotCorrected
    }
}

/// A quantity expression found in text that raised no alert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub seq: u64,
    pub doc: String,
    pub sentence: usize,
    pub text: String,
    /// Context around the expression; `item_lemma` is empty.
    pub context: Context,
}

/// Operator confirmation of an induced deactivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validation {
    pub seq: u64,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StoreLine {
    Header(Header),
    Record(CorrectionRecord),
    Realization(Realization),
    Validate(Validation),
}

/// A candidate slot filler with its support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filler {
    pub text: String,
    pub freq: usize,
    /// Sequence number of the most recent supporting observation.
    pub last_seq: u64,
    /// Sequence numbers of the supporting records or realizations.
    pub sources: Vec<u64>,
}

impl Filler {
    /// Adds one observation.
    pub fn observe(fillers: &mut Vec<Filler>, text: &str, seq: u64) {
        match fillers.iter_mut().find(|f| f.text == text) {
            Some(f) => {
                f.freq += 1;
                f.last_seq = f.last_seq.max(seq);
                f.sources.push(seq);
            }
            None => fillers.push(Filler { text: text.to_string(), freq: 1, last_seq: seq, sources: vec![seq] }),
        }
    }

    /// Merges fillers with the same text.
    pub fn merge(into: &mut Vec<Filler>, other: &Filler) {
        match into.iter_mut().find(|f| f.text == other.text) {
            Some(f) => {
                f.freq += other.freq;
                f.last_seq = f.last_seq.max(other.last_seq);
                f.sources.extend(&other.sources);
                f.sources.sort_unstable();
                f.sources.dedup();
            }
            None => into.push(other.clone()),
        }
    }

    /// Frequency descending, then most recent first, then text.
    pub fn rank(fillers: &mut [Filler]) {
        fillers.sort_by(|a, b| b.freq.cmp(&a.freq).then(b.last_seq.cmp(&a.last_seq)).then(a.text.cmp(&b.text)));
    }
}

/// Ranked fillers for one pattern (or raw corrections when `pattern` is
/// absent) in one context class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub pattern: Option<String>,
    pub item: String,
    pub class: String,
    pub context: Context,
    pub fillers: Vec<Filler>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationClass {
    pub id: String,
    pub context: Context,
    pub fillers: Vec<Filler>,
}

/// Suggested severity change; never applied automatically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demotion {
    pub item: String,
    pub from: Severity,
    pub to: Severity,
    pub records: usize,
    pub uncorrected: usize,
}

/// How often the corrections of each pattern's matches agree with it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSupport {
    pub pattern: String,
    /// Case 2 and 4 records whose original the pattern matches.
    pub supporting: usize,
    /// Of those, records whose correction is exactly the pattern's rewrite
    /// with the extracted filler.
    pub accepted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derived {
    pub deactivations: DeactivationSet,
    pub recommendations: Vec<Recommendation>,
    pub realization_classes: Vec<RealizationClass>,
    pub demotions: Vec<Demotion>,
    pub pattern_support: Vec<PatternSupport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DerivedLine {
    Deactivation(crate::detector::ContextualDeactivation),
    GlobalDeactivation(crate::detector::GlobalDeactivation),
    Recommendation(Recommendation),
    RealizationClass(RealizationClass),
    Demotion(Demotion),
    PatternSupport(PatternSupport),
}

impl Derived {
    /// One JSON line per entry, in a fixed order.
    pub fn lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut push = |l: DerivedLine| lines.push(serde_json::to_string(&l).expect("derived line serializes"));
        self.deactivations.contextual.iter().for_each(|d| push(DerivedLine::Deactivation(d.clone())));
        self.deactivations.global.iter().for_each(|d| push(DerivedLine::GlobalDeactivation(d.clone())));
        self.recommendations.iter().for_each(|r| push(DerivedLine::Recommendation(r.clone())));
        self.realization_classes.iter().for_each(|r| push(DerivedLine::RealizationClass(r.clone())));
        self.demotions.iter().for_each(|d| push(DerivedLine::Demotion(d.clone())));
        self.pattern_support.iter().for_each(|p| push(DerivedLine::PatternSupport(p.clone())));
        lines
    }

    pub fn to_text(&self) -> String {
        self.lines().into_iter().map(|l| l + "\n").collect()
    }

    pub fn parse(text: &str) -> Result<Derived, StoreError> {
        let mut d = Derived::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: DerivedLine =
                serde_json::from_str(line).map_err(|e| StoreError::Parse { line: n + 1, message: e.to_string() })?;
            match parsed {
                DerivedLine::Deactivation(x) => d.deactivations.contextual.push(x),
                DerivedLine::GlobalDeactivation(x) => d.deactivations.global.push(x),
                DerivedLine::Recommendation(x) => d.recommendations.push(x),
                DerivedLine::RealizationClass(x) => d.realization_classes.push(x),
                DerivedLine::Demotion(x) => d.demotions.push(x),
                DerivedLine::PatternSupport(x) => d.pattern_support.push(x),
            }
        }
        Ok(d)
    }

    /// Number of lines present in exactly one of the two tables.
    pub fn changes_from(&self, before: &Derived) -> usize {
        let a: BTreeSet<String> = before.lines().into_iter().collect();
        let b: BTreeSet<String> = self.lines().into_iter().collect();
        a.symmetric_difference(&b).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryStore {
    pub header: Header,
    pub records: Vec<CorrectionRecord>,
    pub realizations: Vec<Realization>,
    pub validations: Vec<Validation>,
    pub derived: Derived,
}

impl MemoryStore {
    pub fn new(config_hash: &str) -> Self {
        MemoryStore {
            header: Header {
                format: STORE_FORMAT.into(),
                version: STORE_VERSION,
                config_hash: config_hash.into(),
                written_at: None,
            },
            records: Vec::new(),
            realizations: Vec::new(),
            validations: Vec::new(),
            derived: Derived::default(),
        }
    }

    /// Next free sequence number.
    pub fn next_seq(&self) -> u64 {
        let max = self
            .records
            .iter()
            .map(|r| r.seq)
            .chain(self.realizations.iter().map(|r| r.seq))
            .chain(self.validations.iter().map(|v| v.seq))
            .max();
        max.map_or(1, |m| m + 1)
    }

    pub fn validated_ids(&self) -> BTreeSet<&str> {
        self.validations.iter().map(|v| v.id.as_str()).collect()
    }

    /// Marks an induced deactivation as confirmed. Returns false when it
    /// already was.
    pub fn validate(&mut self, id: &str) -> Result<bool, StoreError> {
        let d = &mut self.derived.deactivations;
        let flag = d
            .contextual
            .iter_mut()
            .find(|c| c.id == id)
            .map(|c| &mut c.validated)
            .or_else(|| d.global.iter_mut().find(|g| g.id == id).map(|g| &mut g.validated))
            .ok_or_else(|| StoreError::UnknownDeactivation(id.to_string()))?;
        *flag = true;
        if self.validations.iter().any(|v| v.id == id) {
            return Ok(false);
        }
        let seq = self.next_seq();
        self.validations.push(Validation { seq, id: id.to_string() });
        Ok(true)
    }

    /// Main file contents.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |l: StoreLine| {
            out.push_str(&serde_json::to_string(&l).expect("store line serializes"));
            out.push('\n');
        };
        push(StoreLine::Header(self.header.clone()));
        // lines are written in sequence order so the file reads as a log
        let mut body: Vec<(u64, StoreLine)> = Vec::new();
        body.extend(self.records.iter().map(|r| (r.seq, StoreLine::Record(r.clone()))));
        body.extend(self.realizations.iter().map(|r| (r.seq, StoreLine::Realization(r.clone()))));
        body.extend(self.validations.iter().map(|v| (v.seq, StoreLine::Validate(v.clone()))));
        body.sort_by_key(|(seq, _)| *seq);
        body.into_iter().for_each(|(_, l)| push(l));
        out
    }

    /// Parses a main file. The derived tables are left empty.
    pub fn parse(text: &str) -> Result<MemoryStore, StoreError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let header = match lines.next() {
            None => return Err(StoreError::Header("empty store file".into())),
            Some((n, l)) => match serde_json::from_str(l) {
                Ok(StoreLine::Header(h)) => h,
                Ok(_) => return Err(StoreError::Header("first line is not a header".into())),
                Err(e) => return Err(StoreError::Parse { line: n + 1, message: e.to_string() }),
            },
        };
        if header.format != STORE_FORMAT || header.version != STORE_VERSION {
            return Err(StoreError::Header(format!("{} version {}", header.format, header.version)));
        }
        let mut store = MemoryStore { header, ..MemoryStore::new("") };
        let mut seqs = BTreeSet::new();
        for (n, l) in lines {
            let parsed: StoreLine =
                serde_json::from_str(l).map_err(|e| StoreError::Parse { line: n + 1, message: e.to_string() })?;
            let seq = match &parsed {
                StoreLine::Header(_) => {
                    return Err(StoreError::Parse { line: n + 1, message: "second header".into() });
                }
                StoreLine::Record(r) => r.seq,
                StoreLine::Realization(r) => r.seq,
                StoreLine::Validate(v) => v.seq,
            };
            if !seqs.insert(seq) {
                return Err(StoreError::Parse { line: n + 1, message: format!("duplicate sequence number {seq}") });
            }
            match parsed {
                StoreLine::Record(r) => store.records.push(r),
                StoreLine::Realization(r) => store.realizations.push(r),
                StoreLine::Validate(v) => store.validations.push(v),
                StoreLine::Header(_) => unreachable!(),
            }
        }
        Ok(store)
    }

    pub fn derived_path(path: &Path) -> PathBuf {
        sibling(path, ".derived")
    }

    /// Loads a store; a missing file yields an empty store with the given
    /// config hash. Validation flags are re-applied to the derived tables.
    pub fn load(path: &Path, config_hash: &str) -> Result<MemoryStore, StoreError> {
        if !path.exists() {
            return Ok(MemoryStore::new(config_hash));
        }
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut store = MemoryStore::parse(&text).map_err(|e| match e {
            StoreError::Parse { line, message } => {
                StoreError::Parse { line, message: format!("{}: {message}", path.display()) }
            }
            other => other,
        })?;
        let dpath = MemoryStore::derived_path(path);
        if dpath.exists() {
            let dtext = std::fs::read_to_string(&dpath).map_err(io_err(&dpath))?;
            store.derived = Derived::parse(&dtext)?;
        }
        store.apply_validations();
        Ok(store)
    }

    pub(crate) fn apply_validations(&mut self) {
        let ids: BTreeSet<String> = self.validations.iter().map(|v| v.id.clone()).collect();
        for c in &mut self.derived.deactivations.contextual {
            c.validated = ids.contains(&c.id);
        }
        for g in &mut self.derived.deactivations.global {
            g.validated = ids.contains(&g.id);
        }
    }

    /// Atomically writes the main and derived files. With `stable`, the
    /// header carries no write time, so equal stores give equal bytes.
    pub fn save(&mut self, path: &Path, stable: bool) -> Result<(), StoreError> {
        self.header.written_at = if stable { None } else { Some(now_stamp()) };
        write_atomic(path, self.to_text().as_bytes())?;
        write_atomic(&MemoryStore::derived_path(path), self.derived.to_text().as_bytes())
    }

    /// Records per item, in item order.
    pub fn records_by_item(&self) -> BTreeMap<&str, Vec<&CorrectionRecord>> {
        let mut m: BTreeMap<&str, Vec<&CorrectionRecord>> = BTreeMap::new();
        for r in &self.records {
            m.entry(r.item.as_str()).or_default().push(r);
        }
        m
    }
}

fn now_stamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes to a temporary file in the target directory, then renames it
/// over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Advisory lock held by mutating commands; released on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
    _file: File,
}

impl StoreLock {
    pub fn acquire(store: &Path) -> Result<StoreLock, StoreError> {
        let path = sibling(store, ".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(StoreLock { path, _file: file })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(StoreError::Locked(path)),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{ContextWord, ContextualDeactivation};
    use crate::lexicon::Pos;
    use crate::textmodel::parse_tagged;

    pub(crate) fn sample_store() -> MemoryStore {
        let mut s = MemoryStore::new("abc");
        let context = Context {
            item_lemma: "progressively".into(),
            head: Some("heat".into()),
            additional: vec![ContextWord { lemma: "probe".into(), pos: Pos::Noun }],
        };
        s.records.push(CorrectionRecord {
            seq: 1,
            doc: "d".into(),
            sentence: 0,
            item: "progressively".into(),
            category: Category::MannerAdverb,
            severity: Severity::new(3).unwrap(),
            original: parse_tagged("<fuzzy> progressively </fuzzy> heat the probe").unwrap(),
            corrected: Some(parse_tagged("heat the probe <revised> progressively in 5 seconds </revised>").unwrap()),
            writer: "John".into(),
            context: context.clone(),
            case: Case::Quantified,
        });
        s.realizations.push(Realization {
            seq: 2,
            doc: "c".into(),
            sentence: 3,
            text: "in 2 to 4 mns".into(),
            context: Context { item_lemma: String::new(), ..context.clone() },
        });
        s.validations.push(Validation { seq: 3, id: "ctx:progressively:heat:1".into() });
        s.derived.deactivations.contextual.push(ContextualDeactivation {
            id: "ctx:progressively:heat:1".into(),
            context,
            validated: true,
        });
        s
    }

    #[test]
    fn main_file_round_trip() {
        let s = sample_store();
        let text = s.to_text();
        let back = MemoryStore::parse(&text).unwrap();
        assert_eq!(back.records, s.records);
        assert_eq!(back.to_text(), text);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .contains(r#""corrected":"heat the probe <revised> progressively in 5 seconds </revised>""#));
    }

    #[test]
    fn derived_round_trip() {
        let s = sample_store();
        let text = s.derived.to_text();
        assert_eq!(Derived::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn header_checks() {
        assert!(matches!(MemoryStore::parse(""), Err(StoreError::Header(_))));
        let bad = r#"{"kind":"header","format":"other","version":1,"config_hash":""}"#;
        assert!(matches!(MemoryStore::parse(bad), Err(StoreError::Header(_))));
    }

    #[test]
    fn save_load_and_lock() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mem.jsonl");
        let mut s = sample_store();
        s.save(&path, true).unwrap();
        let first = std::fs::read(&path).unwrap();
        let mut loaded = MemoryStore::load(&path, "abc").unwrap();
        assert_eq!(loaded, s);
        loaded.save(&path, true).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);

        let lock = StoreLock::acquire(&path).unwrap();
        assert!(matches!(StoreLock::acquire(&path), Err(StoreError::Locked(_))));
        drop(lock);
        assert!(StoreLock::acquire(&path).is_ok());
    }

    #[test]
    fn validation_flags() {
        let mut s = sample_store();
        s.derived.deactivations.contextual[0].validated = false;
        s.validations.clear();
        assert!(s.validate("ctx:progressively:heat:1").unwrap());
        assert!(!s.validate("ctx:progressively:heat:1").unwrap());
        assert_eq!(s.validations.len(), 1);
        assert!(matches!(s.validate("nope"), Err(StoreError::UnknownDeactivation(_))));
    }

    #[test]
    fn filler_ranking() {
        let mut f = Vec::new();
        for (t, seq) in [("in 30 seconds", 1), ("in 10 seconds", 2), ("in 30 seconds", 3), ("in 30 seconds", 4)] {
            Filler::observe(&mut f, t, seq);
        }
        Filler::observe(&mut f, "in 5 seconds", 5);
        Filler::rank(&mut f);
        let got: Vec<(&str, usize)> = f.iter().map(|x| (x.text.as_str(), x.freq)).collect();
        // tie at freq 1 goes to the more recent observation
        assert_eq!(got, vec![("in 30 seconds", 3), ("in 5 seconds", 1), ("in 10 seconds", 1)]);
    }
}
