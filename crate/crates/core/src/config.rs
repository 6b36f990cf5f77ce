//! Run configuration in a `key = value` text file.
//!
//! ```text
//! # thresholds
//! deactivation_threshold = 5
//! global_threshold = 15
//! store = memory.jsonl
//! ```

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::detector::DetectParams;
use crate::memory::ClassifyParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown setting {0:?}")]
    UnknownKey(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Uncorrected alerts in one context class before it is deactivated.
    pub deactivation_threshold: usize,
    /// Uncorrected alerts for one item before it is deactivated everywhere.
    pub global_threshold: usize,
    /// Distinct context classes a global deactivation must span.
    pub global_min_classes: usize,
    pub context_match_k: usize,
    pub context_size: usize,
    pub case4_edit_ratio: f64,
    pub lexicon: Option<PathBuf>,
    pub words: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub store: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            deactivation_threshold: 5,
            global_threshold: 15,
            global_min_classes: 3,
            context_match_k: 2,
            context_size: 4,
            case4_edit_ratio: 0.25,
            lexicon: None,
            words: None,
            stopwords: None,
            synonyms: None,
            patterns: None,
            store: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::Invalid { key: key.to_string(), message: format!("not a number: {value:?}") })
}

impl Config {
    /// Parses a config file body on top of the defaults. Relative paths
    /// are resolved against `base` when given.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line: n + 1, message: "expected key = value".into() })?;
            let (k, v) = (k.trim(), v.trim());
            cfg.set(k, v).map_err(|e| ConfigError::Parse { line: n + 1, message: e.to_string() })?;
            if let (Some(base), Some(p)) = (base, cfg.path_mut(k)) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Config::parse(&text, path.parent())
    }

    fn path_mut(&mut self, key: &str) -> Option<&mut PathBuf> {
        match key {
            "lexicon" => self.lexicon.as_mut(),
            "words" => self.words.as_mut(),
            "stopwords" => self.stopwords.as_mut(),
            "synonyms" => self.synonyms.as_mut(),
            "patterns" => self.patterns.as_mut(),
            "store" => self.store.as_mut(),
            _ => None,
        }
    }

    /// Sets one value by key, as in the file format.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "deactivation_threshold" => self.deactivation_threshold = parse_num(key, value)?,
            "global_threshold" => self.global_threshold = parse_num(key, value)?,
            "global_min_classes" => self.global_min_classes = parse_num(key, value)?,
            "context_match_k" => self.context_match_k = parse_num(key, value)?,
            "context_size" => self.context_size = parse_num(key, value)?,
            "case4_edit_ratio" => self.case4_edit_ratio = parse_num(key, value)?,
            "lexicon" => self.lexicon = Some(value.into()),
            "words" => self.words = Some(value.into()),
            "stopwords" => self.stopwords = Some(value.into()),
            "synonyms" => self.synonyms = Some(value.into()),
            "patterns" => self.patterns = Some(value.into()),
            "store" => self.store = Some(value.into()),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let at_least_one = [
            ("deactivation_threshold", self.deactivation_threshold),
            ("global_threshold", self.global_threshold),
            ("global_min_classes", self.global_min_classes),
            ("context_match_k", self.context_match_k),
            ("context_size", self.context_size),
        ];
        for (key, v) in at_least_one {
            if v < 1 {
                return Err(ConfigError::Invalid { key: key.into(), message: "must be at least 1".into() });
            }
        }
        if !(0.0..=1.0).contains(&self.case4_edit_ratio) {
            return Err(ConfigError::Invalid { key: "case4_edit_ratio".into(), message: "must lie in [0, 1]".into() });
        }
        Ok(())
    }

    /// Settings that change classification or induction, in file syntax.
    pub fn render_params(&self) -> String {
        format!(
            "deactivation_threshold = {}\nglobal_threshold = {}\nglobal_min_classes = {}\ncontext_match_k = {}\ncontext_size = {}\ncase4_edit_ratio = {}\n",
            self.deactivation_threshold,
            self.global_threshold,
            self.global_min_classes,
            self.context_match_k,
            self.context_size,
            self.case4_edit_ratio
        )
    }

    /// SHA-256 of [`Config::render_params`], recorded in the store header.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.render_params().as_bytes()))
    }

    pub fn detect_params(&self) -> DetectParams {
        DetectParams { context_size: self.context_size, match_k: self.context_match_k }
    }

    pub fn classify_params(&self) -> ClassifyParams {
        ClassifyParams { case4_edit_ratio: self.case4_edit_ratio }
    }
}
