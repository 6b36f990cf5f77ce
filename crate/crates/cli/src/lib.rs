//! The `fuzzmem` command line: argument parsing and one function per
//! subcommand. Every command writes key=value lines to stdout and ends with
//! a `summary=<command>` line.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};

use fuzzmem_core::config::Config;
use fuzzmem_core::detector::{alert_line, annotate, detect_with, Alert};
use fuzzmem_core::kv;
use fuzzmem_core::lexicon::Lexicon;
use fuzzmem_core::memory::{induce, learn, mine_correct, write_atomic, MemoryStore, StoreLock};
use fuzzmem_core::patterns::{load_patterns, suggest, suggestion_line, Catalog};
use fuzzmem_core::textmodel::Document;

pub mod report;

pub const DEFAULT_STORE: &str = "fuzzmem.jsonl";

#[derive(Parser, Debug)]
#[command(name = "fuzzmem", version, about = "Detect fuzzy lexical items and learn from how writers correct them")]
pub struct Cli {
    /// Settings file (key = value lines)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Correction memory file
    #[arg(long, global = true, value_name = "FILE")]
    pub store: Option<PathBuf>,
    /// Fuzzy item lexicon (TSV)
    #[arg(long, global = true, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Override one setting, e.g. `--set deactivation_threshold=3`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Omit the write time from the store header so equal runs give equal bytes
    #[arg(long, global = true)]
    pub stable_output: bool,
    /// Lowest severity that makes `detect` exit with status 1
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub min_severity: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report fuzzy items in documents
    Detect {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Write alert lines to this file instead of stdout
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Write each document with inline <fuzzy> marks into this directory
        #[arg(long, value_name = "DIR")]
        annotate_dir: Option<PathBuf>,
    },
    /// Record how a writer corrected the alerts of a document
    Learn {
        original: PathBuf,
        corrected: PathBuf,
        #[arg(long)]
        writer: String,
    },
    /// Index quantity expressions of alert-free sentences
    MineCorrect {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Rebuild deactivations and recommendations from the memory
    Induce,
    /// Propose corrections for the alerts of documents
    Suggest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Confirm an induced deactivation
    Validate { id: String },
    /// Alert frequencies, case distribution, deactivations and recommendations
    Report {
        /// Documents to count alerts and lines over
        #[arg(long, num_args = 1.., value_name = "FILE")]
        corpus: Vec<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Settings after applying the config file, `--set` and path flags.
pub struct Env {
    pub config: Config,
    pub lexicon: Lexicon,
    pub store_path: PathBuf,
    pub stable: bool,
}

impl Env {
    pub fn from_cli(cli: &Cli) -> Result<Env> {
        let mut config = match &cli.config {
            Some(p) => Config::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => Config::default(),
        };
        for kv in &cli.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            config.set(k.trim(), v.trim())?;
        }
        if let Some(p) = &cli.store {
            config.store = Some(p.clone());
        }
        if let Some(p) = &cli.lexicon {
            config.lexicon = Some(p.clone());
        }
        config.validate()?;
        let lexicon = Lexicon::from_paths(
            config.lexicon.as_deref(),
            config.words.as_deref(),
            config.stopwords.as_deref(),
            config.synonyms.as_deref(),
        )
        .context("loading lexicon")?;
        let store_path = config.store.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_STORE));
        Ok(Env { config, lexicon, store_path, stable: cli.stable_output })
    }

    pub fn load_store(&self) -> Result<MemoryStore> {
        MemoryStore::load(&self.store_path, &self.config.hash())
            .with_context(|| format!("loading store {}", self.store_path.display()))
    }

    fn save_store(&self, store: &mut MemoryStore, err: &mut dyn Write) -> Result<()> {
        let hash = self.config.hash();
        if store.header.config_hash != hash && !store.header.config_hash.is_empty() {
            writeln!(err, "warning: store was written with other settings; header updated")?;
        }
        store.header.config_hash = hash;
        store
            .save(&self.store_path, self.stable)
            .with_context(|| format!("writing store {}", self.store_path.display()))
    }

    fn catalog(&self, err: &mut dyn Write) -> Result<Catalog> {
        let c = load_patterns(self.config.patterns.as_deref(), &self.lexicon)?;
        for w in &c.warnings {
            writeln!(err, "warning: {w}")?;
        }
        Ok(c)
    }
}

pub fn read_doc(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Document::new(path.display().to_string(), text))
}

fn summary(out: &mut dyn Write, command: &str, fields: &[(&str, String)]) -> Result<()> {
    let mut all = vec![("summary", command.to_string())];
    all.extend(fields.iter().map(|(k, v)| (*k, v.clone())));
    writeln!(out, "{}", kv::encode(&all))?;
    Ok(())
}

/// Sends `lines` to `path` atomically, or to `out`.
fn emit(lines: &[String], path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let body: String = lines.iter().map(|l| format!("{l}\n")).collect();
    match path {
        Some(p) => write_atomic(p, body.as_bytes())?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Runs one command; returns the process exit status (0 or 1). Errors
/// map to status 2 in `main`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let env = Env::from_cli(cli)?;
    match &cli.command {
        Command::Detect { files, report, annotate_dir } => {
            cmd_detect(&env, files, cli.min_severity, report.as_deref(), annotate_dir.as_deref(), out)
        }
        Command::Learn { original, corrected, writer } => cmd_learn(&env, original, corrected, writer, out, err),
        Command::MineCorrect { files } => cmd_mine(&env, files, out, err),
        Command::Induce => cmd_induce(&env, out, err),
        Command::Suggest { files, out: path } => cmd_suggest(&env, files, path.as_deref(), out, err),
        Command::Validate { id } => cmd_validate(&env, id, out, err),
        Command::Report { corpus, out: path } => cmd_report(&env, corpus, path.as_deref(), out),
    }
}

/// Alerts of each document under the store's deactivations. Never writes
/// the store.
pub fn detect_docs(env: &Env, files: &[PathBuf]) -> Result<Vec<(Document, Vec<Alert>)>> {
    let store = env.load_store()?;
    let params = env.config.detect_params();
    files
        .iter()
        .map(|f| {
            let doc = read_doc(f)?;
            let alerts = detect_with(&doc, &env.lexicon, &store.derived.deactivations, &params);
            Ok((doc, alerts))
        })
        .collect()
}

fn cmd_detect(
    env: &Env,
    files: &[PathBuf],
    min_severity: u8,
    report: Option<&Path>,
    annotate_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8> {
    let docs = detect_docs(env, files)?;
    let lines: Vec<String> = docs.iter().flat_map(|(_, a)| a.iter().map(alert_line)).collect();
    emit(&lines, report, out)?;
    if let Some(dir) = annotate_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for ((doc, alerts), path) in docs.iter().zip(files) {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "doc".into());
            write_atomic(&dir.join(format!("{name}.annotated")), annotate(&doc.text, alerts).as_bytes())?;
        }
    }
    let total: usize = docs.iter().map(|(_, a)| a.len()).sum();
    let blocking = docs.iter().flat_map(|(_, a)| a).filter(|a| a.severity.get() >= min_severity).count();
    summary(
        out,
        "detect",
        &[("files", docs.len().to_string()), ("alerts", total.to_string()), ("at_or_above_min", blocking.to_string())],
    )?;
    Ok(u8::from(blocking > 0))
}

fn cmd_learn(
    env: &Env,
    original: &Path,
    corrected: &Path,
    writer: &str,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let _lock = StoreLock::acquire(&env.store_path)?;
    let mut store = env.load_store()?;
    let (o, c) = (read_doc(original)?, read_doc(corrected)?);
    let s = learn(&o, &c, writer, &env.lexicon, &mut store, &env.config)?;
    env.save_store(&mut store, err)?;
    let mut fields = vec![("records", s.records.to_string())];
    let names = ["case1", "case2", "case3", "case4", "case5"];
    fields.extend(names.iter().zip(s.cases).map(|(n, c)| (*n, c.to_string())));
    summary(out, "learn", &fields)?;
    Ok(0)
}

fn cmd_mine(env: &Env, files: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let _lock = StoreLock::acquire(&env.store_path)?;
    let mut store = env.load_store()?;
    let docs = files.iter().map(|f| read_doc(f)).collect::<Result<Vec<_>>>()?;
    let added = mine_correct(&docs, &env.lexicon, &mut store, &env.config);
    env.save_store(&mut store, err)?;
    summary(out, "mine-correct", &[("documents", docs.len().to_string()), ("realizations", added.to_string())])?;
    Ok(0)
}

fn cmd_induce(env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let _lock = StoreLock::acquire(&env.store_path)?;
    let mut store = env.load_store()?;
    let catalog = env.catalog(err)?;
    let s = induce(&mut store, &env.config, &env.lexicon, &catalog);
    env.save_store(&mut store, err)?;
    summary(
        out,
        "induce",
        &[
            ("changes", s.changes.to_string()),
            ("deactivations", s.contextual.to_string()),
            ("global_deactivations", s.global.to_string()),
            ("recommendations", s.recommendations.to_string()),
            ("realization_classes", s.realization_classes.to_string()),
            ("demotions", s.demotions.to_string()),
        ],
    )?;
    Ok(0)
}

fn cmd_suggest(
    env: &Env,
    files: &[PathBuf],
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let store = env.load_store()?;
    let catalog = env.catalog(err)?;
    let docs = detect_docs(env, files)?;
    let mut lines = Vec::new();
    let mut alerts = 0;
    for (doc, found) in &docs {
        for a in found {
            alerts += 1;
            let s = &doc.sentences[a.sentence_index];
            for sug in suggest(a, s, &store, &catalog, &env.lexicon, env.config.context_match_k)? {
                lines.push(suggestion_line(&doc.id, &sug));
            }
        }
    }
    emit(&lines, path, out)?;
    summary(out, "suggest", &[("alerts", alerts.to_string()), ("suggestions", lines.len().to_string())])?;
    Ok(0)
}

fn cmd_validate(env: &Env, id: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let _lock = StoreLock::acquire(&env.store_path)?;
    let mut store = env.load_store()?;
    let changed = store.validate(id)?;
    env.save_store(&mut store, err)?;
    summary(out, "validate", &[("id", id.to_string()), ("changed", changed.to_string())])?;
    Ok(0)
}

fn cmd_report(env: &Env, corpus: &[PathBuf], path: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    if !env.store_path.exists() && corpus.is_empty() {
        bail!("nothing to report: no store at {} and no --corpus", env.store_path.display());
    }
    let store = env.load_store()?;
    let docs = detect_docs(env, corpus)?;
    let r = report::Report::build(&store, &docs);
    emit(&r.lines(), path, out)?;
    summary(
        out,
        "report",
        &[
            ("records", store.records.len().to_string()),
            ("alerts", r.alerts.to_string()),
            ("lines", r.lines.to_string()),
        ],
    )?;
    Ok(0)
}
