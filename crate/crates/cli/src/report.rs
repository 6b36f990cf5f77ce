//! The `report` command's tables.

use std::collections::BTreeMap;

use fuzzmem_core::detector::Alert;
use fuzzmem_core::kv;
use fuzzmem_core::memory::{Case, MemoryStore};
use fuzzmem_core::patterns::render_fillers;
use fuzzmem_core::textmodel::Document;

/// Fillers shown per recommendation.
pub const TOP_FILLERS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Alerts per item over the corpus, or recorded alerts without one.
    pub per_item: BTreeMap<String, usize>,
    pub alerts: usize,
    /// Physical lines of the corpus.
    pub lines: usize,
    pub from_corpus: bool,
    pub cases: [usize; 5],
    body: Vec<String>,
}

/// `1000 * alerts / lines` with one decimal.
pub fn per_thousand(alerts: usize, lines: usize) -> String {
    if lines == 0 {
        return "0.0".into();
    }
    format!("{:.1}", 1000.0 * alerts as f64 / lines as f64)
}

/// Share of `n` in `total` as a percentage with one decimal.
pub fn percent(n: usize, total: usize) -> String {
    if total == 0 {
        return "0.0".into();
    }
    format!("{:.1}", 100.0 * n as f64 / total as f64)
}

fn line(fields: &[(&str, String)]) -> String {
    kv::encode(fields)
}

impl Report {
    pub fn build(store: &MemoryStore, corpus: &[(Document, Vec<Alert>)]) -> Report {
        let from_corpus = !corpus.is_empty();
        let mut per_item: BTreeMap<String, usize> = BTreeMap::new();
        if from_corpus {
            for a in corpus.iter().flat_map(|(_, a)| a) {
                *per_item.entry(a.item.lemma.clone()).or_default() += 1;
            }
        } else {
            for r in &store.records {
                *per_item.entry(r.item.clone()).or_default() += 1;
            }
        }
        let alerts: usize = per_item.values().sum();
        let lines: usize = corpus.iter().map(|(d, _)| d.line_count()).sum();
        let mut cases = [0usize; 5];
        for r in &store.records {
            cases[usize::from(r.case.number()) - 1] += 1;
        }

        let mut body = Vec::new();
        let source = if from_corpus { "corpus" } else { "store" };
        for (item, n) in &per_item {
            body.push(line(&[
                ("section", "item".into()),
                ("source", source.into()),
                ("item", item.clone()),
                ("alerts", n.to_string()),
            ]));
        }
        if from_corpus {
            body.push(line(&[
                ("section", "frequency".into()),
                ("alerts", alerts.to_string()),
                ("lines", lines.to_string()),
                ("per_1000_lines", per_thousand(alerts, lines)),
            ]));
        }
        let total = store.records.len();
        for c in Case::ALL {
            let n = cases[usize::from(c.number()) - 1];
            body.push(line(&[
                ("section", "case".into()),
                ("case", c.to_string()),
                ("count", n.to_string()),
                ("percent", percent(n, total)),
            ]));
        }
        let d = &store.derived;
        for c in &d.deactivations.contextual {
            body.push(line(&[
                ("section", "deactivation".into()),
                ("id", c.id.clone()),
                ("scope", "context".into()),
                ("item", c.context.item_lemma.clone()),
                ("head", c.context.head_str().to_string()),
                ("additional", kv::join_list(&c.context.additional_lemmas())),
                ("validated", c.validated.to_string()),
            ]));
        }
        for g in &d.deactivations.global {
            body.push(line(&[
                ("section", "deactivation".into()),
                ("id", g.id.clone()),
                ("scope", "global".into()),
                ("item", g.item.clone()),
                ("validated", g.validated.to_string()),
            ]));
        }
        for r in &d.recommendations {
            let top = &r.fillers[..r.fillers.len().min(TOP_FILLERS)];
            body.push(line(&[
                ("section", "recommendation".into()),
                ("item", r.item.clone()),
                ("class", r.class.clone()),
                ("pattern", r.pattern.clone().unwrap_or_else(|| "-".into())),
                ("fillers", render_fillers(top)),
            ]));
        }
        for p in &d.pattern_support {
            body.push(line(&[
                ("section", "pattern".into()),
                ("pattern", p.pattern.clone()),
                ("supporting", p.supporting.to_string()),
                ("accepted", p.accepted.to_string()),
            ]));
        }
        for m in &d.demotions {
            body.push(line(&[
                ("section", "demotion".into()),
                ("item", m.item.clone()),
                ("from", m.from.to_string()),
                ("to", m.to.to_string()),
                ("records", m.records.to_string()),
                ("uncorrected", m.uncorrected.to_string()),
            ]));
        }
        Report { per_item, alerts, lines, from_corpus, cases, body }
    }

    pub fn lines(&self) -> Vec<String> {
        self.body.clone()
    }
}
