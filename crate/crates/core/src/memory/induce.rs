//! Rebuilding the derived tables from the records and realizations.

use std::collections::BTreeMap;

use super::classify::Case;
use super::store::{
    CorrectionRecord, Demotion, Derived, Filler, MemoryStore, PatternSupport, RealizationClass, Recommendation,
};
use crate::config::Config;
use crate::detector::{context_match, context_match_unanchored, Context, ContextualDeactivation, GlobalDeactivation};
use crate::lexicon::{Lexicon, Severity};
use crate::patterns::{apply, match_at, strip_words, trim_filler, Catalog, CorrectionPattern};
use crate::textmodel::{detokenize, Sentence};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InduceSummary {
    /// Derived lines added or removed.
    pub changes: usize,
    pub contextual: usize,
    pub global: usize,
    pub recommendations: usize,
    pub realization_classes: usize,
    pub demotions: usize,
}

/// `item:head:n`, with spaces as `_` and `-` for a missing head.
pub fn class_id(item: &str, head: Option<&str>, n: usize) -> String {
    format!("{}:{}:{n}", item.replace(' ', "_"), head.unwrap_or("-").replace(' ', "_"))
}

struct Class<'a> {
    id: String,
    context: Context,
    records: Vec<&'a CorrectionRecord>,
}

/// Groups records of one item: a record joins the first class whose
/// representative (first context seen) matches its context.
fn classes_of<'a>(records: &[&'a CorrectionRecord], k: usize, lex: &Lexicon) -> Vec<Class<'a>> {
    let mut classes: Vec<Class> = Vec::new();
    for &r in records {
        match classes.iter_mut().find(|c| context_match(&c.context, &r.context, k, lex.synonyms())) {
            Some(c) => c.records.push(r),
            None => {
                let n = 1 + classes.iter().filter(|c| c.context.head == r.context.head).count();
                classes.push(Class {
                    id: class_id(&r.item, r.context.head.as_deref(), n),
                    context: r.context.clone(),
                    records: vec![r],
                });
            }
        }
    }
    classes
}

/// Filler for `p` taken from a record's revised region, and whether the
/// pattern's rewrite with that filler is exactly the correction.
fn pattern_evidence(p: &CorrectionPattern, r: &CorrectionRecord, lex: &Lexicon) -> Option<(Option<String>, bool)> {
    let otoks = r.original.tokens();
    let s = Sentence::from_surfaces(&otoks);
    let b = match_at(p, &s, r.item_span(), lex)?;
    let corrected = r.corrected.as_ref()?;
    let ctoks = corrected.tokens();
    let filler = r.revised_span().and_then(|rev| {
        let text = trim_filler(&ctoks[rev], &strip_words(p, &b, &otoks));
        (!text.is_empty()).then_some(text)
    });
    let mut assign = BTreeMap::new();
    if let (Some(slot), Some(f)) = (p.slots().first(), &filler) {
        assign.insert(slot.name.clone(), f.clone());
    }
    let accepted = match apply(p, &b, &s, &assign) {
        Ok(rw) if p.slots().is_empty() || filler.is_some() => {
            rw.tokens.iter().map(|t| t.to_lowercase()).eq(ctoks.iter().map(|t| t.to_lowercase()))
        }
        _ => false,
    };
    Some((if p.slots().is_empty() { None } else { filler }, accepted))
}

/// Recomputes deactivations, recommendations, realization classes,
/// demotions and pattern counters, then re-applies validations. The
/// result depends only on the records, realizations and validations, so
/// a second run changes nothing.
///
/// * contextual deactivation: a class with at least
///   `deactivation_threshold` uncorrected records and no corrected one;
/// * global deactivation: at least `global_threshold` uncorrected records
///   of the item over at least `global_min_classes` classes, and no
///   correction of the item anywhere;
/// * recommendations: per pattern and class, fillers from case 2 and 4
///   records; per class, raw corrected sentences from cases 2 to 4;
/// * demotion: at least `deactivation_threshold` records of which half or
///   more were left uncorrected.
pub fn induce(store: &mut MemoryStore, config: &Config, lex: &Lexicon, catalog: &Catalog) -> InduceSummary {
    let k = config.context_match_k;
    let mut d = Derived::default();
    let mut support: BTreeMap<String, PatternSupport> = catalog
        .patterns
        .iter()
        .map(|p| (p.id.clone(), PatternSupport { pattern: p.id.clone(), ..Default::default() }))
        .collect();

    let mut by_item: BTreeMap<&str, Vec<&CorrectionRecord>> = BTreeMap::new();
    let mut sorted: Vec<&CorrectionRecord> = store.records.iter().collect();
    sorted.sort_by_key(|r| r.seq);
    for r in sorted {
        by_item.entry(r.item.as_str()).or_default().push(r);
    }

    for (item, records) in &by_item {
        let classes = classes_of(records, k, lex);
        let uncorrected = records.iter().filter(|r| r.case == Case::NotCorrected).count();
        let corrected = records.len() - uncorrected;

        for c in &classes {
            let unc = c.records.iter().filter(|r| r.case == Case::NotCorrected).count();
            if unc >= config.deactivation_threshold && unc == c.records.len() {
                d.deactivations.contextual.push(ContextualDeactivation {
                    id: format!("ctx:{}", c.id),
                    context: c.context.clone(),
                    validated: false,
                });
            }
            let mut per_pattern: BTreeMap<&str, Vec<Filler>> = BTreeMap::new();
            let mut raw: Vec<Filler> = Vec::new();
            for r in &c.records {
                if !matches!(r.case, Case::Quantified | Case::Erased | Case::Replaced) {
                    continue;
                }
                if let Some(cf) = &r.corrected {
                    Filler::observe(&mut raw, &detokenize(&cf.tokens()), r.seq);
                }
                for p in &catalog.patterns {
                    let Some((filler, accepted)) = pattern_evidence(p, r, lex) else {
                        continue;
                    };
                    let s = support.get_mut(&p.id).expect("every catalog pattern has a counter");
                    s.supporting += 1;
                    s.accepted += usize::from(accepted);
                    if let (Some(f), Case::Quantified | Case::Replaced) = (filler, r.case) {
                        Filler::observe(per_pattern.entry(p.id.as_str()).or_default(), &f, r.seq);
                    }
                }
            }
            for (pid, mut fillers) in per_pattern {
                Filler::rank(&mut fillers);
                d.recommendations.push(Recommendation {
                    pattern: Some(pid.to_string()),
                    item: item.to_string(),
                    class: c.id.clone(),
                    context: c.context.clone(),
                    fillers,
                });
            }
            if !raw.is_empty() {
                Filler::rank(&mut raw);
                d.recommendations.push(Recommendation {
                    pattern: None,
                    item: item.to_string(),
                    class: c.id.clone(),
                    context: c.context.clone(),
                    fillers: raw,
                });
            }
        }

        let spanned = classes.iter().filter(|c| c.records.iter().any(|r| r.case == Case::NotCorrected)).count();
        if uncorrected >= config.global_threshold && spanned >= config.global_min_classes && corrected == 0 {
            d.deactivations.global.push(GlobalDeactivation {
                id: format!("glob:{}", item.replace(' ', "_")),
                item: item.to_string(),
                validated: false,
            });
        }

        let severity = records[0].severity.get();
        if records.len() >= config.deactivation_threshold && uncorrected * 2 >= records.len() && severity > 1 {
            d.demotions.push(Demotion {
                item: item.to_string(),
                from: records[0].severity,
                to: Severity::new(severity - 1).expect("severity above 1"),
                records: records.len(),
                uncorrected,
            });
        }
    }
    d.recommendations.sort_by(|a, b| (&a.pattern, &a.item, &a.class).cmp(&(&b.pattern, &b.item, &b.class)));

    let mut reals: Vec<_> = store.realizations.iter().collect();
    reals.sort_by_key(|r| r.seq);
    for r in reals {
        let hit = d
            .realization_classes
            .iter_mut()
            .find(|c| context_match_unanchored(&c.context, &r.context, k, lex.synonyms()));
        match hit {
            Some(c) => Filler::observe(&mut c.fillers, &r.text, r.seq),
            None => {
                let n = 1 + d.realization_classes.iter().filter(|c| c.context.head == r.context.head).count();
                let mut fillers = Vec::new();
                Filler::observe(&mut fillers, &r.text, r.seq);
                d.realization_classes.push(RealizationClass {
                    id: format!("real:{}:{n}", r.context.head.as_deref().unwrap_or("-").replace(' ', "_")),
                    context: r.context.clone(),
                    fillers,
                });
            }
        }
    }
    d.realization_classes.iter_mut().for_each(|c| Filler::rank(&mut c.fillers));
    d.pattern_support = support.into_values().collect();

    let before = std::mem::replace(&mut store.derived, d);
    store.apply_validations();
    let d = &store.derived;
    InduceSummary {
        changes: d.changes_from(&before),
        contextual: d.deactivations.contextual.len(),
        global: d.deactivations.global.len(),
        recommendations: d.recommendations.len(),
        realization_classes: d.realization_classes.len(),
        demotions: d.demotions.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{learn, mine_correct};
    use crate::textmodel::Document;

    fn learn_pair(store: &mut MemoryStore, orig: &str, corr: &str) {
        let lex = Lexicon::builtin();
        learn(&Document::new("d", orig), &Document::new("d", corr), "w", &lex, store, &Config::default()).unwrap();
    }

    fn easy(n: usize) -> MemoryStore {
        let mut store = MemoryStore::new("");
        let text = "a location that allows easy viewing during inspection";
        for _ in 0..n {
            learn_pair(&mut store, text, text);
        }
        store
    }

    fn run(store: &mut MemoryStore) -> InduceSummary {
        induce(store, &Config::default(), &Lexicon::builtin(), &Catalog::builtin())
    }

    #[test]
    fn threshold() {
        let mut four = easy(4);
        run(&mut four);
        assert!(four.derived.deactivations.contextual.is_empty());
        let mut five = easy(5);
        run(&mut five);
        let d = &five.derived.deactivations.contextual;
        assert_eq!(d.len(), 1);
        assert!(!d[0].validated);
        assert_eq!(d[0].context.item_lemma, "easy");
    }

    #[test]
    fn idempotent() {
        let mut s = easy(5);
        learn_pair(&mut s, "progressively heat the probe", "heat the probe progressively in 5 seconds");
        assert!(run(&mut s).changes > 0);
        let first = s.derived.clone();
        assert_eq!(run(&mut s).changes, 0);
        assert_eq!(s.derived, first);
    }

    #[test]
    fn correction_blocks_deactivation() {
        let mut s = easy(5);
        run(&mut s);
        assert_eq!(s.derived.deactivations.contextual.len(), 1);
        learn_pair(
            &mut s,
            "a location that allows easy viewing during inspection",
            "a location that allows viewing during inspection",
        );
        run(&mut s);
        assert!(s.derived.deactivations.contextual.is_empty());
    }

    #[test]
    fn validation_survives_induce() {
        let mut s = easy(5);
        run(&mut s);
        let id = s.derived.deactivations.contextual[0].id.clone();
        assert!(s.validate(&id).unwrap());
        run(&mut s);
        assert!(s.derived.deactivations.contextual[0].validated);
    }

    #[test]
    fn fillers_ranked_by_frequency() {
        let mut s = MemoryStore::new("");
        for f in ["in 30 seconds", "in 10 seconds", "in 30 seconds", "in 30 seconds"] {
            learn_pair(&mut s, "progressively close the pipe", &format!("progressively close the pipe {f}"));
        }
        run(&mut s);
        let rec = s.derived.recommendations.iter().find(|r| r.pattern.as_deref() == Some("P-prog")).unwrap();
        let got: Vec<(&str, usize)> = rec.fillers.iter().map(|f| (f.text.as_str(), f.freq)).collect();
        assert_eq!(got, [("in 30 seconds", 3), ("in 10 seconds", 1)]);
        let sup = s.derived.pattern_support.iter().find(|p| p.pattern == "P-prog").unwrap();
        assert_eq!((sup.supporting, sup.accepted), (4, 4));
    }

    #[test]
    fn global_deactivation() {
        let lex = Lexicon::builtin();
        let mut s = MemoryStore::new("");
        let texts = ["check the pump regularly", "regularly clean the filter", "inspect the hose regularly"];
        for t in texts.iter().cycle().take(15) {
            learn(&Document::new("d", *t), &Document::new("d", *t), "w", &lex, &mut s, &Config::default()).unwrap();
        }
        run(&mut s);
        assert_eq!(s.derived.deactivations.global.len(), 1);
        assert_eq!(s.derived.deactivations.global[0].id, "glob:regularly");
        assert_eq!(s.derived.deactivations.contextual.len(), 3);
        assert_eq!(s.derived.demotions[0].to.get(), 1);
    }

    #[test]
    fn realization_classes() {
        let lex = Lexicon::builtin();
        let mut s = MemoryStore::new("");
        let docs = [Document::new("c", "heat the probe in 2 to 4 mns.\nThen heat the probe in 2 to 4 mns.")];
        mine_correct(&docs, &lex, &mut s, &Config::default());
        run(&mut s);
        assert_eq!(s.derived.realization_classes.len(), 1);
        assert_eq!(s.derived.realization_classes[0].fillers[0].freq, 2);
    }

    #[test]
    fn ids() {
        assert_eq!(class_id("a few", Some("fire alarm"), 2), "a_few:fire_alarm:2");
        assert_eq!(class_id("near", None, 1), "near:-:1");
    }
}
