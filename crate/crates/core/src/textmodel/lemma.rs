//! Light suffix-stripping lemmatizer.
//!
//! Rules are applied in order (`-ies`, `-es`, `-s`, `-ing`, `-ed`) and the
//! whole cascade is iterated to a fixpoint, so the result is always stable
//! under a second application. Each rule strictly shortens the word, which
//! bounds the iteration.

/// Irregular forms and words the rules would damage.
const OVERRIDES: &[(&str, &str)] = &[
    ("anything", "anything"),
    ("being", "be"),
    ("ceiling", "ceiling"),
    ("children", "child"),
    ("data", "data"),
    ("does", "do"),
    ("during", "during"),
    ("evening", "evening"),
    ("everything", "everything"),
    ("has", "have"),
    ("is", "be"),
    ("morning", "morning"),
    ("nothing", "nothing"),
    ("something", "something"),
    ("stored", "store"),
    ("storing", "store"),
    ("string", "string"),
    ("thing", "thing"),
    ("used", "use"),
    ("using", "use"),
    ("was", "be"),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn is_consonant(c: u8) -> bool {
    c.is_ascii_alphabetic() && !is_vowel(c)
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|c| is_vowel(c) || c == b'y')
}

/// Lowercase and strip inflectional suffixes.
pub fn lemmatize(surface: &str) -> String {
    let mut word = surface.to_lowercase();
    loop {
        let next = strip_once(&word);
        if next == word {
            return word;
        }
        word = next;
    }
}

fn strip_once(w: &str) -> String {
    if let Some((_, lemma)) = OVERRIDES.iter().find(|(form, _)| *form == w) {
        return (*lemma).to_string();
    }
    // Only plain ASCII words are touched; numerals, alphanumerics such as
    // "v1" and non-Latin words pass through unchanged.
    if !w.bytes().all(|c| c.is_ascii_lowercase() || c == b'-' || c == b'\'')
        || !w.bytes().any(|c| c.is_ascii_lowercase())
    {
        return w.to_string();
    }
    let len = w.len();
    if let Some(stem) = w.strip_suffix("'s") {
        if !stem.is_empty() {
            return stem.to_string();
        }
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if len > 4 {
            return format!("{stem}y");
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if ["ss", "x", "zz", "ch", "sh"].iter().any(|e| stem.ends_with(e)) {
            return stem.to_string();
        }
    }
    if let Some(stem) = w.strip_suffix('s') {
        if len > 3 && !["ss", "us", "is"].iter().any(|e| w.ends_with(e)) {
            return stem.to_string();
        }
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if len > 5 && has_vowel(stem) {
            return restore(stem);
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if len > 5 && !w.ends_with("eed") && has_vowel(stem) {
            return restore(stem);
        }
    }
    w.to_string()
}

/// Undo consonant doubling or put back a silent `e` after `-ing`/`-ed`
/// removal.
fn restore(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && is_consonant(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if needs_silent_e(b) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn needs_silent_e(b: &[u8]) -> bool {
    let n = b.len();
    let at = |back: usize| -> Option<u8> { n.checked_sub(back).map(|i| b[i]) };
    let last = match at(1) {
        Some(c) => c,
        None => return false,
    };
    let prev = at(2);
    let prev2 = at(3);
    let cons = |c: Option<u8>| c.is_some_and(is_consonant);
    let vowel = |c: Option<u8>| c.is_some_and(is_vowel);
    match last {
        // reduc-e, mov-e, minimiz-e
        b'c' | b'v' | b'z' => true,
        // rotat-e, operat-e (but heat, treat)
        b't' if prev == Some(b'a') => cons(prev2),
        // comput-e
        b't' if prev == Some(b'u') => cons(prev2),
        // delet-e, complet-e
        b't' if prev == Some(b'e') => prev2 == Some(b'l'),
        // enabl-e, coupl-e, handl-e
        b'l' => matches!(prev, Some(b'b' | b'p' | b'd' | b'g' | b't' | b'k' | b'f' | b'c')),
        // judg-e, charg-e, chang-e
        b'g' if matches!(prev, Some(b'd' | b'r')) => true,
        b'g' if prev == Some(b'n') => prev2 == Some(b'a') && n > 4 && cons(at(4)),
        // requir-e, ensur-e
        b'r' if matches!(prev, Some(b'i' | b'u')) => cons(prev2),
        // compar-e, prepar-e
        b'r' if prev == Some(b'a') => cons(prev2),
        // clos-e, increas-e, caus-e (but focus)
        b's' if matches!(prev, Some(b'n' | b'p' | b'r')) => true,
        b's' if prev == Some(b'u') => !cons(prev2),
        b's' => vowel(prev),
        // combin-e, determin-e
        b'n' if prev == Some(b'i') => cons(prev2),
        // provid-e, decid-e
        b'd' if prev == Some(b'i') => cons(prev2),
        // mak-e, smok-e
        b'k' if matches!(prev, Some(b'a' | b'o')) => cons(prev2),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plural_s_is_stripped() {
        assert_eq!(lemmatize("alarms"), "alarm");
        assert_eq!(lemmatize("Knots"), "knot");
        assert_eq!(lemmatize("values"), "value");
    }

    #[test]
    fn bare_stem_is_unchanged() {
        assert_eq!(lemmatize("heat"), "heat");
        assert_eq!(lemmatize("press"), "press");
        assert_eq!(lemmatize("focus"), "focus");
    }

    #[test]
    fn ing_with_silent_e() {
        assert_eq!(lemmatize("closing"), "close");
        assert_eq!(lemmatize("reducing"), "reduce");
        assert_eq!(lemmatize("operating"), "operate");
        assert_eq!(lemmatize("heating"), "heat");
        assert_eq!(lemmatize("opening"), "open");
    }

    #[test]
    fn doubled_consonant_is_undone() {
        assert_eq!(lemmatize("plugging"), "plug");
        assert_eq!(lemmatize("embedded"), "embed");
        assert_eq!(lemmatize("installing"), "install");
    }

    #[test]
    fn es_after_sibilants() {
        assert_eq!(lemmatize("boxes"), "box");
        assert_eq!(lemmatize("reaches"), "reach");
        assert_eq!(lemmatize("passes"), "pass");
        // single z or s falls through to the plain -s rule
        assert_eq!(lemmatize("minimizes"), "minimize");
        assert_eq!(lemmatize("uses"), "use");
        assert_eq!(lemmatize("batteries"), "battery");
    }

    #[test]
    fn ed_rules() {
        assert_eq!(lemmatize("reduced"), "reduce");
        assert_eq!(lemmatize("heated"), "heat");
        assert_eq!(lemmatize("succeeded"), "succeed");
        assert_eq!(lemmatize("closed"), "close");
    }

    #[test]
    fn short_words_and_numbers_untouched() {
        assert_eq!(lemmatize("kts"), "kts");
        assert_eq!(lemmatize("this"), "this");
        assert_eq!(lemmatize("V1"), "v1");
        assert_eq!(lemmatize("65%"), "65%");
        assert_eq!(lemmatize("take-off"), "take-off");
        assert_eq!(lemmatize("during"), "during");
    }

    proptest! {
        #[test]
        fn idempotent(w in "[a-zA-Z]{1,14}(ing|ed|es|s|ies)?") {
            let once = lemmatize(&w);
            prop_assert_eq!(lemmatize(&once), once);
        }
    }
}
