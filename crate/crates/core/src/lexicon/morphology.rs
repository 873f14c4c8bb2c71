//! Regular English inflection plus the fixed irregular tables.

/// Irregular verbs: base, past, past participle, third singular, progressive.
pub(crate) const IRREGULAR_VERBS: &[[&str; 5]] = &[
    ["be", "was", "been", "is", "being"],
    ["do", "did", "done", "does", "doing"],
    ["have", "had", "had", "has", "having"],
    ["go", "went", "gone", "goes", "going"],
    ["take", "took", "taken", "takes", "taking"],
    ["write", "wrote", "written", "writes", "writing"],
    ["eat", "ate", "eaten", "eats", "eating"],
    ["build", "built", "built", "builds", "building"],
    ["draw", "drew", "drawn", "draws", "drawing"],
    ["read", "read", "read", "reads", "reading"],
    ["catch", "caught", "caught", "catches", "catching"],
    ["throw", "threw", "thrown", "throws", "throwing"],
    ["hold", "held", "held", "holds", "holding"],
    ["bring", "brought", "brought", "brings", "bringing"],
    ["buy", "bought", "bought", "buys", "buying"],
    ["sell", "sold", "sold", "sells", "selling"],
    ["make", "made", "made", "makes", "making"],
    ["break", "broke", "broken", "breaks", "breaking"],
    ["hide", "hid", "hidden", "hides", "hiding"],
    ["keep", "kept", "kept", "keeps", "keeping"],
    ["leave", "left", "left", "leaves", "leaving"],
    ["lose", "lost", "lost", "loses", "losing"],
    ["send", "sent", "sent", "sends", "sending"],
    ["teach", "taught", "taught", "teaches", "teaching"],
    ["feed", "fed", "fed", "feeds", "feeding"],
    ["cut", "cut", "cut", "cuts", "cutting"],
    ["drive", "drove", "driven", "drives", "driving"],
    ["ride", "rode", "ridden", "rides", "riding"],
    ["steal", "stole", "stolen", "steals", "stealing"],
    ["wear", "wore", "worn", "wears", "wearing"],
    ["win", "won", "won", "wins", "winning"],
    ["shake", "shook", "shaken", "shakes", "shaking"],
    ["bite", "bit", "bitten", "bites", "biting"],
    ["choose", "chose", "chosen", "chooses", "choosing"],
    ["forget", "forgot", "forgotten", "forgets", "forgetting"],
    ["hit", "hit", "hit", "hits", "hitting"],
    ["know", "knew", "known", "knows", "knowing"],
    ["see", "saw", "seen", "sees", "seeing"],
    ["hear", "heard", "heard", "hears", "hearing"],
    ["meet", "met", "met", "meets", "meeting"],
    ["sing", "sang", "sung", "sings", "singing"],
    ["fly", "flew", "flown", "flies", "flying"],
    ["swim", "swam", "swum", "swims", "swimming"],
    ["sleep", "slept", "slept", "sleeps", "sleeping"],
    ["fall", "fell", "fallen", "falls", "falling"],
    ["rise", "rose", "risen", "rises", "rising"],
    ["shine", "shone", "shone", "shines", "shining"],
    ["grow", "grew", "grown", "grows", "growing"],
    ["sit", "sat", "sat", "sits", "sitting"],
    ["stand", "stood", "stood", "stands", "standing"],
    ["run", "ran", "run", "runs", "running"],
    ["find", "found", "found", "finds", "finding"],
    ["hang", "hung", "hung", "hangs", "hanging"],
    ["tell", "told", "told", "tells", "telling"],
    ["give", "gave", "given", "gives", "giving"],
    ["get", "got", "gotten", "gets", "getting"],
    ["think", "thought", "thought", "thinks", "thinking"],
    ["come", "came", "come", "comes", "coming"],
    ["speak", "spoke", "spoken", "speaks", "speaking"],
    ["fight", "fought", "fought", "fights", "fighting"],
    ["dig", "dug", "dug", "digs", "digging"],
    ["light", "lit", "lit", "lights", "lighting"],
    ["put", "put", "put", "puts", "putting"],
    ["set", "set", "set", "sets", "setting"],
    ["spend", "spent", "spent", "spends", "spending"],
];

/// Short verbs whose final consonant doubles before -ed and -ing.
const DOUBLING: &[&str] = &[
    "drop", "hug", "plan", "grab", "stop", "shop", "skip", "clap", "hop", "nod", "rob", "rub",
    "chat", "pat", "beg", "wrap", "stir", "slip", "trip", "drum", "tap", "pet", "jog", "spill",
];

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("child", "children"),
    ("man", "men"),
    ("woman", "women"),
    ("mouse", "mice"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("goose", "geese"),
    ("sheep", "sheep"),
    ("fish", "fish"),
    ("person", "people"),
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn consonant_y(word: &str) -> bool {
    let mut rev = word.chars().rev();
    matches!((rev.next(), rev.next()), (Some('y'), Some(c)) if !is_vowel(c))
}

fn doubles(word: &str) -> bool {
    DOUBLING.contains(&word)
}

fn silent_e(word: &str) -> bool {
    word.ends_with('e') && !word.ends_with("ee") && !word.ends_with("ye") && !word.ends_with("oe")
}

pub(crate) fn third_singular(base: &str) -> String {
    if consonant_y(base) {
        format!("{}ies", &base[..base.len() - 1])
    } else if ["s", "x", "z", "ch", "sh", "o"].iter().any(|s| base.ends_with(s)) {
        format!("{base}es")
    } else {
        format!("{base}s")
    }
}

pub(crate) fn past(base: &str) -> String {
    if base.ends_with('e') {
        format!("{base}d")
    } else if consonant_y(base) {
        format!("{}ied", &base[..base.len() - 1])
    } else if doubles(base) {
        let last = base.chars().last().unwrap_or_default();
        format!("{base}{last}ed")
    } else {
        format!("{base}ed")
    }
}

pub(crate) fn progressive(base: &str) -> String {
    if let Some(stem) = base.strip_suffix("ie") {
        format!("{stem}ying")
    } else if silent_e(base) {
        format!("{}ing", &base[..base.len() - 1])
    } else if doubles(base) {
        let last = base.chars().last().unwrap_or_default();
        format!("{base}{last}ing")
    } else {
        format!("{base}ing")
    }
}

/// All five forms for a single-word base. Irregular table first.
pub(crate) fn verb_forms(base: &str) -> [String; 5] {
    if let Some(row) = IRREGULAR_VERBS.iter().find(|row| row[0] == base) {
        return row.map(str::to_string);
    }
    let past = past(base);
    [base.to_string(), past.clone(), past, third_singular(base), progressive(base)]
}

pub(crate) fn plural(noun: &str) -> String {
    if let Some((_, p)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == noun) {
        return p.to_string();
    }
    if consonant_y(noun) {
        format!("{}ies", &noun[..noun.len() - 1])
    } else if ["s", "x", "z", "ch", "sh"].iter().any(|s| noun.ends_with(s)) {
        format!("{noun}es")
    } else {
        format!("{noun}s")
    }
}

/// "a" or "an" before the given word.
pub fn indefinite_article(next_word: &str) -> &'static str {
    let lower = next_word.to_lowercase();
    if lower.starts_with("hour") || lower.starts_with("honest") {
        return "an";
    }
    if lower.starts_with("uni") || lower.starts_with("use") || lower.starts_with("eu") {
        return "a";
    }
    match lower.chars().next() {
        Some(c) if is_vowel(c) => "an",
        _ => "a",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_spelling_rules() {
        assert_eq!(past("grade"), "graded");
        assert_eq!(past("carry"), "carried");
        assert_eq!(past("play"), "played");
        assert_eq!(past("drop"), "dropped");
        assert_eq!(third_singular("wash"), "washes");
        assert_eq!(third_singular("fix"), "fixes");
        assert_eq!(third_singular("study"), "studies");
        assert_eq!(third_singular("know"), "knows");
        assert_eq!(progressive("tie"), "tying");
        assert_eq!(progressive("bake"), "baking");
        assert_eq!(progressive("see"), "seeing");
        assert_eq!(progressive("hug"), "hugging");
    }

    #[test]
    fn irregular_table_has_five_nonempty_forms() {
        assert!(IRREGULAR_VERBS.len() >= 60);
        for row in IRREGULAR_VERBS {
            assert!(row.iter().all(|f| !f.is_empty()), "{row:?}");
        }
    }

    #[test]
    fn plurals() {
        assert_eq!(plural("exam"), "exams");
        assert_eq!(plural("box"), "boxes");
        assert_eq!(plural("puppy"), "puppies");
        assert_eq!(plural("child"), "children");
        assert_eq!(plural("toy"), "toys");
    }

    #[test]
    fn articles() {
        assert_eq!(indefinite_article("apple"), "an");
        assert_eq!(indefinite_article("book"), "a");
        assert_eq!(indefinite_article("university"), "a");
    }
}
