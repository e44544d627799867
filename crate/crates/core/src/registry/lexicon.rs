use std::collections::{BTreeMap, HashSet};

/// Personal-data keywords: lowercase token → category name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub entries: BTreeMap<String, String>,
}

/// Splits widget text into lowercase tokens at non-alphanumeric characters
/// (`_`, `-`, spaces, ...), camelCase humps and letter/digit transitions.
///
/// `userPhoneNumber` → `[user, phone, number]`, `URLField2` → `[url, field, 2]`.
pub fn tokenize_widget_text(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_alphabetic() != cur.is_alphabetic())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower);
            if boundary {
                tokens.push(chars[start..i].iter().collect::<String>().to_lowercase());
                start = i;
            }
        }
        if start < chars.len() {
            tokens.push(chars[start..].iter().collect::<String>().to_lowercase());
        }
    }
    tokens
}

/// The lexicographically smallest keyword equal to some token of
/// `widget_text`, with its category.
pub fn match_keyword(widget_text: &str, lex: &Lexicon) -> Option<(String, String)> {
    let tokens: HashSet<String> = tokenize_widget_text(widget_text).into_iter().collect();
    lex.entries
        .iter()
        .find(|(kw, _)| tokens.contains(kw.as_str()))
        .map(|(kw, cat)| (kw.clone(), cat.clone()))
}
