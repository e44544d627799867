//! Source, sink and sanitizer registries plus the personal-data keyword
//! lexicon. All of them are plain JSON data files so auditors can extend
//! them without rebuilding.

mod label;
mod lexicon;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{is_ident, is_qualified_name};

pub use label::{label_sources, Origin, SourceId, SourceLabel};
pub use lexicon::{match_keyword, tokenize_widget_text, Lexicon};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{path}: cannot read registry: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("{path}: malformed registry: {reason}")]
    MalformedRegistry { path: String, reason: String },
    #[error("conflicting registry entry for `{0}`")]
    ConflictingEntry(String),
}

fn malformed(path: &str, reason: impl fmt::Display) -> RegistryError {
    RegistryError::MalformedRegistry {
        path: path.to_string(),
        reason: reason.to_string(),
    }
}

/// A personal-data category and its risk weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersonalDataCategory {
    pub name: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceRegistry {
    /// signature → category name
    pub entries: BTreeMap<String, String>,
}

impl SourceRegistry {
    pub fn category_of(&self, signature: &str) -> Option<&str> {
        self.entries.get(signature).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SinkKind {
    ThirdParty,
    Analytics,
    Network,
    Storage,
    Log,
}

impl SinkKind {
    pub const ALL: [SinkKind; 5] = [
        SinkKind::ThirdParty,
        SinkKind::Analytics,
        SinkKind::Network,
        SinkKind::Storage,
        SinkKind::Log,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SinkKind::ThirdParty => "ThirdParty",
            SinkKind::Analytics => "Analytics",
            SinkKind::Network => "Network",
            SinkKind::Storage => "Storage",
            SinkKind::Log => "Log",
        }
    }

    fn requires_name(self) -> bool {
        matches!(self, SinkKind::ThirdParty | SinkKind::Analytics)
    }
}

impl fmt::Display for SinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkMatcher {
    Exact(String),
    /// Matches any signature under this dotted prefix.
    Prefix(String),
}

impl SinkMatcher {
    fn parse(text: &str) -> Option<SinkMatcher> {
        match text.strip_suffix(".*") {
            Some(prefix) if is_qualified_name(prefix) => Some(SinkMatcher::Prefix(prefix.into())),
            None if text.contains('.') && is_qualified_name(text) => {
                Some(SinkMatcher::Exact(text.into()))
            }
            _ => None,
        }
    }

    fn matches(&self, signature: &str) -> bool {
        match self {
            SinkMatcher::Exact(s) => s == signature,
            SinkMatcher::Prefix(p) => signature
                .strip_prefix(p.as_str())
                .is_some_and(|rest| rest.starts_with('.')),
        }
    }
}

/// Classification of a sink call: its kind and, for third parties and
/// analytics engines, the recipient's name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SinkClass {
    pub kind: SinkKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkEntry {
    pub matcher: SinkMatcher,
    pub class: SinkClass,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SinkRegistry {
    pub entries: Vec<SinkEntry>,
}

impl SinkRegistry {
    /// Exact matches take precedence; otherwise the longest prefix wins.
    pub fn classify(&self, signature: &str) -> Option<&SinkClass> {
        let exact = self.entries.iter().find(|e| match &e.matcher {
            SinkMatcher::Exact(s) => s == signature,
            SinkMatcher::Prefix(_) => false,
        });
        if let Some(e) = exact {
            return Some(&e.class);
        }
        self.entries
            .iter()
            .filter_map(|e| match &e.matcher {
                SinkMatcher::Prefix(p) if e.matcher.matches(signature) => Some((p.len(), &e.class)),
                _ => None,
            })
            .max_by_key(|(len, _)| *len)
            .map(|(_, class)| class)
    }

    pub fn kinds(&self) -> BTreeSet<SinkKind> {
        self.entries.iter().map(|e| e.class.kind).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SanitizerRegistry {
    pub entries: BTreeSet<String>,
}

impl SanitizerRegistry {
    pub fn contains(&self, signature: &str) -> bool {
        self.entries.contains(signature)
    }
}

/// Every registry needed for one analysis run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registries {
    pub sources: SourceRegistry,
    pub sinks: SinkRegistry,
    pub sanitizers: SanitizerRegistry,
    pub lexicon: Lexicon,
    /// Every category named by the sources or lexicon, with its weight.
    pub categories: BTreeMap<String, PersonalDataCategory>,
}

impl Registries {
    pub fn weight(&self, category: &str) -> f64 {
        self.categories.get(category).map_or(1.0, |c| c.weight)
    }
}

/// Locations of the four registry files.
#[derive(Debug, Clone, Default)]
pub struct RegistryPaths {
    pub sources: Option<PathBuf>,
    pub sinks: Option<PathBuf>,
    pub sanitizers: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
}

/// The raw text of the four registry files, each labelled with a path for
/// error messages.
#[derive(Debug, Clone)]
pub struct RegistryTexts {
    pub sources: (String, String),
    pub sinks: (String, String),
    pub sanitizers: (String, String),
    pub lexicon: (String, String),
}

pub const BUNDLED_SOURCES: &str = include_str!("../../data/sources.json");
pub const BUNDLED_SINKS: &str = include_str!("../../data/sinks.json");
pub const BUNDLED_SANITIZERS: &str = include_str!("../../data/sanitizers.json");
pub const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.json");

impl RegistryTexts {
    /// Reads every given path; missing paths fall back to the bundled data.
    pub fn read(paths: &RegistryPaths) -> Result<RegistryTexts, RegistryError> {
        fn read_one(path: &Option<PathBuf>, bundled: &str, name: &str) -> Result<(String, String), RegistryError> {
            match path {
                Some(p) => std::fs::read_to_string(p)
                    .map(|t| (p.display().to_string(), t))
                    .map_err(|e| RegistryError::Unreadable {
                        path: p.display().to_string(),
                        reason: e.to_string(),
                    }),
                None => Ok((format!("<bundled {name}>"), bundled.to_string())),
            }
        }
        Ok(RegistryTexts {
            sources: read_one(&paths.sources, BUNDLED_SOURCES, "sources")?,
            sinks: read_one(&paths.sinks, BUNDLED_SINKS, "sinks")?,
            sanitizers: read_one(&paths.sanitizers, BUNDLED_SANITIZERS, "sanitizers")?,
            lexicon: read_one(&paths.lexicon, BUNDLED_LEXICON, "lexicon")?,
        })
    }

    pub fn bundled() -> RegistryTexts {
        RegistryTexts::read(&RegistryPaths::default()).expect("bundled data needs no IO")
    }
}

/// Loads and validates the registries from files on disk.
pub fn load_registries(paths: &RegistryPaths) -> Result<Registries, RegistryError> {
    parse_registries(&RegistryTexts::read(paths)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SourcesFile {
    #[serde(default)]
    entries: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SinkEntryFile {
    #[serde(rename = "match")]
    matcher: String,
    kind: SinkKind,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SinksFile {
    #[serde(default)]
    entries: Vec<SinkEntryFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SanitizersFile {
    #[serde(default)]
    entries: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    #[serde(default)]
    entries: BTreeMap<String, String>,
    #[serde(default)]
    weights: BTreeMap<String, f64>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &str, text: &str) -> Result<T, RegistryError> {
    serde_json::from_str(text).map_err(|e| malformed(path, e))
}

fn check_category(path: &str, name: &str) -> Result<(), RegistryError> {
    if is_ident(name) {
        Ok(())
    } else {
        Err(malformed(path, format!("`{name}` is not a valid category name")))
    }
}

/// Parses and cross-validates the four registry texts.
pub fn parse_registries(texts: &RegistryTexts) -> Result<Registries, RegistryError> {
    let (src_path, src_text) = &texts.sources;
    let sources_file: SourcesFile = parse_json(src_path, src_text)?;
    for (sig, cat) in &sources_file.entries {
        if !sig.contains('.') || !is_qualified_name(sig) {
            return Err(malformed(src_path, format!("`{sig}` is not a qualified signature")));
        }
        check_category(src_path, cat)?;
    }
    let sources = SourceRegistry {
        entries: sources_file.entries,
    };

    let (sink_path, sink_text) = &texts.sinks;
    let sinks_file: SinksFile = parse_json(sink_path, sink_text)?;
    let mut sinks = SinkRegistry::default();
    for entry in sinks_file.entries {
        let matcher = SinkMatcher::parse(&entry.matcher).ok_or_else(|| {
            malformed(sink_path, format!("`{}` is neither a signature nor a `prefix.*`", entry.matcher))
        })?;
        if entry.kind.requires_name() && entry.name.as_deref().is_none_or(str::is_empty) {
            return Err(malformed(
                sink_path,
                format!("{} sink `{}` needs a recipient name", entry.kind, entry.matcher),
            ));
        }
        if sinks.entries.iter().any(|e| e.matcher == matcher) {
            return Err(RegistryError::ConflictingEntry(entry.matcher));
        }
        sinks.entries.push(SinkEntry {
            matcher,
            class: SinkClass {
                kind: entry.kind,
                name: entry.name,
            },
        });
    }

    let (san_path, san_text) = &texts.sanitizers;
    let san_file: SanitizersFile = parse_json(san_path, san_text)?;
    let mut sanitizers = SanitizerRegistry::default();
    for sig in san_file.entries {
        if !sig.contains('.') || !is_qualified_name(&sig) {
            return Err(malformed(san_path, format!("`{sig}` is not a qualified signature")));
        }
        if sources.entries.contains_key(&sig) {
            return Err(RegistryError::ConflictingEntry(sig));
        }
        if !sanitizers.entries.insert(sig.clone()) {
            return Err(RegistryError::ConflictingEntry(sig));
        }
    }

    let (lex_path, lex_text) = &texts.lexicon;
    let lex_file: LexiconFile = parse_json(lex_path, lex_text)?;
    for (kw, cat) in &lex_file.entries {
        if kw.is_empty() || !kw.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase()) {
            return Err(malformed(
                lex_path,
                format!("keyword `{kw}` must be a single lowercase alphanumeric token"),
            ));
        }
        check_category(lex_path, cat)?;
    }
    let mut categories = BTreeMap::new();
    for name in sources.entries.values().chain(lex_file.entries.values()) {
        categories.insert(
            name.clone(),
            PersonalDataCategory {
                name: name.clone(),
                weight: 1.0,
            },
        );
    }
    for (name, &weight) in &lex_file.weights {
        check_category(lex_path, name)?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(malformed(lex_path, format!("weight of `{name}` must be positive")));
        }
        categories.insert(
            name.clone(),
            PersonalDataCategory {
                name: name.clone(),
                weight,
            },
        );
    }
    let lexicon = Lexicon {
        entries: lex_file.entries,
    };

    Ok(Registries {
        sources,
        sinks,
        sanitizers,
        lexicon,
        categories,
    })
}

impl Registries {
    pub fn bundled() -> Registries {
        parse_registries(&RegistryTexts::bundled()).expect("bundled registries are valid")
    }

    /// Canonical JSON of the loaded registries; used for input digests.
    pub fn canonical_json(&self) -> String {
        let sinks: Vec<_> = self
            .sinks
            .entries
            .iter()
            .map(|e| {
                let m = match &e.matcher {
                    SinkMatcher::Exact(s) => s.clone(),
                    SinkMatcher::Prefix(p) => format!("{p}.*"),
                };
                serde_json::json!({ "match": m, "kind": e.class.kind, "name": e.class.name })
            })
            .collect();
        let weights: BTreeMap<_, _> = self
            .categories
            .values()
            .map(|c| (c.name.clone(), c.weight))
            .collect();
        serde_json::json!({
            "sources": self.sources.entries,
            "sinks": sinks,
            "sanitizers": self.sanitizers.entries,
            "lexicon": self.lexicon.entries,
            "weights": weights,
        })
        .to_string()
    }
}
