use serde::Serialize;

use super::{match_keyword, Lexicon, SourceRegistry};
use crate::ir::{Location, Program};

/// Stable per-run identifier of a labelled source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct SourceId(pub u32);

impl std::fmt::Display for SourceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Origin {
    /// The callee is a registered system API.
    SystemApi,
    /// The call reads a widget whose text matched a lexicon keyword.
    UserInput { widget: String, keyword: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceLabel {
    pub id: SourceId,
    pub location: Location,
    pub category: String,
    pub origin: Origin,
}

/// Labels every call statement that acquires personal data. A registered
/// system API shadows a widget keyword match on the same statement. Ids
/// follow canonical location order.
pub fn label_sources(p: &Program, src: &SourceRegistry, lex: &Lexicon) -> Vec<SourceLabel> {
    let mut labels = Vec::new();
    for (id, method) in p.methods() {
        for (index, stmt) in method.body.iter().enumerate() {
            let Some(callee) = stmt.kind.callee() else { continue };
            let labelled = if let Some(cat) = src.category_of(&callee.signature()) {
                Some((cat.to_string(), Origin::SystemApi))
            } else {
                stmt.kind.widget().and_then(|w| {
                    match_keyword(w, lex).map(|(keyword, cat)| {
                        (
                            cat,
                            Origin::UserInput {
                                widget: w.to_string(),
                                keyword,
                            },
                        )
                    })
                })
            };
            if let Some((category, origin)) = labelled {
                labels.push(SourceLabel {
                    id: SourceId(labels.len() as u32),
                    location: id.at(index),
                    category,
                    origin,
                });
            }
        }
    }
    labels
}
