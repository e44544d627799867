use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{AuditReport, FindingKind};
use crate::registry::SinkKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategorySafety {
    pub collected: bool,
    pub shared_with: Vec<String>,
    /// `"pseudonymised"` or `"none"`.
    pub security: String,
}

/// Draft answers for an app store data-safety form, keyed by category.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DataSafetyDraft {
    pub categories: BTreeMap<String, CategorySafety>,
}

/// Security is `"pseudonymised"` only when the category has at least one
/// flow and every flow is pseudonymized; data that never leaves the app
/// says nothing about protection in transit.
pub fn draft_data_safety(r: &AuditReport) -> DataSafetyDraft {
    #[derive(Default)]
    struct Acc {
        shared: BTreeSet<String>,
        flows: usize,
        pseudonymized: usize,
    }
    let mut acc: BTreeMap<&str, Acc> = BTreeMap::new();
    for f in &r.findings {
        let a = acc.entry(f.category.as_str()).or_default();
        let Some(sink) = &f.sink else { continue };
        a.flows += 1;
        if f.kind == FindingKind::PseudonymizedFlow {
            a.pseudonymized += 1;
        }
        match sink.kind {
            SinkKind::ThirdParty | SinkKind::Analytics => {
                if let Some(n) = &sink.name {
                    a.shared.insert(n.clone());
                }
            }
            SinkKind::Network => {
                a.shared.insert("network".into());
            }
            SinkKind::Storage | SinkKind::Log => {}
        }
    }
    let categories = acc
        .into_iter()
        .map(|(cat, a)| {
            let security = if a.flows > 0 && a.flows == a.pseudonymized {
                "pseudonymised"
            } else {
                "none"
            };
            (
                cat.to_string(),
                CategorySafety {
                    collected: true,
                    shared_with: a.shared.into_iter().collect(),
                    security: security.into(),
                },
            )
        })
        .collect();
    DataSafetyDraft { categories }
}
