//! Mapping of flows onto data-protection-vocabulary IRIs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::Location;
use crate::registry::{Registries, SinkKind, SourceId, SourceLabel};
use crate::taint::{Flow, Status};

pub const BUNDLED_DPV: &str = include_str!("../data/dpv.json");

#[derive(Debug, Error)]
pub enum DpvError {
    #[error("{path}: cannot read DPV map: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("{path}: malformed DPV map: {reason}")]
    Malformed { path: String, reason: String },
    #[error("DPV map has no IRI for {kind} `{name}`")]
    MissingMapping { kind: &'static str, name: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpvMap {
    #[serde(default)]
    pub categories: BTreeMap<String, String>,
    #[serde(default)]
    pub sink_kinds: BTreeMap<SinkKind, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudonymisation: Option<String>,
}

impl DpvMap {
    pub fn bundled() -> DpvMap {
        serde_json::from_str(BUNDLED_DPV).expect("bundled DPV map is valid JSON")
    }

    /// Checks that every category and sink kind in `regs` has an IRI.
    pub fn validate(&self, regs: &Registries) -> Result<(), DpvError> {
        let missing = |kind, name: &str| DpvError::MissingMapping {
            kind,
            name: name.to_string(),
        };
        for name in regs.categories.keys() {
            if !self.categories.contains_key(name) {
                return Err(missing("category", name));
            }
        }
        for kind in regs.sinks.kinds() {
            if !self.sink_kinds.contains_key(&kind) {
                return Err(missing("sink kind", kind.as_str()));
            }
        }
        if !regs.categories.is_empty() && self.collection.is_none() {
            return Err(missing("processing", "collection"));
        }
        if !regs.sanitizers.entries.is_empty() && self.pseudonymisation.is_none() {
            return Err(missing("measure", "pseudonymisation"));
        }
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("DPV map serializes")
    }
}

/// Parses and validates a DPV map. `path` is only used in messages.
pub fn parse_dpv_map(path: &str, text: &str, regs: &Registries) -> Result<DpvMap, DpvError> {
    let map: DpvMap = serde_json::from_str(text).map_err(|e| DpvError::Malformed {
        path: path.to_string(),
        reason: e.to_string(),
    })?;
    for iri in map
        .categories
        .values()
        .chain(map.sink_kinds.values())
        .chain(&map.collection)
        .chain(&map.pseudonymisation)
    {
        if iri.trim().is_empty() {
            return Err(DpvError::Malformed {
                path: path.to_string(),
                reason: "empty IRI".into(),
            });
        }
    }
    map.validate(regs)?;
    Ok(map)
}

/// Loads the map at `path`, or the bundled map when `path` is `None`.
pub fn load_dpv_map(path: Option<&Path>, regs: &Registries) -> Result<DpvMap, DpvError> {
    match path {
        None => parse_dpv_map("<bundled dpv.json>", BUNDLED_DPV, regs),
        Some(p) => {
            let shown = p.display().to_string();
            let text = fs::read_to_string(p).map_err(|e| DpvError::Unreadable {
                path: shown.clone(),
                reason: e.to_string(),
            })?;
            parse_dpv_map(&shown, &text, regs)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Flow { source: SourceId, sink: Location },
    Unsunk { source: SourceId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplianceStatement {
    pub personal_data: String,
    pub processing: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipient: Option<String>,
    pub measures: Vec<String>,
    pub status: Status,
    pub provenance: Provenance,
}

fn iri(table: Option<&String>) -> String {
    table.cloned().unwrap_or_default()
}

/// Statement for a flow. The map must have been validated against the
/// registries the flow came from.
pub fn map_flow(f: &Flow, m: &DpvMap) -> ComplianceStatement {
    let measures = match f.status {
        Status::Pseudonymized => m.pseudonymisation.iter().cloned().collect(),
        Status::Raw => Vec::new(),
    };
    ComplianceStatement {
        personal_data: iri(m.categories.get(&f.source.category)),
        processing: iri(m.sink_kinds.get(&f.sink.class.kind)),
        recipient: f.sink.class.name.clone(),
        measures,
        status: f.status,
        provenance: Provenance::Flow {
            source: f.source.id,
            sink: f.sink.location.clone(),
        },
    }
}

/// Statement for a label whose data reaches no sink.
pub fn map_unsunk(l: &SourceLabel, m: &DpvMap) -> ComplianceStatement {
    ComplianceStatement {
        personal_data: iri(m.categories.get(&l.category)),
        processing: iri(m.collection.as_ref()),
        recipient: None,
        measures: Vec::new(),
        status: Status::Raw,
        provenance: Provenance::Unsunk { source: l.id },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::MethodId;
    use crate::registry::{Origin, SinkClass};
    use crate::taint::SinkSite;

    fn label(category: &str) -> SourceLabel {
        SourceLabel {
            id: SourceId(0),
            location: MethodId::new("A", "m", 0).at(0),
            category: category.into(),
            origin: Origin::SystemApi,
        }
    }

    fn flow(category: &str, kind: SinkKind, name: Option<&str>, status: Status) -> Flow {
        Flow {
            source: label(category),
            sink: SinkSite {
                location: MethodId::new("A", "m", 0).at(1),
                class: SinkClass {
                    kind,
                    name: name.map(String::from),
                },
            },
            status,
            witness: Vec::new(),
            manipulations: Vec::new(),
        }
    }

    #[test]
    fn bundled_map_covers_bundled_registries() {
        let regs = Registries::bundled();
        let m = load_dpv_map(None, &regs).unwrap();
        assert_eq!(m, DpvMap::bundled());
    }

    #[test]
    fn missing_category_is_reported() {
        let regs = Registries::bundled();
        let mut text: serde_json::Value = serde_json::from_str(BUNDLED_DPV).unwrap();
        text["categories"].as_object_mut().unwrap().remove("Location");
        let err = parse_dpv_map("d.json", &text.to_string(), &regs).unwrap_err();
        assert!(
            matches!(&err, DpvError::MissingMapping { kind: "category", name } if name == "Location"),
            "{err}"
        );
    }

    #[test]
    fn missing_sink_kind_is_reported() {
        let regs = Registries::bundled();
        let mut text: serde_json::Value = serde_json::from_str(BUNDLED_DPV).unwrap();
        text["sink_kinds"].as_object_mut().unwrap().remove("Log");
        let err = parse_dpv_map("d.json", &text.to_string(), &regs).unwrap_err();
        assert!(matches!(err, DpvError::MissingMapping { kind: "sink kind", .. }));
    }

    #[test]
    fn empty_registries_accept_empty_map() {
        let m = parse_dpv_map("d.json", "{}", &Registries::default()).unwrap();
        assert_eq!(m, DpvMap::default());
    }

    #[test]
    fn unknown_keys_are_malformed() {
        let err = parse_dpv_map("d.json", r#"{"purposes": {}}"#, &Registries::default());
        assert!(matches!(err, Err(DpvError::Malformed { .. })));
    }

    #[test]
    fn raw_analytics_flow() {
        let m = DpvMap::bundled();
        let s = map_flow(&flow("EmailAddress", SinkKind::Analytics, Some("Tracker"), Status::Raw), &m);
        assert_eq!(s.personal_data, "https://w3id.org/dpv/pd#EmailAddress");
        assert_eq!(s.processing, "https://w3id.org/dpv#Transfer");
        assert_eq!(s.recipient.as_deref(), Some("Tracker"));
        assert!(s.measures.is_empty());
        assert_eq!(s.status, Status::Raw);
    }

    #[test]
    fn pseudonymized_flow_lists_the_measure() {
        let m = DpvMap::bundled();
        let s = map_flow(&flow("Location", SinkKind::Network, None, Status::Pseudonymized), &m);
        assert_eq!(s.measures, vec!["https://w3id.org/dpv#Pseudonymisation".to_string()]);
        assert_eq!(s.recipient, None);
        assert_eq!(s.status, Status::Pseudonymized);
    }

    #[test]
    fn unsunk_label_is_collection() {
        let m = DpvMap::bundled();
        let s = map_unsunk(&label("Location"), &m);
        assert_eq!(s.personal_data, "https://w3id.org/dpv/pd#Location");
        assert_eq!(s.processing, "https://w3id.org/dpv#Collect");
        assert_eq!(s.recipient, None);
        assert_eq!(s.provenance, Provenance::Unsunk { source: SourceId(0) });
    }
}
