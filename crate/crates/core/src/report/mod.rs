//! Risk scoring and the audit report.
//!
//! The JSON report is the single output of record. The DOT files and the
//! terminal summary are renderings of it or of its slices.

mod dot;
mod safety;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::{program_digest, sha256_hex};
use crate::dpv::{map_flow, map_unsunk, ComplianceStatement, DpvMap};
use crate::ir::{print_program, Location, Program};
use crate::registry::{Origin, Registries, SinkKind, SourceId, SourceLabel};
use crate::slicer::{slice_stats, Slice, SliceStats};
use crate::taint::{Status, TaintResult};

pub use dot::render_dot;
pub use safety::{draft_data_safety, CategorySafety, DataSafetyDraft};
pub use text::render_text;

pub const REPORT_VERSION: &str = "1";

pub const ASSUMPTIONS: &[&str] = &[
    "Virtual calls are resolved by class-hierarchy analysis over the classes in the input; calls into other classes are opaque.",
    "Opaque calls pass argument data to their result and do not touch fields.",
    "Fields are tracked per declaring class and name, independent of the receiver object and of program order.",
    "Implicit flows through branch conditions appear in slices but not in taint findings.",
    "Interprocedural propagation is context-insensitive, with one summary per method; every method is an entry point.",
    "Only the client-side code in the input is analysed; processing after data leaves the app is unknown.",
    "Purposes and legal bases of processing cannot be inferred from code and are not stated.",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
}

/// Status multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatusMultipliers {
    pub raw: f64,
    pub pseudonymized: f64,
}

impl Default for StatusMultipliers {
    fn default() -> Self {
        StatusMultipliers {
            raw: 2.0,
            pseudonymized: 1.0,
        }
    }
}

/// Sink multipliers; `none` applies to data that reaches no sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinkMultipliers {
    pub analytics: f64,
    pub third_party: f64,
    pub network: f64,
    pub storage: f64,
    pub log: f64,
    pub none: f64,
}

impl Default for SinkMultipliers {
    fn default() -> Self {
        SinkMultipliers {
            analytics: 3.0,
            third_party: 3.0,
            network: 2.0,
            storage: 1.5,
            log: 1.0,
            none: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskConfig {
    pub status: StatusMultipliers,
    pub sink: SinkMultipliers,
}

impl RiskConfig {
    pub fn validate(&self) -> Result<(), String> {
        let s = &self.sink;
        let all = [
            ("status.raw", self.status.raw),
            ("status.pseudonymized", self.status.pseudonymized),
            ("sink.analytics", s.analytics),
            ("sink.third_party", s.third_party),
            ("sink.network", s.network),
            ("sink.storage", s.storage),
            ("sink.log", s.log),
            ("sink.none", s.none),
        ];
        match all.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            Some((k, v)) => Err(format!("risk multiplier {k} must be a non-negative number, got {v}")),
            None => Ok(()),
        }
    }

    pub fn status_mult(&self, s: Status) -> f64 {
        match s {
            Status::Raw => self.status.raw,
            Status::Pseudonymized => self.status.pseudonymized,
        }
    }

    pub fn sink_mult(&self, k: Option<SinkKind>) -> f64 {
        let s = &self.sink;
        match k {
            Some(SinkKind::Analytics) => s.analytics,
            Some(SinkKind::ThirdParty) => s.third_party,
            Some(SinkKind::Network) => s.network,
            Some(SinkKind::Storage) => s.storage,
            Some(SinkKind::Log) => s.log,
            None => s.none,
        }
    }
}

/// `weight × status multiplier × sink multiplier`; `sink` is `None` for
/// data that is collected but never leaves the app.
pub fn risk_score(weight: f64, status: Status, sink: Option<SinkKind>, cfg: &RiskConfig) -> f64 {
    weight * cfg.status_mult(status) * cfg.sink_mult(sink)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FindingKind {
    RawFlow,
    PseudonymizedFlow,
    CollectedNoEgress,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindingSink {
    pub location: Location,
    pub kind: SinkKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub id: usize,
    pub kind: FindingKind,
    pub source: SourceId,
    pub category: String,
    pub origin: Origin,
    pub source_location: Location,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sink: Option<FindingSink>,
    pub risk: f64,
    pub witness: Vec<Location>,
    pub manipulations: Vec<String>,
    /// Index into the report's `statements`.
    pub statement: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceSummary {
    pub source: SourceId,
    pub category: String,
    pub location: Location,
    #[serde(flatten)]
    pub stats: SliceStats,
    pub dot: String,
}

/// Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub version: String,
    pub input_digest: String,
    pub assumptions: Vec<String>,
    pub findings: Vec<Finding>,
    pub slices: Vec<SliceSummary>,
    pub data_safety: DataSafetyDraft,
    pub statements: Vec<ComplianceStatement>,
}

impl AuditReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn max_risk(&self) -> Option<f64> {
        self.findings.iter().map(|f| f.risk).reduce(f64::max)
    }
}

/// Everything the report is built from.
pub struct ReportInputs<'a> {
    pub program: &'a Program,
    pub registries: &'a Registries,
    pub dpv: &'a DpvMap,
    pub risk: &'a RiskConfig,
    pub taint: &'a TaintResult,
    pub slices: &'a [Slice],
}

pub fn input_digest(p: &Program, regs: &Registries, dpv: &DpvMap, risk: &RiskConfig) -> String {
    let risk_json = serde_json::to_string(risk).expect("risk config serializes");
    sha256_hex([
        print_program(p).as_str(),
        regs.canonical_json().as_str(),
        dpv.canonical_json().as_str(),
        risk_json.as_str(),
    ])
}

pub fn slice_file_name(id: SourceId) -> String {
    format!("slice_{}.dot", id.0)
}

struct Draft {
    kind: FindingKind,
    label: SourceLabel,
    sink: Option<FindingSink>,
    risk: f64,
    witness: Vec<Location>,
    manipulations: Vec<String>,
    statement: ComplianceStatement,
}

fn check_consistency(inp: &ReportInputs<'_>) -> Result<(), ReportError> {
    let facts = &inp.taint.facts;
    if facts.program_digest != program_digest(inp.program) {
        return Err(ReportError::InconsistentInputs(
            "taint facts were computed on a different program".into(),
        ));
    }
    let labels: BTreeSet<SourceId> = facts.labels().iter().map(|l| l.id).collect();
    let roots: BTreeSet<SourceId> = inp.slices.iter().map(|s| s.root.id).collect();
    if labels != roots || roots.len() != inp.slices.len() {
        return Err(ReportError::InconsistentInputs(
            "slices do not correspond one-to-one to source labels".into(),
        ));
    }
    let sunk: BTreeSet<SourceId> = inp.taint.flows.iter().map(|f| f.source.id).collect();
    let unsunk: BTreeSet<SourceId> = inp.taint.unsunk.iter().map(|l| l.id).collect();
    if !sunk.is_disjoint(&unsunk) || sunk.union(&unsunk).ne(labels.iter()) {
        return Err(ReportError::InconsistentInputs(
            "flows and unsunk labels do not partition the source labels".into(),
        ));
    }
    for l in facts.labels() {
        if inp.program.statement(&l.location).is_none() {
            return Err(ReportError::InconsistentInputs(format!(
                "label {} points at missing statement {}",
                l.id.0, l.location
            )));
        }
    }
    Ok(())
}

pub fn build_report(inp: &ReportInputs<'_>) -> Result<AuditReport, ReportError> {
    check_consistency(inp)?;
    let regs = inp.registries;
    let mut drafts = Vec::new();
    for f in &inp.taint.flows {
        let kind = match f.status {
            Status::Raw => FindingKind::RawFlow,
            Status::Pseudonymized => FindingKind::PseudonymizedFlow,
        };
        drafts.push(Draft {
            kind,
            label: f.source.clone(),
            sink: Some(FindingSink {
                location: f.sink.location.clone(),
                kind: f.sink.class.kind,
                name: f.sink.class.name.clone(),
            }),
            risk: risk_score(
                regs.weight(&f.source.category),
                f.status,
                Some(f.sink.class.kind),
                inp.risk,
            ),
            witness: f.witness.clone(),
            manipulations: f.manipulations.clone(),
            statement: map_flow(f, inp.dpv),
        });
    }
    for l in &inp.taint.unsunk {
        drafts.push(Draft {
            kind: FindingKind::CollectedNoEgress,
            label: l.clone(),
            sink: None,
            risk: risk_score(regs.weight(&l.category), Status::Raw, None, inp.risk),
            witness: vec![l.location.clone()],
            manipulations: Vec::new(),
            statement: map_unsunk(l, inp.dpv),
        });
    }
    drafts.sort_by(|a, b| {
        b.risk
            .total_cmp(&a.risk)
            .then(a.kind.cmp(&b.kind))
            .then(a.label.id.cmp(&b.label.id))
            .then_with(|| sink_loc(a).cmp(&sink_loc(b)))
    });

    let mut findings = Vec::with_capacity(drafts.len());
    let mut statements = Vec::with_capacity(drafts.len());
    for (id, d) in drafts.into_iter().enumerate() {
        statements.push(d.statement);
        findings.push(Finding {
            id,
            kind: d.kind,
            source: d.label.id,
            category: d.label.category,
            origin: d.label.origin,
            source_location: d.label.location,
            sink: d.sink,
            risk: d.risk,
            witness: d.witness,
            manipulations: d.manipulations,
            statement: id,
        });
    }

    let mut slices: Vec<SliceSummary> = inp
        .slices
        .iter()
        .map(|s| SliceSummary {
            source: s.root.id,
            category: s.root.category.clone(),
            location: s.root.location.clone(),
            stats: slice_stats(s, inp.program, &regs.sinks),
            dot: slice_file_name(s.root.id),
        })
        .collect();
    slices.sort_by_key(|s| s.source);

    let mut report = AuditReport {
        version: REPORT_VERSION.to_string(),
        input_digest: input_digest(inp.program, regs, inp.dpv, inp.risk),
        assumptions: ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
        findings,
        slices,
        data_safety: DataSafetyDraft::default(),
        statements,
    };
    report.data_safety = draft_data_safety(&report);
    Ok(report)
}

fn sink_loc(d: &Draft) -> Option<&Location> {
    d.sink.as_ref().map(|s| &s.location)
}

/// True when some finding's risk reaches `threshold`.
pub fn exceeds_threshold(r: &AuditReport, threshold: f64) -> bool {
    r.findings
        .iter()
        .any(|f| f.risk.partial_cmp(&threshold) != Some(Ordering::Less))
}
