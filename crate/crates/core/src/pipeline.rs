//! The full analysis of one program, from parsed IR to report.

use thiserror::Error;

use crate::dpv::DpvMap;
use crate::graph::{build_call_graph, build_pdg};
use crate::ir::{validate, Diagnostic, Program, Severity};
use crate::registry::{label_sources, Registries, SourceId};
use crate::report::{
    build_report, render_dot, slice_file_name, AuditReport, ReportError, ReportInputs, RiskConfig,
};
use crate::slicer::{forward_slice, Slice};
use crate::taint::{analyze_taint, TaintError, TaintResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("program is invalid:\n{}", render_diagnostics(.0))]
    InvalidProgram(Vec<Diagnostic>),
    #[error(transparent)]
    Taint(#[from] TaintError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

pub fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

pub struct Inputs<'a> {
    pub program: &'a Program,
    pub registries: &'a Registries,
    pub dpv: &'a DpvMap,
    pub risk: &'a RiskConfig,
}

pub struct Analysis {
    pub report: AuditReport,
    /// Serialized report, as written to `report.json`.
    pub json: String,
    /// `(file name, DOT text)` per slice, in label order.
    pub dots: Vec<(String, String)>,
    pub taint: TaintResult,
    pub slices: Vec<Slice>,
}

pub fn analyze(inp: &Inputs<'_>) -> Result<Analysis, PipelineError> {
    let errors: Vec<Diagnostic> = validate(inp.program)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(PipelineError::InvalidProgram(errors));
    }
    let p = inp.program;
    let regs = inp.registries;
    let labels = label_sources(p, &regs.sources, &regs.lexicon);
    let cg = build_call_graph(p);
    let g = build_pdg(p, &cg);
    let slices: Vec<Slice> = labels.iter().map(|l| forward_slice(&g, l)).collect();
    let taint = analyze_taint(p, &cg, &g, &labels, regs)?;
    let report = build_report(&ReportInputs {
        program: p,
        registries: regs,
        dpv: inp.dpv,
        risk: inp.risk,
        taint: &taint,
        slices: &slices,
    })?;
    let dots = slices
        .iter()
        .map(|s| (slice_file_name(s.root.id), render_dot(s, p, regs, &labels)))
        .collect();
    let json = report.to_json();
    Ok(Analysis {
        report,
        json,
        dots,
        taint,
        slices,
    })
}

impl Analysis {
    pub fn dot(&self, id: SourceId) -> Option<&str> {
        let name = slice_file_name(id);
        self.dots
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.as_str())
    }
}
