//! Call graph and interprocedural dependence graph construction.

mod callgraph;
mod intra;
mod pdg;

pub use callgraph::{build_call_graph, CallGraph, CallTarget};
pub use intra::{control_deps, data_deps, Cfg, Def, ReachingDefs};
pub use pdg::{build_pdg, DepEdge, DepGraph, EdgeKind, NodeId};
pub(crate) use pdg::resolve_field;
