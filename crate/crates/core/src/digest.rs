//! Content digests used to tie analysis outputs to their inputs.

use sha2::{Digest, Sha256};

use crate::ir::{print_program, Program};

/// SHA-256 hex of the parts, each preceded by its byte length so that
/// different splits of the same bytes hash differently.
pub fn sha256_hex<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut h = Sha256::new();
    for part in parts {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Digest of the canonical text of a program.
pub fn program_digest(p: &Program) -> String {
    sha256_hex([print_program(p).as_str()])
}
