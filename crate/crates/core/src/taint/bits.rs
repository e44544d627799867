//! Bitset encoding of taint values.
//!
//! A value over `n` labels is `2 * words(n)` machine words: a `present`
//! set followed by a `raw` set, with `raw ⊆ present`. A present label whose
//! raw bit is clear is `Pseudonymized`. Bitwise or is the lattice join.

use super::Status;

pub(crate) fn words(labels: usize) -> usize {
    labels.div_ceil(64)
}

/// `dst |= src`; true if `dst` changed.
pub(crate) fn join(dst: &mut [u64], src: &[u64]) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let n = *d | *s;
        changed |= n != *d;
        *d = n;
    }
    changed
}

pub(crate) fn set_raw(v: &mut [u64], w: usize, i: usize) {
    v[i / 64] |= 1 << (i % 64);
    v[w + i / 64] |= 1 << (i % 64);
}

pub(crate) fn pseudonymize(v: &mut [u64], w: usize) {
    v[w..2 * w].fill(0);
}

/// Present labels of `v` with their status, by label index.
pub(crate) fn statuses(v: &[u64], w: usize) -> impl Iterator<Item = (usize, Status)> + '_ {
    (0..w).flat_map(move |k| {
        let mut bits = v[k];
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let i = k * 64 + b;
            let raw = v[w + k] & (1 << b) != 0;
            Some((i, if raw { Status::Raw } else { Status::Pseudonymized }))
        })
    })
}

pub(crate) fn contains(v: &[u64], i: usize) -> bool {
    v[i / 64] & (1 << (i % 64)) != 0
}

pub(crate) fn count(v: &[u64], w: usize) -> usize {
    v[..w].iter().map(|x| x.count_ones() as usize).sum()
}
