//! Subset connectivity statistics measured on snapshots and across epochs:
//! the degree of a node into a set, the expansion from one set into another,
//! and the multi-epoch spread/contact events used by the concentration
//! checks.

use rand::RngCore;
use thiserror::Error;

use super::{MegProcess, NodeSet, Snapshot};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("node {0} must not belong to the target set")]
    NodeInSet(usize),
    #[error("sets must be disjoint")]
    Overlap,
    #[error("node {node} out of range for {n} nodes")]
    OutOfRange { node: usize, n: usize },
}

/// `deg_{i,A}`: how many nodes of `A` are adjacent to `i` in `s`.
pub fn degree_into(s: &Snapshot, i: usize, a: &NodeSet) -> Result<usize, StatsError> {
    if i >= s.node_count() {
        return Err(StatsError::OutOfRange {
            node: i,
            n: s.node_count(),
        });
    }
    if a.contains(i) {
        return Err(StatsError::NodeInSet(i));
    }
    Ok(s.row(i)
        .iter()
        .zip(a.words())
        .map(|(r, m)| (r & m).count_ones() as usize)
        .sum())
}

/// `deg_{A,B}`: how many nodes of `B` have at least one neighbor in `A`.
pub fn expansion(s: &Snapshot, a: &NodeSet, b: &NodeSet) -> Result<usize, StatsError> {
    if !a.is_disjoint(b) {
        return Err(StatsError::Overlap);
    }
    let mut touched = NodeSet::empty(s.node_count());
    s.neighbors_into(a, &mut touched);
    Ok(touched
        .words()
        .iter()
        .zip(b.words())
        .map(|(t, m)| (t & m).count_ones() as usize)
        .sum())
}

/// `spread_A^{τ,T}`: advances `epochs` epochs of `epoch_len` steps each,
/// sampling the snapshot at every epoch boundary, and counts the nodes
/// outside `A` adjacent to `A` in at least one sampled snapshot.
///
/// The process is expected to already sit at an epoch boundary.
pub fn spread(
    meg: &mut dyn MegProcess,
    a: &NodeSet,
    epoch_len: usize,
    epochs: usize,
    rng: &mut dyn RngCore,
) -> usize {
    let n = meg.node_count();
    let mut touched = NodeSet::empty(n);
    let mut snap = Snapshot::empty(n);
    for _ in 0..epochs {
        advance_epoch(meg, epoch_len, rng, &mut snap);
        snap.neighbors_into(a, &mut touched);
    }
    touched.subtract(a);
    touched.len()
}

/// `e_{i,A}^{τ,T}`: whether `i` is adjacent to `A` in any of the next
/// `epochs` epoch-boundary snapshots.
pub fn epoch_contact(
    meg: &mut dyn MegProcess,
    i: usize,
    a: &NodeSet,
    epoch_len: usize,
    epochs: usize,
    rng: &mut dyn RngCore,
) -> bool {
    let n = meg.node_count();
    let mut snap = Snapshot::empty(n);
    for _ in 0..epochs {
        advance_epoch(meg, epoch_len, rng, &mut snap);
        let hit = snap.row(i).iter().zip(a.words()).any(|(r, m)| r & m != 0);
        if hit {
            return true;
        }
    }
    false
}

/// Advances `epoch_len` steps, materializing only the boundary snapshot.
pub(crate) fn advance_epoch(
    meg: &mut dyn MegProcess,
    epoch_len: usize,
    rng: &mut dyn RngCore,
    out: &mut Snapshot,
) {
    assert!(epoch_len >= 1, "epoch length must be at least one step");
    for _ in 0..epoch_len - 1 {
        meg.advance_silent(rng);
    }
    meg.advance_into(rng, out);
}
