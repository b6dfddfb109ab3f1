//! Exact top-k assignments under the factorized distribution.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::ansatz::ArchAssignment;
use crate::dqas::softmax::arch_probabilities;

/// Frontier node: per-row ranks into the per-row probability order.
struct Node {
    prob: f64,
    ranks: Vec<u32>,
    /// Candidate indices, for deterministic tie-breaking.
    assignment: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on probability; ties prefer the lexicographically
        // smaller candidate-index vector.
        self.prob
            .total_cmp(&other.prob)
            .then_with(|| other.assignment.cmp(&self.assignment))
    }
}

/// The `k` highest-joint-probability assignments, exactly, by best-first
/// search over per-row rank vectors. Rank 1 is the per-row argmax; ties
/// break toward lower candidate indices.
pub fn top_k(alpha: &[Vec<f64>], k: usize) -> Vec<(ArchAssignment, f64)> {
    assert!(k >= 1, "top_k needs k >= 1");
    let probs = arch_probabilities(alpha);
    if probs.is_empty() {
        return Vec::new();
    }

    // Per row: candidate indices ordered by (probability desc, index asc).
    let orders: Vec<Vec<usize>> = probs
        .iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let node_for = |ranks: Vec<u32>| -> Node {
        let assignment: Vec<usize> = ranks
            .iter()
            .enumerate()
            .map(|(r, &rank)| orders[r][rank as usize])
            .collect();
        let prob = probs
            .iter()
            .zip(&assignment)
            .map(|(row, &c)| row[c])
            .product();
        Node {
            prob,
            ranks,
            assignment,
        }
    };

    let mut heap = BinaryHeap::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let root = vec![0u32; probs.len()];
    seen.insert(root.clone());
    heap.push(node_for(root));

    let mut out = Vec::with_capacity(k);
    while let Some(node) = heap.pop() {
        for (row, &rank) in node.ranks.iter().enumerate() {
            let next = rank as usize + 1;
            if next < orders[row].len() {
                let mut ranks = node.ranks.clone();
                ranks[row] = next as u32;
                if seen.insert(ranks.clone()) {
                    heap.push(node_for(ranks));
                }
            }
        }
        out.push((ArchAssignment(node.assignment), node.prob));
        if out.len() == k {
            break;
        }
    }
    out
}
