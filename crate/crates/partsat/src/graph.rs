//! The instance graph: one vertex per partition element, one edge per pair
//! of elements sharing one or two variables. Each edge carries, per
//! assignment pattern over the shared variables, the 8-bit index masks that
//! realize projection and imposition on both endpoints.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::partition::{AssignmentIndex, Partition, TripleKey};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("keys share {0} variables; an edge requires 1 or 2")]
    BadSharedCount(usize),
}

/// Shared-variable mask table for one unordered element pair. `patterns[p]`
/// holds `(mask_a, mask_b)`: the indices of each endpoint extending shared
/// pattern `p`. Pattern indices follow the same F-bit convention as
/// `AssignmentIndex`, over the shared variables in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLink {
    a: usize,
    b: usize,
    shared: Vec<u32>,
    pos_in_a: Vec<usize>,
    pos_in_b: Vec<usize>,
    patterns: Vec<(u8, u8)>,
}

impl EdgeLink {
    pub fn endpoints(&self) -> (usize, usize) {
        (self.a, self.b)
    }

    pub fn shared(&self) -> &[u32] {
        &self.shared
    }

    pub fn pos_in_a(&self) -> &[usize] {
        &self.pos_in_a
    }

    pub fn pos_in_b(&self) -> &[usize] {
        &self.pos_in_b
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// Masks for pattern `p`, ordered (source, target) for the requested
    /// direction.
    pub fn masks(&self, p: usize, a_is_source: bool) -> (u8, u8) {
        let (ma, mb) = self.patterns[p];
        if a_is_source {
            (ma, mb)
        } else {
            (mb, ma)
        }
    }

    /// Values of the shared variables under pattern `p`, ascending var order.
    pub fn pattern_values(&self, p: usize) -> Vec<bool> {
        let k = self.shared.len();
        (0..k).map(|j| (p >> (k - 1 - j)) & 1 == 0).collect()
    }
}

/// Restriction of a triple index to the given positions, encoded with the
/// same F-bit convention as full indices.
fn restrict(index: AssignmentIndex, positions: &[usize]) -> usize {
    positions.iter().fold(0, |acc, &pos| {
        (acc << 1) | usize::from(!index.value_at(pos))
    })
}

/// Build the per-pattern mask tables for a pair of keys sharing 1 or 2
/// variables, by enumerating all 8 indices on each side and grouping by
/// restriction to the shared set.
pub fn edge_masks(key_a: &TripleKey, key_b: &TripleKey) -> Result<EdgeLink, GraphError> {
    let shared: Vec<u32> = key_a
        .vars()
        .iter()
        .copied()
        .filter(|v| key_b.contains(*v))
        .collect();
    if shared.is_empty() || shared.len() > 2 {
        return Err(GraphError::BadSharedCount(shared.len()));
    }
    let pos_in_a: Vec<usize> = shared.iter().map(|&v| key_a.position_of(v).unwrap()).collect();
    let pos_in_b: Vec<usize> = shared.iter().map(|&v| key_b.position_of(v).unwrap()).collect();
    let mut patterns = vec![(0u8, 0u8); 1 << shared.len()];
    for index in AssignmentIndex::all() {
        patterns[restrict(index, &pos_in_a)].0 |= index.bit();
        patterns[restrict(index, &pos_in_b)].1 |= index.bit();
    }
    Ok(EdgeLink {
        a: 0,
        b: 0,
        shared,
        pos_in_a,
        pos_in_b,
        patterns,
    })
}

/// Size facts asserted against the combinatorial bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
}

/// Immutable after build; vertices are the partition's element slots in key
/// order, edges are canonical `(a < b)` pairs sorted lexicographically.
#[derive(Debug, Clone)]
pub struct InstanceGraph {
    vertex_count: usize,
    edges: Vec<EdgeLink>,
    /// Per vertex, the directed edge ids with that vertex as source.
    outgoing: Vec<Vec<u32>>,
}

impl InstanceGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[EdgeLink] {
        &self.edges
    }

    pub fn directed_edge_count(&self) -> usize {
        self.edges.len() * 2
    }

    /// Directed edge `id`: edge `id / 2`, direction a->b when `id` is even.
    pub fn directed(&self, id: u32) -> (&EdgeLink, bool) {
        (&self.edges[(id / 2) as usize], id.is_multiple_of(2))
    }

    /// Source and destination vertices of directed edge `id`.
    pub fn directed_endpoints(&self, id: u32) -> (usize, usize) {
        let (edge, a_is_source) = self.directed(id);
        let (a, b) = edge.endpoints();
        if a_is_source {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn outgoing(&self, vertex: usize) -> &[u32] {
        &self.outgoing[vertex]
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.outgoing[vertex].len()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            vertex_count: self.vertex_count,
            edge_count: self.edges.len(),
            max_degree: (0..self.vertex_count).map(|v| self.degree(v)).max().unwrap_or(0),
        }
    }

    /// Edge-list text for debugging: `a b shared=v,...` per line.
    pub fn export_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            let shared: Vec<String> = e.shared().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{} {} shared={}\n", e.a, e.b, shared.join(",")));
        }
        out
    }
}

/// Connect every pair of elements sharing 1 or 2 variables. Padding ids are
/// unique to their element, so they can never appear in a shared set.
pub fn build_graph(partition: &Partition) -> InstanceGraph {
    let elements = partition.elements();
    let n = elements.len();

    // Candidate pairs via shared-variable buckets rather than all pairs.
    let mut by_var: std::collections::BTreeMap<u32, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, e) in elements.iter().enumerate() {
        for v in e.key().vars() {
            by_var.entry(v).or_default().push(i);
        }
    }
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for slots in by_var.values() {
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }

    let mut edges = Vec::with_capacity(pairs.len());
    let mut outgoing = vec![Vec::new(); n];
    for (a, b) in pairs {
        // Distinct keys can share at most 2 variables.
        let mut link = edge_masks(&elements[a].key(), &elements[b].key())
            .expect("co-bucketed elements share 1 or 2 variables");
        link.a = a;
        link.b = b;
        let edge_id = edges.len() as u32;
        outgoing[a].push(edge_id * 2);
        outgoing[b].push(edge_id * 2 + 1);
        edges.push(link);
    }
    InstanceGraph {
        vertex_count: n,
        edges,
        outgoing,
    }
}
