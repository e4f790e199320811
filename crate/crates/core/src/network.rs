//! Weighted networks: vertices, edge conductances and the walk they induce.
//!
//! Vertex labels are opaque. Each label is assigned a dense index in order of
//! first appearance in the edge list, and every matrix or vector produced by
//! this crate is laid out in that order.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::PROBABILITY_TOLERANCE;

/// Opaque vertex label, unique within a network.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(label: impl Into<String>) -> Self {
        VertexId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl From<&VertexId> for VertexId {
    fn from(v: &VertexId) -> Self {
        v.clone()
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i.to_string())
    }
}

/// An undirected edge between two vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub conductance: f64,
}

/// A finite connected network with positive edge conductances.
///
/// Immutable once built; every derived quantity (vertex conductances, the
/// total conductance, the cumulative sampling tables) is computed up front.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    labels: Arc<[VertexId]>,
    index: HashMap<VertexId, usize>,
    edges: Vec<Edge>,
    // (neighbor, conductance) in order of first appearance
    adjacency: Vec<Vec<(usize, f64)>>,
    cumulative: Vec<Vec<f64>>,
    vertex_conductance: Vec<f64>,
    total_conductance: f64,
}

/// Builds a network from `(y, z, C_yz)` triples.
///
/// Repeated vertex pairs are merged by adding their conductances.
pub fn build_network<I, A, B>(edges: I) -> Result<Network>
where
    I: IntoIterator<Item = (A, B, f64)>,
    A: Into<VertexId>,
    B: Into<VertexId>,
{
    Network::from_edges(edges)
}

impl Network {
    pub fn from_edges<I, A, B>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B, f64)>,
        A: Into<VertexId>,
        B: Into<VertexId>,
    {
        let mut labels: Vec<VertexId> = Vec::new();
        let mut index: HashMap<VertexId, usize> = HashMap::new();
        let mut merged: Vec<Edge> = Vec::new();
        let mut pair_slot: HashMap<(usize, usize), usize> = HashMap::new();

        let mut intern = |v: VertexId, labels: &mut Vec<VertexId>| -> usize {
            *index.entry(v.clone()).or_insert_with(|| {
                labels.push(v);
                labels.len() - 1
            })
        };

        for (y, z, c) in edges {
            let (y, z) = (y.into(), z.into());
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonPositiveConductance {
                    from: y.0,
                    to: z.0,
                    conductance: c,
                });
            }
            if y == z {
                return Err(Error::SelfLoop(y.0));
            }
            let a = intern(y, &mut labels);
            let b = intern(z, &mut labels);
            let key = (a.min(b), a.max(b));
            match pair_slot.get(&key) {
                Some(&slot) => merged[slot].conductance += c,
                None => {
                    pair_slot.insert(key, merged.len());
                    merged.push(Edge {
                        a,
                        b,
                        conductance: c,
                    });
                }
            }
        }
        if merged.is_empty() {
            return Err(Error::EmptyEdgeList);
        }

        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for e in &merged {
            adjacency[e.a].push((e.b, e.conductance));
            adjacency[e.b].push((e.a, e.conductance));
        }

        let reached = reachable_count(&adjacency);
        if reached != n {
            return Err(Error::Disconnected { reached, total: n });
        }

        let cumulative: Vec<Vec<f64>> = adjacency
            .iter()
            .map(|nbrs| {
                nbrs.iter()
                    .scan(0.0, |acc, &(_, c)| {
                        *acc += c;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        let vertex_conductance: Vec<f64> = adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, c)| c).sum())
            .collect();
        let total_conductance = vertex_conductance.iter().sum();

        Ok(Network {
            labels: labels.into(),
            index,
            edges: merged,
            adjacency,
            cumulative,
            vertex_conductance,
            total_conductance,
        })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of (merged) edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge list as labelled triples, in build order.
    pub fn edge_list(&self) -> Vec<(VertexId, VertexId, f64)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.labels[e.a].clone(),
                    self.labels[e.b].clone(),
                    e.conductance,
                )
            })
            .collect()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    pub fn index_of(&self, v: &VertexId) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(v.0.clone()))
    }

    pub fn label(&self, i: usize) -> &VertexId {
        &self.labels[i]
    }

    pub(crate) fn labels_arc(&self) -> Arc<[VertexId]> {
        Arc::clone(&self.labels)
    }

    /// `(neighbor index, C_yz)` pairs for vertex index `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Running sums of neighbor conductances, aligned with [`Network::neighbors`].
    pub fn cumulative_conductance(&self, i: usize) -> &[f64] {
        &self.cumulative[i]
    }

    /// `C_z`, the sum of conductances incident to `z`.
    pub fn vertex_conductance(&self, z: &VertexId) -> Result<f64> {
        Ok(self.vertex_conductance[self.index_of(z)?])
    }

    pub fn vertex_conductances(&self) -> &[f64] {
        &self.vertex_conductance
    }

    /// `C`, the sum of all vertex conductances (twice the edge total).
    pub fn total_conductance(&self) -> f64 {
        self.total_conductance
    }

    pub fn degree(&self, z: &VertexId) -> Result<usize> {
        Ok(self.adjacency[self.index_of(z)?].len())
    }

    pub fn conductance_between(&self, y: &VertexId, z: &VertexId) -> Result<Option<f64>> {
        let (a, b) = (self.index_of(y)?, self.index_of(z)?);
        Ok(self.adjacency[a]
            .iter()
            .find(|&&(w, _)| w == b)
            .map(|&(_, c)| c))
    }

    /// True when every edge has conductance exactly 1 (the simple walk).
    pub fn is_unit_conductance(&self) -> bool {
        self.edges.iter().all(|e| e.conductance == 1.0)
    }

    /// Copy of this network with the `{y, z}` conductance replaced by `c`,
    /// adding the edge if absent. Vertex order is preserved.
    pub fn with_edge_conductance(&self, y: &VertexId, z: &VertexId, c: f64) -> Result<Network> {
        let (a, b) = (self.index_of(y)?, self.index_of(z)?);
        let key = (a.min(b), a.max(b));
        let mut found = false;
        let mut list = self.edge_list();
        for (e, triple) in self.edges.iter().zip(list.iter_mut()) {
            if (e.a.min(e.b), e.a.max(e.b)) == key {
                triple.2 = c;
                found = true;
            }
        }
        if !found {
            list.push((y.clone(), z.clone(), c));
        }
        Network::from_edges(list)
    }

    /// The transition row out of `y`: `C_yz / C_y` on each neighbor `z`.
    pub fn transition_distribution(&self, y: &VertexId) -> Result<Distribution> {
        let i = self.index_of(y)?;
        Ok(Distribution::from_parts(
            self.labels_arc(),
            self.transition_row(i),
        ))
    }

    pub(crate) fn transition_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.n()];
        let cy = self.vertex_conductance[i];
        for &(z, c) in &self.adjacency[i] {
            row[z] = c / cy;
        }
        row
    }
}

fn reachable_count(adjacency: &[Vec<(usize, f64)>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}

/// A probability vector over the vertices of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    labels: Arc<[VertexId]>,
    weights: Vec<f64>,
}

impl Distribution {
    /// Checks that weights are nonnegative and sum to 1 within `1e-12`.
    pub fn new(labels: Vec<VertexId>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let d = Distribution::from_parts(labels.into(), weights);
        if !d.is_normalized() {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {}, not 1",
                d.total()
            )));
        }
        Ok(d)
    }

    pub(crate) fn from_parts(labels: Arc<[VertexId]>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), weights.len());
        Distribution { labels, weights }
    }

    pub fn get(&self, v: &VertexId) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == v)
            .map(|i| self.weights[i])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[VertexId] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, f64)> + '_ {
        self.labels.iter().zip(self.weights.iter().copied())
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= PROBABILITY_TOLERANCE
    }
}

impl Serialize for Distribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.weights.len()))?;
        for (l, w) in self.iter() {
            map.serialize_entry(l, &w)?;
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> VertexId {
        VertexId::from(s)
    }

    #[test]
    fn single_edge() {
        let net = build_network([("a", "b", 1.0)]).unwrap();
        assert_eq!((net.n(), net.m()), (2, 1));
        assert_eq!(net.vertex_conductance(&v("a")).unwrap(), 1.0);
        assert_eq!(net.vertex_conductance(&v("b")).unwrap(), 1.0);
        assert_eq!(net.total_conductance(), 2.0);
    }

    #[test]
    fn unit_triangle() {
        let net = build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap();
        assert_eq!((net.n(), net.m()), (3, 3));
        for z in ["a", "b", "c"] {
            assert_eq!(net.vertex_conductance(&v(z)).unwrap(), 2.0);
            assert_eq!(net.degree(&v(z)).unwrap(), 2);
        }
        assert_eq!(net.total_conductance(), 6.0);
        assert!(net.is_unit_conductance());
    }

    #[test]
    fn weighted_path_sums() {
        let net = build_network([("1", "2", 1.0), ("2", "3", 2.0)]).unwrap();
        assert_eq!(net.vertex_conductances(), &[1.0, 3.0, 2.0]);
        assert_eq!(net.total_conductance(), 6.0);
        assert!(!net.is_unit_conductance());
    }

    #[test]
    fn rejects_disconnected() {
        let err = build_network([("a", "b", 1.0), ("c", "d", 1.0)]).unwrap_err();
        assert_eq!(
            err,
            Error::Disconnected {
                reached: 2,
                total: 4
            }
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_network([("a", "a", 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        for c in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                build_network([("a", "b", c)]),
                Err(Error::NonPositiveConductance { .. })
            ));
        }
        let empty: [(&str, &str, f64); 0] = [];
        assert_eq!(build_network(empty).unwrap_err(), Error::EmptyEdgeList);
    }

    #[test]
    fn parallel_edges_add() {
        let net = build_network([("a", "b", 1.0), ("b", "a", 2.5), ("b", "c", 1.0)]).unwrap();
        assert_eq!(net.m(), 2);
        assert_eq!(
            net.conductance_between(&v("a"), &v("b")).unwrap(),
            Some(3.5)
        );
        assert_eq!(net.total_conductance(), 9.0);
    }

    #[test]
    fn index_follows_first_appearance() {
        let net = build_network([("q", "p", 1.0), ("r", "p", 1.0)]).unwrap();
        let order: Vec<&str> = net.vertices().iter().map(|l| l.as_str()).collect();
        assert_eq!(order, ["q", "p", "r"]);
    }

    #[test]
    fn transition_rows() {
        let k2 = build_network([("a", "b", 1.0)]).unwrap();
        let row = k2.transition_distribution(&v("a")).unwrap();
        assert_eq!(row.get(&v("b")), Some(1.0));
        assert_eq!(row.get(&v("a")), Some(0.0));

        let path = build_network([("1", "2", 1.0), ("2", "3", 2.0)]).unwrap();
        let row = path.transition_distribution(&v("2")).unwrap();
        assert_eq!(row.weights(), &[1.0 / 3.0, 0.0, 2.0 / 3.0]);
        assert!(row.is_normalized());

        let tri = build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap();
        let row = tri.transition_distribution(&v("a")).unwrap();
        assert_eq!(row.weights(), &[0.0, 0.5, 0.5]);

        assert_eq!(
            tri.transition_distribution(&v("zz")).unwrap_err(),
            Error::UnknownVertex("zz".into())
        );
    }

    #[test]
    fn with_edge_conductance_replaces_or_adds() {
        let path = build_network([("1", "2", 1.0), ("2", "3", 2.0)]).unwrap();
        let stiffer = path.with_edge_conductance(&v("3"), &v("2"), 5.0).unwrap();
        assert_eq!(
            stiffer.conductance_between(&v("2"), &v("3")).unwrap(),
            Some(5.0)
        );
        assert_eq!(stiffer.vertices(), path.vertices());
        let closed = path.with_edge_conductance(&v("1"), &v("3"), 1.0).unwrap();
        assert_eq!(closed.m(), 3);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![v("a"), v("b")], vec![0.25, 0.75]).is_ok());
        assert!(Distribution::new(vec![v("a"), v("b")], vec![0.25, 0.7]).is_err());
        assert!(Distribution::new(vec![v("a"), v("b")], vec![-0.25, 1.25]).is_err());
        assert!(Distribution::new(vec![v("a")], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn distribution_serializes_in_vertex_order() {
        let net = build_network([("z", "y", 1.0), ("y", "x", 3.0)]).unwrap();
        let row = net.transition_distribution(&v("y")).unwrap();
        let json = serde_json::to_string(&row).unwrap();
        assert_eq!(json, r#"{"z":0.25,"y":0.0,"x":0.75}"#);
    }
}
