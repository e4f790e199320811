//! Attaching a pendant vertex: a fresh vertex joined to an anchor by a
//! single edge.

use crate::error::{Error, Result};
use crate::network::{Network, VertexId};

/// A network plus one pendant vertex hanging off `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedNetwork {
    base: Network,
    augmented: Network,
    anchor: VertexId,
    pendant: VertexId,
    pendant_conductance: f64,
}

/// Attaches a fresh pendant vertex to `anchor` with conductance `c`.
///
/// The pendant label is `"<anchor>~pendant"`, suffixed with a counter if that
/// label is already taken.
pub fn attach_pendant(net: &Network, anchor: &VertexId, c: f64) -> Result<AugmentedNetwork> {
    net.index_of(anchor)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::NonPositiveConductance {
            from: anchor.to_string(),
            to: "<pendant>".into(),
            conductance: c,
        });
    }
    let pendant = fresh_label(net, anchor);
    let mut edges = net.edge_list();
    edges.push((anchor.clone(), pendant.clone(), c));
    let augmented = Network::from_edges(edges)?;
    Ok(AugmentedNetwork {
        base: net.clone(),
        augmented,
        anchor: anchor.clone(),
        pendant,
        pendant_conductance: c,
    })
}

fn fresh_label(net: &Network, anchor: &VertexId) -> VertexId {
    let stem = format!("{anchor}~pendant");
    let mut candidate = VertexId::new(stem.clone());
    let mut k = 1u64;
    while net.contains(&candidate) {
        candidate = VertexId::new(format!("{stem}{k}"));
        k += 1;
    }
    candidate
}

impl AugmentedNetwork {
    pub fn base(&self) -> &Network {
        &self.base
    }

    /// The combined network including the pendant.
    pub fn network(&self) -> &Network {
        &self.augmented
    }

    pub fn anchor(&self) -> &VertexId {
        &self.anchor
    }

    pub fn pendant(&self) -> &VertexId {
        &self.pendant
    }

    pub fn pendant_conductance(&self) -> f64 {
        self.pendant_conductance
    }

    /// Rebuilds the network with the pendant removed.
    pub fn strip_pendant(&self) -> Result<Network> {
        let pi = self.augmented.index_of(&self.pendant)?;
        let edges = self
            .augmented
            .edges()
            .iter()
            .filter(|e| e.a != pi && e.b != pi)
            .map(|e| {
                (
                    self.augmented.label(e.a).clone(),
                    self.augmented.label(e.b).clone(),
                    e.conductance,
                )
            });
        Network::from_edges(edges)
    }
}
