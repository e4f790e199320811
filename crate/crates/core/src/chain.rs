//! Transition kernels and their realization as electric networks.
//!
//! A reversible kernel `P` with stationary law `π` is the walk induced by the
//! network with conductances `C_yz = π_y P(y, z)`.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::network::{Network, VertexId};
use crate::numeric::PROBABILITY_TOLERANCE;

/// Relative detailed-balance tolerance used by [`chain_to_network`].
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-9;

/// A row-stochastic transition kernel over labelled states.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    labels: Vec<VertexId>,
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn new(labels: Vec<VertexId>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidKernel("no states".into()));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel(format!("expected a {n}x{n} matrix")));
        }
        let mut seen = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l, i).is_some() {
                return Err(Error::InvalidKernel(format!("duplicate state label {l}")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidKernel(format!(
                    "row {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::InvalidKernel(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Kernel { labels, rows })
    }

    /// States labelled `"0"`, `"1"`, ... in row order.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..rows.len()).map(VertexId::from).collect();
        Kernel::new(labels, rows)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[VertexId] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, y: usize, z: usize) -> f64 {
        self.rows[y][z]
    }

    /// Largest entrywise difference after matching states by label; `None`
    /// when the label sets differ.
    pub fn max_abs_diff(&self, other: &Kernel) -> Option<f64> {
        if self.n() != other.n() {
            return None;
        }
        let pos: HashMap<&VertexId, usize> = other
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        let map: Option<Vec<usize>> = self.labels.iter().map(|l| pos.get(l).copied()).collect();
        let map = map?;
        let mut worst: f64 = 0.0;
        for (y, row) in self.rows.iter().enumerate() {
            for (z, p) in row.iter().enumerate() {
                worst = worst.max((p - other.rows[map[y]][map[z]]).abs());
            }
        }
        Some(worst)
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let forward = |y: usize, z: usize| self.rows[y][z] > 0.0;
        let backward = |y: usize, z: usize| self.rows[z][y] > 0.0;
        reaches_all(n, forward) && reaches_all(n, backward)
    }

    /// Solves `π P = π`, `Σ π = 1`. Requires irreducibility.
    pub fn stationary(&self) -> Result<Vec<f64>> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = self.n();
        // (P^T - I) π = 0 with the last equation replaced by normalization
        let mut a = Matrix::zeros(n);
        for i in 0..n - 1 {
            for j in 0..n {
                a.set(i, j, self.rows[j][i]);
            }
            a.add(i, i, -1.0);
        }
        for j in 0..n {
            a.set(n - 1, j, 1.0);
        }
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        Ok(Lu::factor(a)?.solve(&rhs))
    }
}

fn reaches_all(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(y) = queue.pop_front() {
        for (z, s) in seen.iter_mut().enumerate() {
            if !*s && edge(y, z) {
                *s = true;
                queue.push_back(z);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Realizes a reversible kernel as a network with `C_yz = scale · π_y P(y,z)`.
///
/// Kernels with mass on the diagonal are rejected because networks carry no
/// self-loops.
pub fn chain_to_network(kernel: &Kernel, scale: f64) -> Result<Network> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let n = kernel.n();
    if let Some(state) = (0..n).find(|&y| kernel.prob(y, y) > 0.0) {
        return Err(Error::HasSelfLoopMass {
            state,
            mass: kernel.prob(state, state),
        });
    }
    if n < 2 {
        return Err(Error::InvalidKernel("need at least two states".into()));
    }
    let pi = kernel.stationary()?;

    let mut edges = Vec::new();
    for y in 0..n {
        for z in y + 1..n {
            let forward = pi[y] * kernel.prob(y, z);
            let backward = pi[z] * kernel.prob(z, y);
            let larger = forward.abs().max(backward.abs());
            if larger == 0.0 {
                continue;
            }
            let residual = (forward - backward).abs() / larger;
            if residual > REVERSIBILITY_TOLERANCE {
                return Err(Error::NotReversible {
                    from: y,
                    to: z,
                    residual,
                });
            }
            edges.push((
                kernel.labels[y].clone(),
                kernel.labels[z].clone(),
                scale * forward,
            ));
        }
    }
    Network::from_edges(edges)
}

impl Network {
    /// The induced walk's kernel, rows built from [`Network::transition_distribution`].
    pub fn transition_kernel(&self) -> Kernel {
        Kernel {
            labels: self.vertices().to_vec(),
            rows: (0..self.n()).map(|i| self.transition_row(i)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_network;

    #[test]
    fn two_state_flip() {
        let k = Kernel::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let net = chain_to_network(&k, 1.0).unwrap();
        assert_eq!(net.m(), 1);
        assert_eq!(net.edges()[0].conductance, 0.5);
        assert_eq!(net.transition_kernel().max_abs_diff(&k), Some(0.0));
    }

    #[test]
    fn triangle_walk() {
        let k = Kernel::from_rows(vec![
            vec![0.0, 0.5, 0.5],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        let net = chain_to_network(&k, 3.0).unwrap();
        let cs: Vec<f64> = net.edges().iter().map(|e| e.conductance).collect();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| (c - 0.5).abs() < 1e-15));
        assert!(net.transition_kernel().max_abs_diff(&k).unwrap() < 1e-12);
    }

    #[test]
    fn cyclic_drift_is_not_reversible() {
        // Kolmogorov cycle 0->1->2->0 vs reverse: 0.9*0.5*0.5 != 0.1*0.5*0.5
        let k = Kernel::from_rows(vec![
            vec![0.0, 0.9, 0.1],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            chain_to_network(&k, 1.0),
            Err(Error::NotReversible { .. })
        ));
    }

    #[test]
    fn reducible_and_lazy_kernels_rejected() {
        let split = Kernel::from_rows(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(
            chain_to_network(&split, 1.0).unwrap_err(),
            Error::NotIrreducible
        );

        let lazy = Kernel::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            chain_to_network(&lazy, 1.0),
            Err(Error::HasSelfLoopMass { state: 0, .. })
        ));
    }

    #[test]
    fn kernel_validation() {
        assert!(Kernel::from_rows(vec![vec![0.0, 0.9], vec![1.0, 0.0]]).is_err());
        assert!(Kernel::from_rows(vec![vec![-0.5, 1.5], vec![1.0, 0.0]]).is_err());
        assert!(Kernel::from_rows(vec![vec![0.0, 1.0]]).is_err());
        assert!(Kernel::new(
            vec!["a".into(), "a".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        )
        .is_err());
    }

    #[test]
    fn stationary_of_weighted_path() {
        let net = build_network([("1", "2", 1.0), ("2", "3", 2.0)]).unwrap();
        let pi = net.transition_kernel().stationary().unwrap();
        let want = [1.0 / 6.0, 0.5, 1.0 / 3.0];
        for (a, b) in pi.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn round_trip_recovers_kernel_up_to_scale() {
        let net = build_network([
            ("p", "q", 0.2),
            ("q", "r", 3.0),
            ("r", "p", 1.1),
            ("r", "s", 4.0),
        ])
        .unwrap();
        let k = net.transition_kernel();
        let rebuilt = chain_to_network(&k, net.total_conductance()).unwrap();
        assert!(rebuilt.transition_kernel().max_abs_diff(&k).unwrap() < 1e-12);
        // π_y P(y,z) = C_yz / C, so scaling by C recovers the original conductances
        for (a, b, c) in net.edge_list() {
            let c2 = rebuilt.conductance_between(&a, &b).unwrap().unwrap();
            assert!((c - c2).abs() < 1e-12 * c.max(1.0));
        }
    }
}
