//! Small named networks and a seeded generator of random connected networks,
//! used by the test suites, benches and examples.

use crate::monte_carlo::WalkRng;
use crate::network::{build_network, Network};

pub fn k2() -> Network {
    build_network([("a", "b", 1.0)]).unwrap()
}

pub fn triangle() -> Network {
    build_network([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]).unwrap()
}

/// Unit path `a - b - c`.
pub fn unit_path() -> Network {
    build_network([("a", "b", 1.0), ("b", "c", 1.0)]).unwrap()
}

/// Path `1 - 2 - 3` with conductances 1 and 2.
pub fn weighted_path() -> Network {
    build_network([("1", "2", 1.0), ("2", "3", 2.0)]).unwrap()
}

/// Unit complete graph on `0..n`.
pub fn complete(n: usize) -> Network {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)));
    build_network(edges).unwrap()
}

/// Unit star with `leaves` leaves around `"hub"`.
pub fn star(leaves: usize) -> Network {
    build_network((0..leaves).map(|i| ("hub".to_string(), format!("leaf{i}"), 1.0))).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conductances {
    Unit,
    Uniform { low: f64, high: f64 },
}

/// Shape of a random network: vertex count uniform in `[min_n, max_n]`,
/// a random spanning tree, then each remaining pair added with a
/// per-network density drawn uniformly from `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetworks {
    pub min_n: usize,
    pub max_n: usize,
    pub conductances: Conductances,
}

impl Default for RandomNetworks {
    fn default() -> Self {
        RandomNetworks {
            min_n: 2,
            max_n: 12,
            conductances: Conductances::Uniform {
                low: 0.1,
                high: 10.0,
            },
        }
    }
}

fn below(rng: &mut WalkRng, n: usize) -> usize {
    ((rng.next_unit() * n as f64) as usize).min(n - 1)
}

impl RandomNetworks {
    pub fn unit() -> Self {
        RandomNetworks {
            conductances: Conductances::Unit,
            ..Default::default()
        }
    }

    pub fn with_size(mut self, min_n: usize, max_n: usize) -> Self {
        assert!(2 <= min_n && min_n <= max_n);
        self.min_n = min_n;
        self.max_n = max_n;
        self
    }

    #[allow(clippy::needless_range_loop)]
    pub fn sample(&self, rng: &mut WalkRng) -> Network {
        let n = self.min_n + below(rng, self.max_n - self.min_n + 1);
        let density = rng.next_unit();
        let conductance = |rng: &mut WalkRng| match self.conductances {
            Conductances::Unit => 1.0,
            Conductances::Uniform { low, high } => low + (high - low) * rng.next_unit(),
        };
        let mut adjacent = vec![vec![false; n]; n];
        let mut edges = Vec::new();
        for i in 1..n {
            let j = below(rng, i);
            adjacent[i][j] = true;
            adjacent[j][i] = true;
            edges.push((format!("v{j}"), format!("v{i}"), conductance(rng)));
        }
        for i in 0..n {
            for j in i + 1..n {
                if !adjacent[i][j] && rng.next_unit() < density {
                    edges.push((format!("v{i}"), format!("v{j}"), conductance(rng)));
                }
            }
        }
        build_network(edges).expect("spanning tree keeps the network connected")
    }

    /// `count` networks; network `i` is drawn from stream `i` of `seed`.
    pub fn suite(&self, seed: u64, count: usize) -> Vec<Network> {
        (0..count)
            .map(|i| self.sample(&mut WalkRng::for_trial(seed, i as u64)))
            .collect()
    }
}
