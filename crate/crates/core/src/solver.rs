//! Exact random-walk quantities from the weighted Laplacian.
//!
//! Every quantity reduces to one grounded system: the Laplacian with the row
//! and column of a ground vertex `g` removed. For a connected network that
//! matrix is symmetric positive definite.
//!
//! * Effective resistance `R(x, g)`: solve `L_g v = e_x`, then `R = v_x`.
//! * Hitting times to `g`: first-step analysis `h(x) = 1 + Σ P(x,z) h(z)`,
//!   multiplied through by `C_x`, is `L_g h = (C_x)_x`.
//! * Return time to `z`: `1 + Σ_y P(z,y) h_z(y)`.
//!
//! None of these use the closed forms `C / C_z` or `C · R`; those are what
//! the solver is checked against.

use std::sync::{Arc, OnceLock};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::network::{Distribution, Network, VertexId};
use crate::numeric::CONDITION_WARNING;
use crate::par::{map_indexed, Execution};

/// Dense weighted Laplacian: `C_y` on the diagonal, `-C_yz` off it.
#[derive(Debug, Clone)]
pub struct Laplacian {
    matrix: Matrix,
}

impl Laplacian {
    pub fn new(net: &Network) -> Self {
        let n = net.n();
        let mut matrix = Matrix::zeros(n);
        for e in net.edges() {
            matrix.add(e.a, e.b, -e.conductance);
            matrix.add(e.b, e.a, -e.conductance);
        }
        for (i, c) in net.vertex_conductances().iter().enumerate() {
            matrix.set(i, i, *c);
        }
        Laplacian { matrix }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Factors the system with vertex `ground` removed.
    pub fn grounded(&self, ground: usize) -> Result<GroundedLaplacian> {
        let n = self.dim();
        let mut reduced = Matrix::zeros(n - 1);
        for i in (0..n).filter(|&i| i != ground) {
            for j in (0..n).filter(|&j| j != ground) {
                reduced.set(shrink(i, ground), shrink(j, ground), self.matrix.get(i, j));
            }
        }
        let lu = Lu::factor(reduced.clone())?;
        let condition = lu.condition_estimate();
        Ok(GroundedLaplacian {
            ground,
            matrix: reduced,
            lu,
            condition,
        })
    }
}

const REFINEMENT_STEPS: usize = 2;

fn shrink(i: usize, ground: usize) -> usize {
    if i > ground {
        i - 1
    } else {
        i
    }
}

/// A factored grounded Laplacian.
#[derive(Debug, Clone)]
pub struct GroundedLaplacian {
    ground: usize,
    matrix: Matrix,
    lu: Lu,
    condition: f64,
}

impl GroundedLaplacian {
    pub fn ground(&self) -> usize {
        self.ground
    }

    /// Solves with full-length vectors: `rhs[ground]` is ignored and the
    /// result is 0 at the ground.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let g = self.ground;
        let reduced: Vec<f64> = rhs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != g)
            .map(|(_, v)| *v)
            .collect();
        let mut x = self.lu.solve(&reduced);
        for _ in 0..REFINEMENT_STEPS {
            let residual = self.matrix.residual(&x, &reduced);
            if residual.iter().all(|r| *r == 0.0) {
                break;
            }
            let dx = self.lu.solve(&residual);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
        }
        x.insert(g, 0.0);
        x
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition.is_nan() || self.condition > CONDITION_WARNING
    }
}

/// A value together with the condition estimate of the system it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conditioned {
    pub value: f64,
    pub condition_estimate: f64,
}

impl Conditioned {
    pub fn is_ill_conditioned(&self) -> bool {
        self.condition_estimate.is_nan() || self.condition_estimate > CONDITION_WARNING
    }
}

/// Expected hitting times `E_x[T_target]` from every vertex `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile {
    target: VertexId,
    labels: Arc<[VertexId]>,
    values: Vec<f64>,
    condition_estimate: f64,
}

impl HittingProfile {
    pub fn target(&self) -> &VertexId {
        &self.target
    }

    pub fn get(&self, x: &VertexId) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == x)
            .map(|i| self.values[i])
    }

    /// Values in network vertex order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition_estimate.is_nan() || self.condition_estimate > CONDITION_WARNING
    }

    /// Largest relative residual of `h(x) = 1 + Σ P(x,z) h(z)` over `x ≠ target`.
    pub fn harmonic_residual(&self, net: &Network) -> f64 {
        let t = net
            .index_of(&self.target)
            .expect("profile belongs to this network");
        (0..net.n())
            .filter(|&x| x != t)
            .map(|x| {
                let cx = net.vertex_conductances()[x];
                let mean: f64 = net
                    .neighbors(x)
                    .iter()
                    .map(|&(z, c)| c / cx * self.values[z])
                    .sum();
                let rhs = 1.0 + mean;
                (self.values[x] - rhs).abs() / 1f64.max(self.values[x].abs()).max(rhs.abs())
            })
            .fold(0.0, f64::max)
    }
}

impl Serialize for HittingProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Values<'a>(&'a HittingProfile);
        impl Serialize for Values<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.values.len()))?;
                for (l, v) in self.0.labels.iter().zip(&self.0.values) {
                    map.serialize_entry(l, v)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("target", &self.target)?;
        map.serialize_entry("values", &Values(self))?;
        map.serialize_entry("ill_conditioned", &self.is_ill_conditioned())?;
        map.end()
    }
}

/// Exact solver over one network, caching one factorization per ground vertex.
///
/// Safe to share between threads; each grounded system is factored at most
/// once.
#[derive(Debug)]
pub struct ExactSolver<'a> {
    net: &'a Network,
    laplacian: Laplacian,
    grounded: Vec<OnceLock<Result<Arc<GroundedLaplacian>>>>,
}

impl<'a> ExactSolver<'a> {
    pub fn new(net: &'a Network) -> Self {
        ExactSolver {
            net,
            laplacian: Laplacian::new(net),
            grounded: (0..net.n()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn network(&self) -> &'a Network {
        self.net
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    /// Factors every grounded system up front.
    pub fn prefactor(&self, exec: Execution) -> Result<()> {
        map_indexed(exec, self.net.n(), |g| self.grounded_at(g).map(|_| ()))
            .into_iter()
            .collect()
    }

    pub fn grounded_at(&self, ground: usize) -> Result<Arc<GroundedLaplacian>> {
        self.grounded[ground]
            .get_or_init(|| self.laplacian.grounded(ground).map(Arc::new))
            .clone()
    }

    pub fn effective_resistance(&self, x: &VertexId, y: &VertexId) -> Result<f64> {
        Ok(self.effective_resistance_conditioned(x, y)?.value)
    }

    pub fn effective_resistance_conditioned(
        &self,
        x: &VertexId,
        y: &VertexId,
    ) -> Result<Conditioned> {
        let (xi, yi) = (self.net.index_of(x)?, self.net.index_of(y)?);
        self.resistance_by_index(xi, yi)
    }

    pub(crate) fn resistance_by_index(&self, x: usize, y: usize) -> Result<Conditioned> {
        let grounded = self.grounded_at(y)?;
        if x == y {
            return Ok(Conditioned {
                value: 0.0,
                condition_estimate: grounded.condition_estimate(),
            });
        }
        let mut rhs = vec![0.0; self.net.n()];
        rhs[x] = 1.0;
        let v = grounded.solve(&rhs);
        Ok(Conditioned {
            value: v[x],
            condition_estimate: grounded.condition_estimate(),
        })
    }

    pub fn hitting_time(&self, target: &VertexId) -> Result<HittingProfile> {
        self.hitting_by_index(self.net.index_of(target)?)
    }

    pub(crate) fn hitting_by_index(&self, target: usize) -> Result<HittingProfile> {
        let grounded = self.grounded_at(target)?;
        let values = grounded.solve(self.net.vertex_conductances());
        Ok(HittingProfile {
            target: self.net.label(target).clone(),
            labels: self.net.labels_arc(),
            values,
            condition_estimate: grounded.condition_estimate(),
        })
    }

    /// `E_x[T_y] + E_y[T_x]` from two hitting solves.
    pub fn commute_time(&self, x: &VertexId, y: &VertexId) -> Result<f64> {
        let (xi, yi) = (self.net.index_of(x)?, self.net.index_of(y)?);
        if xi == yi {
            return Err(Error::SameVertex(x.to_string()));
        }
        self.commute_by_index(xi, yi)
    }

    pub(crate) fn commute_by_index(&self, x: usize, y: usize) -> Result<f64> {
        let to_y = self.hitting_by_index(y)?;
        let to_x = self.hitting_by_index(x)?;
        Ok(to_y.values[x] + to_x.values[y])
    }

    /// `E_z[T_z^+]` by first-step analysis.
    pub fn return_time(&self, z: &VertexId) -> Result<f64> {
        self.return_by_index(self.net.index_of(z)?)
    }

    pub(crate) fn return_by_index(&self, z: usize) -> Result<f64> {
        let h = self.hitting_by_index(z)?;
        let cz = self.net.vertex_conductances()[z];
        let mean: f64 = self
            .net
            .neighbors(z)
            .iter()
            .map(|&(y, c)| c / cz * h.values[y])
            .sum();
        Ok(1.0 + mean)
    }
}

pub fn effective_resistance(net: &Network, x: &VertexId, y: &VertexId) -> Result<f64> {
    ExactSolver::new(net).effective_resistance(x, y)
}

pub fn hitting_time(net: &Network, target: &VertexId) -> Result<HittingProfile> {
    ExactSolver::new(net).hitting_time(target)
}

pub fn commute_time(net: &Network, x: &VertexId, y: &VertexId) -> Result<f64> {
    ExactSolver::new(net).commute_time(x, y)
}

/// Expected return time computed by solving the hitting system; independent
/// of [`return_time_formula`].
pub fn return_time(net: &Network, z: &VertexId) -> Result<f64> {
    ExactSolver::new(net).return_time(z)
}

/// `C / C_z` from the stored conductance sums.
pub fn return_time_formula(net: &Network, z: &VertexId) -> Result<f64> {
    Ok(net.total_conductance() / net.vertex_conductance(z)?)
}

/// `π_z = C_z / C`.
pub fn stationary_distribution(net: &Network) -> Distribution {
    let c = net.total_conductance();
    let weights = net.vertex_conductances().iter().map(|cz| cz / c).collect();
    Distribution::from_parts(net.labels_arc(), weights)
}
