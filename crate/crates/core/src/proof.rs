//! Step-by-step replay of the pendant-vertex argument for `E_z[T_z^+] = C / C_z`.
//!
//! Given a network and a vertex `z`, a unit pendant `z~` is attached to `z`
//! and each link of the argument is evaluated twice: once from its closed
//! form and once by an independent exact solve. The chain is
//!
//! 1. `pendant-first-step`: `E_z~[T_z] = 1`
//! 2. `pendant-resistance`: `R(z, z~) = 1`
//! 3. `commute-identity`: `E_z~[T_z] + E_z[T_z~] = C~ · R(z, z~)`
//! 4. `total-time`: `E_z[T_z~] = C + 1`
//! 5. `decomposition`: `E_z[T_z~] = C_z · E_z[T_z^+] + 1`
//! 6. `conclusion`: `E_z[T_z^+] = C / C_z`
//!
//! In step 5 the return time comes from first-step analysis on the original
//! network, never from the closed form, so step 6 is not circular.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::monte_carlo::{
    estimate_excursions, estimate_hitting_time, estimate_return_time, Estimate, SimParams,
};
use crate::network::{Network, VertexId};
use crate::numeric::{relative_error, DEFAULT_TOLERANCE};
use crate::par::{map_indexed, Execution};
use crate::pendant::attach_pendant;
use crate::solver::{return_time_formula, ExactSolver};

/// Simulated values must land within this many standard errors.
pub const SIMULATION_BAND: f64 = 4.0;

pub const STEP_NAMES: [&str; 6] = [
    "pendant-first-step",
    "pendant-resistance",
    "commute-identity",
    "total-time",
    "decomposition",
    "conclusion",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub n: usize,
    pub m: usize,
    pub total_conductance: f64,
}

impl NetworkSummary {
    pub fn of(net: &Network) -> Self {
        NetworkSummary {
            n: net.n(),
            m: net.m(),
            total_conductance: net.total_conductance(),
        }
    }
}

/// A Monte Carlo estimate compared against an exact reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationCheck {
    pub reference: f64,
    pub estimate: Estimate,
    pub within_band: bool,
}

impl SimulationCheck {
    fn new(reference: f64, estimate: Estimate) -> Self {
        SimulationCheck {
            reference,
            estimate,
            within_band: estimate.within(reference, SIMULATION_BAND),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofStep {
    pub name: &'static str,
    pub expected: f64,
    pub computed: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationCheck>,
}

impl ProofStep {
    fn new(name: &'static str, expected: f64, computed: f64, tolerance: f64) -> Self {
        let rel_err = relative_error(expected, computed);
        ProofStep {
            name,
            expected,
            computed,
            abs_err: (expected - computed).abs(),
            rel_err,
            pass: rel_err <= tolerance,
            simulation: None,
        }
    }

    fn with_simulation(mut self, check: SimulationCheck) -> Self {
        self.pass &= check.within_band;
        self.simulation = Some(check);
        self
    }
}

/// Record of one replay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofTrace {
    pub network: NetworkSummary,
    pub anchor: VertexId,
    pub pendant_conductance: f64,
    pub steps: Vec<ProofStep>,
    pub verdict: bool,
}

impl ProofTrace {
    pub fn step(&self, name: &str) -> Option<&ProofStep> {
        self.steps.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayOptions {
    pub tolerance: f64,
    /// When set, steps 4 to 6 also carry simulated estimates.
    pub simulate: Option<SimParams>,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            tolerance: DEFAULT_TOLERANCE,
            simulate: None,
        }
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance.is_finite() && tolerance > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tolerance}"
        )))
    }
}

/// Replays the argument on `net` at vertex `z`.
///
/// A step passes when its relative error is within `tolerance` and, if
/// simulated, its estimate lies within [`SIMULATION_BAND`] standard errors.
pub fn replay(net: &Network, z: &VertexId, options: &ReplayOptions) -> Result<ProofTrace> {
    check_tolerance(options.tolerance)?;
    let tol = options.tolerance;
    let aug = attach_pendant(net, z, 1.0)?;
    let g = aug.network();
    let pendant = aug.pendant();

    let tilde = ExactSolver::new(g);
    let to_anchor = tilde.hitting_time(z)?;
    let to_pendant = tilde.hitting_time(pendant)?;
    let from_pendant = to_anchor.get(pendant).expect("pendant in profile");
    let from_anchor = to_pendant.get(z).expect("anchor in profile");
    let resistance = tilde.effective_resistance(z, pendant)?;

    let c = net.total_conductance();
    let cz = net.vertex_conductance(z)?;
    let first_step_return = ExactSolver::new(net).return_time(z)?;
    let formula = return_time_formula(net, z)?;

    let mut steps = vec![
        ProofStep::new(STEP_NAMES[0], 1.0, from_pendant, tol),
        ProofStep::new(STEP_NAMES[1], 1.0, resistance, tol),
        ProofStep::new(
            STEP_NAMES[2],
            g.total_conductance() * resistance,
            from_pendant + from_anchor,
            tol,
        ),
        ProofStep::new(STEP_NAMES[3], c + 1.0, from_anchor, tol),
        ProofStep::new(
            STEP_NAMES[4],
            cz * first_step_return + 1.0,
            from_anchor,
            tol,
        ),
        ProofStep::new(STEP_NAMES[5], formula, first_step_return, tol),
    ];

    if let Some(params) = &options.simulate {
        let total = estimate_hitting_time(g, z, pendant, params)?;
        let excursions = estimate_excursions(&aug, params)?.estimate;
        let ret = estimate_return_time(net, z, params)?;
        steps[3] = steps[3]
            .clone()
            .with_simulation(SimulationCheck::new(c + 1.0, total));
        steps[4] = steps[4]
            .clone()
            .with_simulation(SimulationCheck::new(cz, excursions));
        steps[5] = steps[5]
            .clone()
            .with_simulation(SimulationCheck::new(formula, ret));
    }

    let verdict = steps.iter().all(|s| s.pass);
    Ok(ProofTrace {
        network: NetworkSummary::of(net),
        anchor: z.clone(),
        pendant_conductance: aug.pendant_conductance(),
        steps,
        verdict,
    })
}

/// Worst-case agreement over one family of identities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyResult {
    pub name: &'static str,
    pub checks: usize,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnTimeRow {
    pub vertex: VertexId,
    pub first_step: f64,
    pub formula: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub network: NetworkSummary,
    pub tolerance: f64,
    pub return_times: Vec<ReturnTimeRow>,
    pub families: Vec<FamilyResult>,
    pub pass: bool,
}

impl TheoremReport {
    pub fn family(&self, name: &str) -> Option<&FamilyResult> {
        self.families.iter().find(|f| f.name == name)
    }
}

fn family(
    name: &'static str,
    errors: impl IntoIterator<Item = f64>,
    tolerance: f64,
) -> FamilyResult {
    let (checks, max_rel_err) = errors.into_iter().fold((0, 0.0f64), |(n, m), e| {
        (n + 1, if e.is_nan() { f64::NAN } else { m.max(e) })
    });
    FamilyResult {
        name,
        checks,
        max_rel_err,
        pass: max_rel_err <= tolerance,
    }
}

/// Checks, over a whole network:
///
/// * `return-time`: first-step return time against `C / C_z` at every vertex;
/// * `commute-time`: `E_x[T_y] + E_y[T_x]` against `C · R(x, y)` for every pair;
/// * `unit-return-time`: with unit conductances only, against `2m / deg(z)`.
pub fn verify_theorems(net: &Network, tolerance: f64, exec: Execution) -> Result<TheoremReport> {
    check_tolerance(tolerance)?;
    let n = net.n();
    let solver = ExactSolver::new(net);
    solver.prefactor(exec)?;

    let returns: Vec<f64> = map_indexed(exec, n, |z| solver.return_by_index(z))
        .into_iter()
        .collect::<Result<_>>()?;
    let hitting = map_indexed(exec, n, |t| solver.hitting_by_index(t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let c = net.total_conductance();
    let rows: Vec<ReturnTimeRow> = (0..n)
        .map(|z| ReturnTimeRow {
            vertex: net.label(z).clone(),
            first_step: returns[z],
            formula: c / net.vertex_conductances()[z],
        })
        .collect();

    let pair_errors: Vec<Vec<f64>> = map_indexed(exec, n, |x| {
        (x + 1..n)
            .map(|y| {
                let commute = hitting[y].values()[x] + hitting[x].values()[y];
                let r = solver.resistance_by_index(x, y)?.value;
                Ok(relative_error(commute, c * r))
            })
            .collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut families = vec![
        family(
            "return-time",
            rows.iter().map(|r| relative_error(r.first_step, r.formula)),
            tolerance,
        ),
        family("commute-time", pair_errors.into_iter().flatten(), tolerance),
    ];
    if net.is_unit_conductance() {
        let two_m = 2.0 * net.m() as f64;
        families.push(family(
            "unit-return-time",
            (0..n).map(|z| relative_error(returns[z], two_m / net.neighbors(z).len() as f64)),
            tolerance,
        ));
    }
    let pass = families.iter().all(|f| f.pass);
    Ok(TheoremReport {
        network: NetworkSummary::of(net),
        tolerance,
        return_times: rows,
        families,
        pass,
    })
}

/// Result of [`generalized_pendant_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendantCheck {
    pub anchor: VertexId,
    pub pendant_conductance: f64,
    /// `C / c + 1`.
    pub expected: f64,
    /// `E_z[T_z~]` from an exact hitting solve on the augmented network.
    pub computed: f64,
    pub rel_err: f64,
    pub pass: bool,
    /// Excursion count against `C_z / c`, when simulated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excursions: Option<SimulationCheck>,
}

/// Checks `E_z[T_z~] = C / c + 1` for a pendant of conductance `c`.
pub fn generalized_pendant_check(
    net: &Network,
    z: &VertexId,
    c: f64,
    tolerance: f64,
    simulate: Option<&SimParams>,
) -> Result<PendantCheck> {
    check_tolerance(tolerance)?;
    let aug = attach_pendant(net, z, c)?;
    let computed = ExactSolver::new(aug.network())
        .hitting_time(aug.pendant())?
        .get(z)
        .expect("anchor in profile");
    let expected = net.total_conductance() / c + 1.0;
    let rel_err = relative_error(expected, computed);
    let mut pass = rel_err <= tolerance;
    let excursions = match simulate {
        Some(params) => {
            let reference = net.vertex_conductance(z)? / c;
            let check =
                SimulationCheck::new(reference, estimate_excursions(&aug, params)?.estimate);
            pass &= check.within_band;
            Some(check)
        }
        None => None,
    };
    Ok(PendantCheck {
        anchor: z.clone(),
        pendant_conductance: c,
        expected,
        computed,
        rel_err,
        pass,
        excursions,
    })
}
