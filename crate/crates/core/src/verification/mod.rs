//! Executable checks of the derivation: eigen-equation residuals, the
//! coupled ODE system, identity suites, the Jacobi–Anger oracle and the
//! weak-form plane-wave reconstruction.
//!
//! Every check returns a [`VerificationReport`] carrying the largest error
//! seen (never a mean) together with the grid and normalization used.

mod expansion;
mod identities;
mod jet2;
mod residuals;
mod structure;

pub use expansion::{blowup_probe, jacobi_anger_partial_sum, jacobi_anger_residual, marginal_check, reconstruction_check, ReconstructionInput};
pub use identities::{
    delta_identity_check, floor_identity_rhs, identity_parts, identity_suite, CaseLedger, CaseRow, DeltaSystem,
    QuadrantRow, PRINTED_TABLE,
};
pub use jet2::Jet2;
pub use structure::{chart_integrity, connection_by_jets, connection_transport, fedosov_moyal, hermiticity, printed_connection};
pub use residuals::{
    derived_operators, ode_residuals_b1b2, operator_comparison, pde_residuals, reference_operators, w_jet, OperatorSet,
    ResidualGrid, ResidualSystem,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::formal_weyl::WeylError;
use crate::numerics::NumericsError;
use crate::wigner::WignerError;

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error("grid touches the singular locus: {0}")]
    SingularGrid(String),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("pairing did not converge: {0}")]
    NonConvergent(String),
    #[error("derivative of order above two requested")]
    JetOrder,
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Wigner(#[from] WignerError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub status: Status,
    pub max_error: f64,
    pub tolerance: f64,
    pub params: Value,
    pub seconds: f64,
}

impl VerificationReport {
    /// Status is derived, never passed in: pass iff `max_error ≤ tolerance`
    /// (a NaN error fails).
    pub fn new(id: impl Into<String>, max_error: f64, tolerance: f64, params: Value) -> Self {
        let status = if max_error <= tolerance { Status::Pass } else { Status::Fail };
        VerificationReport { id: id.into(), status, max_error, tolerance, params, seconds: 0.0 }
    }

    pub fn skipped(id: impl Into<String>, reason: &str) -> Self {
        VerificationReport {
            id: id.into(),
            status: Status::Skipped,
            max_error: 0.0,
            tolerance: 0.0,
            params: json!({ "reason": reason }),
            seconds: 0.0,
        }
    }

    /// One report standing for several with their own tolerances: the error
    /// is the worst ratio `error / tolerance`, compared against 1. A part
    /// with zero tolerance contributes 0 when exact and infinity otherwise.
    pub fn combine(id: impl Into<String>, parts: Vec<VerificationReport>) -> Self {
        let ratio = |r: &VerificationReport| {
            if r.status == Status::Skipped {
                0.0
            } else if r.tolerance > 0.0 {
                r.max_error / r.tolerance
            } else if r.max_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let worst = parts.iter().map(ratio).fold(0.0, |a: f64, b| if b.is_nan() { b } else { a.max(b) });
        let seconds = parts.iter().map(|p| p.seconds).sum();
        let mut r = VerificationReport::new(id, worst, 1.0, json!({ "parts": parts }));
        r.seconds = seconds;
        r
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.seconds = start.elapsed().as_secs_f64();
        self
    }

    /// The named sub-report of a combined report.
    pub fn part(&self, id: &str) -> Option<VerificationReport> {
        self.params
            .get("parts")?
            .as_array()?
            .iter()
            .filter_map(|v| serde_json::from_value::<VerificationReport>(v.clone()).ok())
            .find(|r| r.id == id)
    }
}

/// The checks `run_report` knows about, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Check {
    ConnectionTransport,
    FedosovMoyal,
    OperatorDerivation,
    PdeReduced,
    PdeFull,
    PdeCross,
    OdeB1B2,
    IdentitySuite,
    JacobiAnger,
    Reconstruction,
    Blowup,
    Marginal,
    Hermiticity,
    ChartIntegrity,
}

impl Check {
    pub const ALL: [Check; 14] = [
        Check::ConnectionTransport,
        Check::FedosovMoyal,
        Check::OperatorDerivation,
        Check::PdeReduced,
        Check::PdeFull,
        Check::PdeCross,
        Check::OdeB1B2,
        Check::Marginal,
        Check::Hermiticity,
        Check::IdentitySuite,
        Check::JacobiAnger,
        Check::Reconstruction,
        Check::Blowup,
        Check::ChartIntegrity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ConnectionTransport => "connection_transport",
            Check::FedosovMoyal => "fedosov_moyal",
            Check::OperatorDerivation => "operator_derivation",
            Check::PdeReduced => "pde_reduced",
            Check::PdeFull => "pde_full",
            Check::PdeCross => "pde_cross",
            Check::OdeB1B2 => "ode_b1b2",
            Check::IdentitySuite => "identity_suite",
            Check::JacobiAnger => "jacobi_anger",
            Check::Reconstruction => "reconstruction",
            Check::Blowup => "blowup_probe",
            Check::Marginal => "marginal",
            Check::Hermiticity => "hermiticity",
            Check::ChartIntegrity => "chart_integrity",
        }
    }

    pub fn by_name(name: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn run(self, seed: u64) -> VerificationReport {
        let start = Instant::now();
        let outcome = match self {
            Check::ConnectionTransport => connection_transport(seed, 100),
            Check::FedosovMoyal => fedosov_moyal(seed, 200, 4, 4),
            Check::OperatorDerivation => operator_comparison(),
            Check::PdeReduced => pde_default_suite(ResidualSystem::Reduced),
            Check::PdeFull => pde_default_suite(ResidualSystem::Full),
            Check::PdeCross => pde_default_suite(ResidualSystem::Cross),
            Check::OdeB1B2 => ode_default_suite(seed),
            Check::IdentitySuite => Ok(identity_suite(seed)),
            Check::JacobiAnger => Ok(jacobi_anger_residual(10.0, 40)),
            Check::Reconstruction => reconstruction_check(&ReconstructionInput::default()),
            Check::Blowup => Ok(blowup_probe(1.0, 2.0)),
            Check::Marginal => marginal_check(&[0.0, 1.0, 2.0, 5.0], &[1.0 / 3.0, 0.5, 0.75]),
            Check::Hermiticity => hermiticity(seed, 1000),
            Check::ChartIntegrity => chart_integrity(seed, 100),
        };
        match outcome {
            Ok(mut r) => {
                r.id = self.name().to_string();
                r.timed(start)
            }
            Err(e) => VerificationReport::new(self.name(), f64::NAN, 0.0, json!({ "error": e.to_string() })).timed(start),
        }
    }
}

fn pde_default_suite(system: ResidualSystem) -> Result<VerificationReport, VerificationError> {
    use crate::charts::PhysParams;
    use crate::wigner::EigenLabels;
    let p = PhysParams::natural();
    let grid = ResidualGrid::default();
    let labels: Vec<EigenLabels> = match system {
        ResidualSystem::Cross => vec![
            EigenLabels::cross(1.0, 2.0, -1.0, 0.4)?,
            EigenLabels::cross(1.0, 0.0, 3.0, -1.1)?,
            EigenLabels::cross(1.0, 1.0, 1.0, 0.0)?,
            EigenLabels::cross(2.5, -2.0, 5.0, 2.0)?,
        ],
        _ => {
            let mut v: Vec<EigenLabels> = [0.0, 1.0, -1.0, 5.0].iter().map(|&m| EigenLabels::new(1.0, m)).collect::<Result<_, _>>()?;
            v.push(EigenLabels::new(1.0, 1.0)?.with_offset(std::f64::consts::PI));
            v
        }
    };
    let parts = labels
        .par_iter()
        .map(|l| pde_residuals(l, &p, system, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VerificationReport::combine(system.name(), parts))
}

fn ode_default_suite(seed: u64) -> Result<VerificationReport, VerificationError> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use crate::charts::PhysParams;
    use crate::wigner::EigenLabels;
    let p = PhysParams::natural();
    let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = vec![
        ode_residuals_b1b2(&EigenLabels::cross(1.0, 2.0, -1.0, 0.3)?, &grid, 1.3, &p)?,
        ode_residuals_b1b2(&EigenLabels::cross(1.0, 1.0, 1.0, 0.0)?, &grid, 0.2, &p)?,
    ];
    for _ in 0..3 {
        let l = EigenLabels::cross(1.0, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))?;
        parts.push(ode_residuals_b1b2(&l, &grid, rng.gen_range(0.0..6.0), &p)?);
    }
    Ok(VerificationReport::combine("ode_b1b2", parts))
}

/// Runs the selected checks in parallel and returns them in the order
/// of [`Check::ALL`], whatever order the selection lists them in.
pub fn run_report(selection: &[Check], seed: u64) -> Vec<VerificationReport> {
    let chosen: Vec<Check> = Check::ALL.into_iter().filter(|c| selection.contains(c)).collect();
    chosen.par_iter().map(|c| c.run(seed)).collect()
}
