//! Greedy construction, subsequence destroy, cheapest feasible insertion
//! and a simulated-annealing main loop.

mod construct;
mod destroy;
mod insert;

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{Checker, ConstraintKind, ConstraintSet, FeasibilityReport};
use crate::scalar::Scalar;
use crate::vrplib::{build_distance_matrix, DistanceError, DistanceMatrix, Instance, Rounding};

pub use crate::solution::{parse_sol, Route, SolFile, SolFormatError, Solution};
pub use construct::initial_solution;
pub use destroy::{destroy, removal_target, RemovalSet};
pub use insert::insert;

pub type Rng64 = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub iterations: usize,
    pub destroy_ratio: f64,
    pub seed: u64,
    /// `None` picks [`Rounding::default_for`] the instance.
    pub rounding: Option<Rounding>,
    pub time_limit: Option<Duration>,
    pub max_subsequence: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iterations: 2000,
            destroy_ratio: 0.2,
            seed: 0,
            rounding: None,
            time_limit: None,
            max_subsequence: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.destroy_ratio > 0.0 && self.destroy_ratio < 1.0) {
            return Err(SolverError::Config(format!(
                "destroy ratio {} outside (0, 1)",
                self.destroy_ratio
            )));
        }
        if self.max_subsequence == 0 {
            return Err(SolverError::Config("max_subsequence must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("no customers to route")]
    NoCustomers,
    #[error("customer {customer} cannot be served by any single route ({kind}: {message})")]
    Construction {
        customer: usize,
        kind: ConstraintKind,
        message: String,
    },
    #[error("customer {customer} has no feasible insertion and cannot start a new route")]
    Insertion { customer: usize },
    #[error("internal defect at step {step}: candidate failed validation\n{report}")]
    Defect {
        step: usize,
        report: FeasibilityReport,
    },
    #[error("step {step} outside 1..={iterations}")]
    StepOutOfRange { step: usize, iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStats<S> {
    pub steps: usize,
    pub accepted: usize,
    pub initial_cost: S,
    pub best_cost: S,
    /// Best cost after construction, then after every step.
    pub trajectory: Vec<S>,
    pub wall_time: Duration,
    pub truncated: bool,
}

impl<S: Scalar> fmt::Display for SearchStats<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps: {}", self.steps)?;
        writeln!(f, "accepted: {}", self.accepted)?;
        writeln!(f, "initial_cost: {}", self.initial_cost)?;
        writeln!(f, "best_cost: {}", self.best_cost)?;
        writeln!(f, "wall_time_s: {:.6}", self.wall_time.as_secs_f64())?;
        writeln!(f, "truncated: {}", self.truncated)
    }
}

/// Total driven distance; open routes have no return leg.
pub fn cost<S: Scalar>(sol: &Solution<S>, dm: &DistanceMatrix<S>, cs: &ConstraintSet<S>) -> S {
    sol.routes.iter().map(|r| route_cost(r, dm, cs.open_route)).sum()
}

pub(crate) fn route_cost<S: Scalar>(r: &Route, dm: &DistanceMatrix<S>, open: bool) -> S {
    let mut total = S::zero();
    let mut prev = r.depot;
    for &v in &r.visits {
        total += dm.get(prev, v);
        prev = v;
    }
    if !open && !r.visits.is_empty() {
        total += dm.get(prev, r.depot);
    }
    total
}

/// `(iterations - step + 1) / 10`.
pub fn temperature(iterations: usize, step: usize) -> Result<f64, SolverError> {
    if step == 0 || step > iterations {
        return Err(SolverError::StepOutOfRange { step, iterations });
    }
    Ok((iterations - step + 1) as f64 / 10.0)
}

/// Metropolis rule. Draws one uniform only when `e_new > e_current`.
pub fn accept<S: Scalar, R: Rng + ?Sized>(e_new: S, e_current: S, temp: f64, rng: &mut R) -> bool {
    if e_new <= e_current {
        return true;
    }
    let delta = (e_new - e_current).to_f64().unwrap_or(f64::INFINITY);
    rng.gen::<f64>() < (-delta / temp).exp()
}

/// Builds the matrix from `cfg.rounding` and runs [`solve_with_matrix`].
pub fn solve<S: Scalar>(
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    cfg: &SolverConfig,
) -> Result<(Solution<S>, SearchStats<S>), SolverError> {
    let rounding = cfg.rounding.unwrap_or_else(|| Rounding::default_for(inst));
    let dm = build_distance_matrix(inst, rounding)?;
    solve_with_matrix(inst, cs, &dm, cfg)
}

pub fn solve_with_matrix<S: Scalar>(
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
    cfg: &SolverConfig,
) -> Result<(Solution<S>, SearchStats<S>), SolverError> {
    cfg.validate()?;
    let started = Instant::now();
    let chk = Checker::new(inst, cs, dm);
    let mut rng = Rng64::seed_from_u64(cfg.seed);

    let mut current = construct::build(&chk)?;
    current.cost = cost(&current, dm, cs);
    let report = chk.check_solution(&current);
    if !report.feasible() {
        return Err(SolverError::Defect { step: 0, report });
    }
    let mut best = current.clone();
    let mut stats = SearchStats {
        steps: 0,
        accepted: 0,
        initial_cost: current.cost,
        best_cost: current.cost,
        trajectory: vec![current.cost],
        wall_time: Duration::ZERO,
        truncated: false,
    };

    for step in 1..=cfg.iterations {
        if cfg.time_limit.is_some_and(|t| started.elapsed() >= t) {
            stats.truncated = true;
            break;
        }
        let (mut removed, mut partial) =
            destroy::destroy_with(&current, dm, cfg.destroy_ratio, cfg.max_subsequence, &chk, &mut rng);
        insert::sanitize(&chk, &mut partial, &mut removed);
        let mut cand = insert::insert_with(&chk, partial, &removed, &mut rng)?;
        cand.cost = cost(&cand, dm, cs);
        let report = chk.check_solution(&cand);
        if !report.feasible() {
            return Err(SolverError::Defect { step, report });
        }
        let temp = temperature(cfg.iterations, step)?;
        if accept(cand.cost, current.cost, temp, &mut rng) {
            current = cand;
            stats.accepted += 1;
        }
        if current.cost < best.cost {
            best = current.clone();
        }
        stats.steps = step;
        stats.trajectory.push(best.cost);
    }
    stats.best_cost = best.cost;
    stats.wall_time = started.elapsed();
    Ok((best, stats))
}
