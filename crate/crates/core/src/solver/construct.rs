use std::cmp::Ordering;

use rand::Rng;

use super::insert::{depots_by_distance, new_route, repair, seq};
use super::{cost, SolverError};
use crate::constraints::{Checker, ConstraintKind, ConstraintSet};
use crate::scalar::Scalar;
use crate::solution::{Route, Solution};
use crate::vrplib::{DistanceMatrix, Instance};

/// Nearest-neighbour construction: extend the open route with the closest
/// customer that keeps it feasible, start a new route when none does.
pub fn initial_solution<S: Scalar, R: Rng + ?Sized>(
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
    _rng: &mut R,
) -> Result<Solution<S>, SolverError> {
    let chk = Checker::new(inst, cs, dm);
    let sol = build(&chk)?;
    let report = chk.check_solution(&sol);
    if !report.feasible() {
        return Err(SolverError::Defect { step: 0, report });
    }
    Ok(sol)
}

pub(crate) fn build<S: Scalar>(chk: &Checker<'_, S>) -> Result<Solution<S>, SolverError> {
    let n = chk.inst.dimension;
    let dm = chk.dm;
    let open = chk.cs.open_route;
    let customers: Vec<usize> = (1..=n).filter(|&v| chk.is_customer(v)).collect();
    if customers.is_empty() {
        return Err(SolverError::NoCustomers);
    }
    let mut routed = vec![false; n + 1];
    let mut remaining = customers.len();
    let mut routes = Vec::new();
    let by = |a: S, b: S| a.partial_cmp(&b).unwrap_or(Ordering::Equal);

    while remaining > 0 {
        // closest (depot, customer) pair among unrouted customers
        let mut seed: Option<(S, usize, usize)> = None;
        for &c in customers.iter().filter(|&&c| !routed[c]) {
            for &d in &chk.inst.depots {
                let dist = dm.get(d, c);
                if seed.is_none_or(|(b, _, _)| by(dist, b) == Ordering::Less) {
                    seed = Some((dist, d, c));
                }
            }
        }
        let (_, depot, closest) = seed.expect("unrouted customer exists");

        let mut visits: Vec<usize> = Vec::new();
        let mut in_route = vec![false; n + 1];
        loop {
            let last = visits.last().copied().unwrap_or(depot);
            let mut cands: Vec<usize> = customers.iter().copied().filter(|&c| !routed[c]).collect();
            cands.sort_by(|&a, &b| by(dm.get(last, a), dm.get(last, b)).then(a.cmp(&b)));
            let mut chosen = None;
            for u in cands {
                if !dm.get(last, u).is_finite() {
                    continue;
                }
                // predecessors already here, successors still unrouted
                if chk.preds_of(u).iter().any(|&p| !in_route[p]) || chk.succs_of(u).iter().any(|&q| routed[q]) {
                    continue;
                }
                let mut trial = visits.clone();
                trial.push(u);
                match chk.first_breach(seq(depot, &trial, open)) {
                    None => {
                        chosen = Some((u, trial));
                        break;
                    }
                    Some((_, ConstraintKind::Electric)) => {
                        if let Some(fixed) = repair(chk, depot, trial) {
                            chosen = Some((u, fixed));
                            break;
                        }
                    }
                    Some(_) => {}
                }
            }
            match chosen {
                Some((u, v)) => {
                    visits = v;
                    routed[u] = true;
                    in_route[u] = true;
                    remaining -= 1;
                }
                None => break,
            }
        }

        if visits.is_empty() {
            match new_route(chk, closest) {
                Some(r) if !chk.partners(closest).any(|p| routed[p]) => {
                    routed[closest] = true;
                    remaining -= 1;
                    routes.push(r);
                }
                _ => return Err(construction_error(chk, closest)),
            }
        } else {
            routes.push(Route::new(depot, visits));
        }
    }
    let mut sol = Solution::new(routes);
    sol.cost = cost(&sol, dm, chk.cs);
    Ok(sol)
}

fn construction_error<S: Scalar>(chk: &Checker<'_, S>, u: usize) -> SolverError {
    let depot = depots_by_distance(chk, u)[0];
    let nodes: Vec<usize> = seq(depot, &[u], chk.cs.open_route).collect();
    match chk.trace(&nodes).ok().and_then(|t| t.violations.into_iter().next()) {
        Some(v) => SolverError::Construction {
            customer: u,
            kind: v.kind,
            message: v.message,
        },
        None => SolverError::Construction {
            customer: u,
            kind: ConstraintKind::Precedence,
            message: "precedence partners are spread over other routes".into(),
        },
    }
}
