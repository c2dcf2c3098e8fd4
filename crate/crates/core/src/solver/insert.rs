use std::cmp::Ordering;
use std::iter::once;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{cost, route_cost, RemovalSet, SolverError};
use crate::constraints::{Checker, ConstraintKind, ConstraintSet};
use crate::scalar::Scalar;
use crate::solution::{Route, Solution};
use crate::vrplib::{DistanceMatrix, Instance};

/// Station insertions tried per candidate before giving up on it.
const MAX_STATION_REPAIRS: usize = 2;

pub(crate) fn seq(depot: usize, visits: &[usize], open: bool) -> impl Iterator<Item = usize> + Clone + '_ {
    once(depot)
        .chain(visits.iter().copied())
        .chain((!open).then_some(depot))
}

fn seq_with(
    depot: usize,
    visits: &[usize],
    pos: usize,
    u: usize,
    open: bool,
) -> impl Iterator<Item = usize> + Clone + '_ {
    once(depot)
        .chain(visits[..pos].iter().copied())
        .chain(once(u))
        .chain(visits[pos..].iter().copied())
        .chain((!open).then_some(depot))
}

fn cmp<S: Scalar>(a: S, b: S) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Inserts charging stations (at most [`MAX_STATION_REPAIRS`]) until the
/// route is feasible. Each round places the station with the least detour
/// at the latest gap that does not make the route fail earlier.
pub(crate) fn repair<S: Scalar>(chk: &Checker<'_, S>, depot: usize, mut visits: Vec<usize>) -> Option<Vec<usize>> {
    let energy = chk.cs.electric.as_ref()?;
    let open = chk.cs.open_route;
    let dm = chk.dm;
    for round in 0..=MAX_STATION_REPAIRS {
        let (b, kind) = match chk.first_breach(seq(depot, &visits, open)) {
            None => return Some(visits),
            Some(x) => x,
        };
        if kind != ConstraintKind::Electric || round == MAX_STATION_REPAIRS {
            return None;
        }
        let full: Vec<usize> = seq(depot, &visits, open).collect();
        let mut chosen: Option<(S, usize, usize)> = None;
        for q in (1..=b).rev() {
            let (a, c) = (full[q - 1], full[q]);
            for &s in &energy.stations {
                if s == a || s == c {
                    continue;
                }
                let added = dm.get(a, s) + dm.get(s, c) - dm.get(a, c);
                if !added.is_finite() {
                    continue;
                }
                if chosen.is_some_and(|(best, _, _)| added >= best) {
                    continue;
                }
                let progress = match chk.first_breach(seq_with(depot, &visits, q - 1, s, open)) {
                    None => true,
                    Some((nb, _)) => nb > b,
                };
                if progress {
                    chosen = Some((added, q - 1, s));
                }
            }
            if chosen.is_some() {
                break;
            }
        }
        let (_, pos, s) = chosen?;
        visits.insert(pos, s);
    }
    None
}

/// Drops stations whose removal keeps the route feasible and does not
/// lengthen it.
pub(crate) fn prune_stations<S: Scalar>(chk: &Checker<'_, S>, route: &mut Route) {
    let open = chk.cs.open_route;
    let mut i = 0;
    while i < route.visits.len() {
        let v = route.visits[i];
        if chk.is_station(v) {
            let before = route_cost(route, chk.dm, open);
            let mut trial = route.visits.clone();
            trial.remove(i);
            let candidate = Route::new(route.depot, trial);
            if route_cost(&candidate, chk.dm, open) <= before
                && chk.feasible(seq(candidate.depot, &candidate.visits, open))
            {
                *route = candidate;
                continue;
            }
        }
        i += 1;
    }
}

/// Restores the insertion precondition after destroy: routes that became
/// infeasible (possible with rounded or non-metric costs, or when a
/// station was cut out) are repaired or dissolved into `removed`.
pub(crate) fn sanitize<S: Scalar>(chk: &Checker<'_, S>, partial: &mut Solution<S>, removed: &mut RemovalSet) {
    let open = chk.cs.open_route;
    let mut kept = Vec::with_capacity(partial.routes.len());
    for r in partial.routes.drain(..) {
        if chk.feasible(seq(r.depot, &r.visits, open)) {
            kept.push(r);
            continue;
        }
        if let Some(v) = repair(chk, r.depot, r.visits.clone()) {
            kept.push(Route::new(r.depot, v));
            continue;
        }
        removed
            .customers
            .extend(r.visits.iter().copied().filter(|&v| chk.is_customer(v)));
    }
    partial.routes = kept;
    partial.cost = cost(partial, chk.dm, chk.cs);
}

enum Placement {
    At(usize),
    Replace(Vec<usize>),
}

/// Cheapest feasible reinsertion of `removed` into `partial`, in shuffled
/// order. A new route is opened when nothing fits or, for fleet variants,
/// when it is cheaper than every feasible position.
pub fn insert<S: Scalar, R: Rng + ?Sized>(
    partial: Solution<S>,
    removed: &RemovalSet,
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
    rng: &mut R,
) -> Result<Solution<S>, SolverError> {
    let chk = Checker::new(inst, cs, dm);
    let (mut partial, mut removed) = (partial, removed.clone());
    sanitize(&chk, &mut partial, &mut removed);
    insert_with(&chk, partial, &removed, rng)
}

pub(crate) fn insert_with<S: Scalar, R: Rng + ?Sized>(
    chk: &Checker<'_, S>,
    mut sol: Solution<S>,
    removed: &RemovalSet,
    rng: &mut R,
) -> Result<Solution<S>, SolverError> {
    if removed.is_empty() {
        sol.cost = cost(&sol, chk.dm, chk.cs);
        return Ok(sol);
    }
    let open = chk.cs.open_route;
    let dm = chk.dm;
    let electric = chk.cs.electric.is_some();
    let precedence = chk.has_precedence();
    let fleet = chk.cs.capacity.is_some();
    let n = chk.inst.dimension;

    let mut route_of: Vec<Option<usize>> = vec![None; n + 1];
    if precedence {
        for (k, r) in sol.routes.iter().enumerate() {
            for &v in &r.visits {
                route_of[v] = Some(k);
            }
        }
    }

    let mut order = removed.customers.clone();
    order.shuffle(rng);
    let mut cands: Vec<(S, usize, usize)> = Vec::new();

    for &u in &order {
        cands.clear();
        for (k, r) in sol.routes.iter().enumerate() {
            if precedence && chk.partners(u).any(|p| route_of[p].is_some_and(|rp| rp != k)) {
                continue;
            }
            let len = r.visits.len();
            for pos in 0..=len {
                let a = if pos == 0 { r.depot } else { r.visits[pos - 1] };
                let b = if pos < len {
                    Some(r.visits[pos])
                } else if open {
                    None
                } else {
                    Some(r.depot)
                };
                let delta = match b {
                    Some(b) => dm.get(a, u) + dm.get(u, b) - dm.get(a, b),
                    None => dm.get(a, u),
                };
                if delta.is_finite() {
                    cands.push((delta, k, pos));
                }
            }
        }
        cands.sort_by(|x, y| cmp(x.0, y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

        let mut best: Option<(S, usize, Placement)> = None;
        for &(delta, k, pos) in &cands {
            if best.as_ref().is_some_and(|(c, _, _)| delta >= *c) {
                break;
            }
            let r = &sol.routes[k];
            match chk.first_breach(seq_with(r.depot, &r.visits, pos, u, open)) {
                None => {
                    best = Some((delta, k, Placement::At(pos)));
                    break;
                }
                Some((_, ConstraintKind::Electric)) if electric => {
                    let mut v = r.visits.clone();
                    v.insert(pos, u);
                    if let Some(fixed) = repair(chk, r.depot, v) {
                        let c = route_cost(&Route::new(r.depot, fixed.clone()), dm, open) - route_cost(r, dm, open);
                        if best.as_ref().is_none_or(|(b, _, _)| c < *b) {
                            best = Some((c, k, Placement::Replace(fixed)));
                        }
                    }
                }
                Some(_) => {}
            }
        }

        // A fresh vehicle competes with the cheapest position on cost;
        // existing routes win ties.
        if fleet && best.is_some() && !(precedence && chk.partners(u).any(|p| route_of[p].is_some())) {
            if let Some(route) = new_route(chk, u) {
                let c = route_cost(&route, dm, open);
                if best.as_ref().is_some_and(|(b, _, _)| c < *b) {
                    best = None;
                    sol.routes.push(route);
                }
            }
        }

        let k = match best {
            None if sol.routes.last().is_some_and(|r| r.visits.contains(&u)) => sol.routes.len() - 1,
            Some((_, k, Placement::At(pos))) => {
                sol.routes[k].visits.insert(pos, u);
                k
            }
            Some((_, k, Placement::Replace(v))) => {
                sol.routes[k].visits = v;
                k
            }
            None => {
                if precedence && chk.partners(u).any(|p| route_of[p].is_some()) {
                    return Err(SolverError::Insertion { customer: u });
                }
                let route = new_route(chk, u).ok_or(SolverError::Insertion { customer: u })?;
                sol.routes.push(route);
                sol.routes.len() - 1
            }
        };
        if precedence {
            for &v in &sol.routes[k].visits {
                route_of[v] = Some(k);
            }
        }
    }

    if electric {
        for r in &mut sol.routes {
            prune_stations(chk, r);
        }
    }
    sol.routes.retain(|r| r.visits.iter().any(|&v| chk.is_customer(v)));
    sol.cost = cost(&sol, dm, chk.cs);
    Ok(sol)
}

/// Depots ordered by distance to `u`, ties by id.
pub(crate) fn depots_by_distance<S: Scalar>(chk: &Checker<'_, S>, u: usize) -> Vec<usize> {
    let mut d = chk.inst.depots.clone();
    d.sort_by(|&a, &b| cmp(chk.dm.get(a, u), chk.dm.get(b, u)).then(a.cmp(&b)));
    d
}

/// Singleton route for `u` from the nearest depot that can serve it.
pub(crate) fn new_route<S: Scalar>(chk: &Checker<'_, S>, u: usize) -> Option<Route> {
    let open = chk.cs.open_route;
    for depot in depots_by_distance(chk, u) {
        if chk.feasible(seq(depot, &[u], open)) {
            return Some(Route::new(depot, vec![u]));
        }
        if let Some(v) = repair(chk, depot, vec![u]) {
            return Some(Route::new(depot, v));
        }
        if let Some(v) = bracket(chk, depot, u) {
            return Some(Route::new(depot, v));
        }
    }
    None
}

/// Cheapest `[s1] u [s2]` with at most one station on each side of `u`.
fn bracket<S: Scalar>(chk: &Checker<'_, S>, depot: usize, u: usize) -> Option<Vec<usize>> {
    let energy = chk.cs.electric.as_ref()?;
    let open = chk.cs.open_route;
    let opts: Vec<Option<usize>> = once(None).chain(energy.stations.iter().map(|&s| Some(s))).collect();
    let mut best: Option<(S, Vec<usize>)> = None;
    for &a in &opts {
        for &b in &opts {
            let visits: Vec<usize> = a.into_iter().chain(once(u)).chain(b).collect();
            let c = route_cost(&Route::new(depot, visits.clone()), chk.dm, open);
            if best.as_ref().is_some_and(|(bc, _)| c >= *bc) {
                continue;
            }
            if chk.feasible(seq(depot, &visits, open)) {
                best = Some((c, visits));
            }
        }
    }
    best.map(|(_, v)| v)
}
