use rand::Rng;
use serde::{Deserialize, Serialize};

use super::route_cost;
use crate::constraints::{Checker, ConstraintSet};
use crate::scalar::Scalar;
use crate::solution::{Route, Solution};
use crate::vrplib::{DistanceMatrix, Instance};

/// Customers taken out by one destroy call, in removal order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalSet {
    pub customers: Vec<usize>,
}

impl RemovalSet {
    pub fn len(&self) -> usize {
        self.customers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.customers.is_empty()
    }
}

/// Removal target: `max(1, floor(n * ratio))`.
pub fn removal_target(customers: usize, ratio: f64) -> usize {
    ((customers as f64 * ratio).floor() as usize).max(1)
}

/// Subsequence removal around a random center. Walks customers by distance
/// from the center and cuts one contiguous window (containing the customer)
/// out of each route not yet cut, until at least the target count is
/// removed. Stations caught in a window are dropped; routes left without
/// customers disappear.
pub fn destroy<S: Scalar, R: Rng + ?Sized>(
    sol: &Solution<S>,
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
    ratio: f64,
    max_subsequence: usize,
    rng: &mut R,
) -> (RemovalSet, Solution<S>) {
    let is_customer = |v: usize| !inst.is_depot(v) && !inst.is_station(v);
    destroy_by(sol, dm, cs.open_route, ratio, max_subsequence, is_customer, rng)
}

pub(crate) fn destroy_with<S: Scalar, R: Rng + ?Sized>(
    sol: &Solution<S>,
    dm: &DistanceMatrix<S>,
    ratio: f64,
    max_subsequence: usize,
    chk: &Checker<'_, S>,
    rng: &mut R,
) -> (RemovalSet, Solution<S>) {
    destroy_by(sol, dm, chk.cs.open_route, ratio, max_subsequence, |v| chk.is_customer(v), rng)
}

fn destroy_by<S: Scalar, R: Rng + ?Sized>(
    sol: &Solution<S>,
    dm: &DistanceMatrix<S>,
    open: bool,
    ratio: f64,
    max_subsequence: usize,
    is_customer: impl Fn(usize) -> bool,
    rng: &mut R,
) -> (RemovalSet, Solution<S>) {
    // (customer, route index)
    let customers: Vec<(usize, usize)> = sol
        .routes
        .iter()
        .enumerate()
        .flat_map(|(r, route)| route.visits.iter().map(move |&v| (v, r)))
        .filter(|&(v, _)| is_customer(v))
        .collect();
    if customers.is_empty() {
        return (RemovalSet::default(), sol.clone());
    }
    let target = removal_target(customers.len(), ratio);
    let center = customers[rng.gen_range(0..customers.len())].0;
    let mut order = customers.clone();
    order.sort_by(|a, b| {
        dm.get(center, a.0)
            .partial_cmp(&dm.get(center, b.0))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });

    let mut routes: Vec<Vec<usize>> = sol.routes.iter().map(|r| r.visits.clone()).collect();
    let mut destroyed = vec![false; routes.len()];
    let mut removed = Vec::with_capacity(target + max_subsequence);
    for &(u, r) in &order {
        if removed.len() >= target {
            break;
        }
        if destroyed[r] {
            continue;
        }
        let visits = &mut routes[r];
        let p = visits.iter().position(|&v| v == u).expect("customer in its route");
        let len = visits.len();
        let longest = len.min(max_subsequence).min(target - removed.len() + 1);
        let l = rng.gen_range(1..=longest);
        let lo = p.saturating_sub(l - 1);
        let hi = p.min(len - l);
        let start = rng.gen_range(lo..=hi);
        removed.extend(visits.drain(start..start + l).filter(|&v| is_customer(v)));
        destroyed[r] = true;
    }

    let routes = sol
        .routes
        .iter()
        .zip(routes)
        .filter(|(_, v)| v.iter().any(|&x| is_customer(x)))
        .map(|(orig, visits)| Route::new(orig.depot, visits))
        .collect();
    let mut residual = Solution::new(routes);
    residual.cost = residual.routes.iter().map(|r| route_cost(r, dm, open)).sum();
    (RemovalSet { customers: removed }, residual)
}
