#![allow(dead_code)]

pub mod oracle;

use rand::seq::SliceRandom;
use rand::Rng;
use vrpkit_core::{build_distance_matrix, classify, ConstraintSet, DistanceMatrix, Instance, Rounding, Route, Solution};

pub fn setup(inst: &Instance<f64>) -> (ConstraintSet<f64>, DistanceMatrix<f64>) {
    let cs = classify(inst).set;
    let dm = build_distance_matrix(inst, Rounding::default_for(inst)).unwrap();
    (cs, dm)
}

/// A random, usually infeasible, candidate: customers shuffled and cut
/// into routes, with occasional drops, duplicates, stray depots and
/// station stops.
pub fn random_candidate<R: Rng>(inst: &Instance<f64>, rng: &mut R) -> Solution<f64> {
    let mut cust = inst.customers();
    cust.shuffle(rng);
    if rng.gen_bool(0.1) && !cust.is_empty() {
        cust.pop();
    }
    if rng.gen_bool(0.1) && !cust.is_empty() {
        let c = cust[rng.gen_range(0..cust.len())];
        cust.push(c);
    }
    let mut routes = Vec::new();
    while !cust.is_empty() {
        let len = rng.gen_range(1..=cust.len());
        let mut visits: Vec<usize> = cust.drain(..len).collect();
        if let Some(st) = &inst.stations {
            if rng.gen_bool(0.5) {
                let s = st[rng.gen_range(0..st.len())];
                visits.insert(rng.gen_range(0..=visits.len()), s);
            }
        }
        if rng.gen_bool(0.03) {
            visits.insert(rng.gen_range(0..=visits.len()), inst.depots[0]);
        }
        let depot = if rng.gen_bool(0.03) {
            rng.gen_range(1..=inst.dimension)
        } else {
            inst.depots[rng.gen_range(0..inst.depots.len())]
        };
        routes.push(Route::new(depot, visits));
    }
    Solution::new(routes)
}

/// A small local change to `sol`: swap, relocate or reverse.
pub fn mutate<R: Rng>(sol: &Solution<f64>, rng: &mut R) -> Solution<f64> {
    let mut s = sol.clone();
    if s.routes.is_empty() {
        return s;
    }
    let a = rng.gen_range(0..s.routes.len());
    match rng.gen_range(0..3) {
        0 => {
            let v = &mut s.routes[a].visits;
            let (i, j) = (rng.gen_range(0..v.len()), rng.gen_range(0..v.len()));
            v.swap(i, j);
        }
        1 => {
            let b = rng.gen_range(0..s.routes.len());
            if s.routes[a].visits.len() > 1 || a == b {
                let i = rng.gen_range(0..s.routes[a].visits.len());
                let x = s.routes[a].visits.remove(i);
                let j = rng.gen_range(0..=s.routes[b].visits.len());
                s.routes[b].visits.insert(j, x);
            }
        }
        _ => {
            let v = &mut s.routes[a].visits;
            let i = rng.gen_range(0..v.len());
            let j = rng.gen_range(i..v.len());
            v[i..=j].reverse();
        }
    }
    s
}
