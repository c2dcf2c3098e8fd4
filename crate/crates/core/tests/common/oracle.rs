//! Brute-force reference implementations, written without the library's
//! trace engine. Used to cross-check the checker and the solver.

#![allow(dead_code)]

use vrpkit_core::{BackhaulMode, ConstraintSet, DistanceMatrix, Instance, Solution};

fn tol(bound: f64) -> f64 {
    1e-6 * bound.abs().max(1.0)
}

pub struct Oracle<'a> {
    pub inst: &'a Instance<f64>,
    pub cs: &'a ConstraintSet<f64>,
    pub dm: &'a DistanceMatrix<f64>,
    stations: Vec<bool>,
    depots: Vec<bool>,
    /// `before[a][b]`: a must come before b (transitive)
    before: Vec<Vec<bool>>,
}

impl<'a> Oracle<'a> {
    pub fn new(inst: &'a Instance<f64>, cs: &'a ConstraintSet<f64>, dm: &'a DistanceMatrix<f64>) -> Self {
        let n = inst.dimension;
        let mut stations = vec![false; n + 1];
        if let Some(e) = &cs.electric {
            for &s in &e.stations {
                stations[s] = true;
            }
        }
        let mut depots = vec![false; n + 1];
        for &d in &inst.depots {
            depots[d] = true;
        }
        let mut before = vec![vec![false; n + 1]; n + 1];
        if let Some(p) = &cs.precedence {
            for &(a, b) in p {
                before[a][b] = true;
            }
        }
        // Warshall
        for k in 1..=n {
            for i in 1..=n {
                if before[i][k] {
                    for j in 1..=n {
                        if before[k][j] {
                            before[i][j] = true;
                        }
                    }
                }
            }
        }
        Oracle { inst, cs, dm, stations, depots, before }
    }

    pub fn customers(&self) -> Vec<usize> {
        (1..=self.inst.dimension)
            .filter(|&v| !self.depots[v] && !self.stations[v])
            .collect()
    }

    fn is_customer(&self, v: usize) -> bool {
        v >= 1 && v <= self.inst.dimension && !self.depots[v] && !self.stations[v]
    }

    fn must_precede(&self, a: usize, b: usize) -> bool {
        !self.depots[a] && !self.depots[b] && self.before[a][b]
    }

    pub fn route_cost(&self, depot: usize, visits: &[usize]) -> f64 {
        let mut path = vec![depot];
        path.extend_from_slice(visits);
        if !self.cs.open_route {
            path.push(depot);
        }
        path.windows(2).map(|w| self.dm.get(w[0], w[1])).sum()
    }

    pub fn route_ok(&self, depot: usize, visits: &[usize]) -> bool {
        let n = self.inst.dimension;
        if depot == 0 || depot > n || !self.depots[depot] || visits.is_empty() {
            return false;
        }
        if visits.iter().any(|&v| v == 0 || v > n || self.depots[v]) {
            return false;
        }
        let mut path = vec![depot];
        path.extend_from_slice(visits);
        if !self.cs.open_route {
            path.push(depot);
        }
        if path.windows(2).any(|w| !self.dm.get(w[0], w[1]).is_finite()) {
            return false;
        }

        if let Some(q) = self.cs.capacity {
            let custs: Vec<f64> = visits
                .iter()
                .filter(|&&v| self.is_customer(v))
                .map(|&v| self.inst.demand(v))
                .collect();
            let deliveries: f64 = custs.iter().filter(|d| **d > 0.0).sum();
            if deliveries > q + tol(q) {
                return false;
            }
            let mut load = deliveries;
            for d in &custs {
                load -= d;
                if load > q + tol(q) {
                    return false;
                }
            }
        }
        if self.cs.backhaul == Some(BackhaulMode::Strict) {
            let signs: Vec<f64> = visits
                .iter()
                .filter(|&&v| self.is_customer(v))
                .map(|&v| self.inst.demand(v))
                .collect();
            if let Some(first_pickup) = signs.iter().position(|d| *d < 0.0) {
                if signs[first_pickup..].iter().any(|d| *d > 0.0) {
                    return false;
                }
            }
        }
        if let Some(limit) = self.cs.distance_limit {
            let total: f64 = path.windows(2).map(|w| self.dm.get(w[0], w[1])).sum();
            if total > limit + tol(limit) {
                return false;
            }
        }
        for i in 0..visits.len() {
            for j in i + 1..visits.len() {
                if self.must_precede(visits[j], visits[i]) {
                    return false;
                }
            }
        }

        // clock and battery together: charging takes time
        let e = self.cs.electric.as_ref();
        let mut fuel = e.map_or(0.0, |e| e.fuel_capacity);
        let mut clock = if self.cs.time_windows {
            self.inst.time_window(depot).map_or(0.0, |w| w.0)
        } else {
            0.0
        };
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = self.dm.get(a, b);
            if let Some(e) = e {
                fuel -= e.consumption_rate * d;
                if fuel < -tol(e.fuel_capacity) {
                    return false;
                }
            }
            clock += d;
            if self.cs.time_windows {
                if let Some((early, late)) = self.inst.time_window(b) {
                    if clock > late + tol(late) {
                        return false;
                    }
                    if clock < early {
                        clock = early;
                    }
                }
            }
            if !self.depots[b] {
                clock += self.inst.service_time(b);
            }
            if let Some(e) = e {
                if self.stations[b] {
                    clock += (e.fuel_capacity - fuel).max(0.0) / e.refuel_rate;
                    fuel = e.fuel_capacity;
                }
            }
        }
        true
    }

    pub fn solution_ok(&self, sol: &Solution<f64>) -> bool {
        let n = self.inst.dimension;
        let mut where_: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (k, r) in sol.routes.iter().enumerate() {
            if !self.route_ok(r.depot, &r.visits) {
                return false;
            }
            for &v in &r.visits {
                if self.is_customer(v) {
                    where_[v].push(k);
                }
            }
        }
        for v in self.customers() {
            if where_[v].len() != 1 {
                return false;
            }
        }
        for a in 1..=n {
            for b in 1..=n {
                if self.must_precede(a, b) {
                    if let (Some(ra), Some(rb)) = (where_[a].first(), where_[b].first()) {
                        if ra != rb {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Cheapest feasible route over `seq` (customers in that order) from
    /// `depot`, with optimal charging stops. Exact when time windows are
    /// off; with time windows only the stop-free route is tried.
    fn best_route(&self, depot: usize, seq: &[usize]) -> Option<f64> {
        match &self.cs.electric {
            Some(e) if !self.cs.time_windows => self.best_charged(depot, seq, e.fuel_capacity, e.consumption_rate, &e.stations),
            _ => self.route_ok(depot, seq).then(|| self.route_cost(depot, seq)),
        }
    }

    /// Label-setting over (remaining fuel, distance) with Pareto pruning.
    /// Between two consecutive stops the vehicle may take any chain of
    /// stations; chains are shortest paths in the station graph.
    fn best_charged(&self, depot: usize, seq: &[usize], cap: f64, rate: f64, stations: &[usize]) -> Option<f64> {
        // only capacity / backhaul / distance can coexist here; check the
        // station-free parts first
        if !self.route_ok_ignoring_energy(depot, seq) {
            return None;
        }
        let range = |d: f64| rate * d <= cap + tol(cap);
        let k = stations.len();
        let mut sp = vec![vec![f64::INFINITY; k]; k];
        for i in 0..k {
            sp[i][i] = 0.0;
            for j in 0..k {
                let d = self.dm.get(stations[i], stations[j]);
                if i != j && range(d) {
                    sp[i][j] = d;
                }
            }
        }
        for m in 0..k {
            for i in 0..k {
                for j in 0..k {
                    if sp[i][m] + sp[m][j] < sp[i][j] {
                        sp[i][j] = sp[i][m] + sp[m][j];
                    }
                }
            }
        }
        let mut stops = vec![depot];
        stops.extend_from_slice(seq);
        if !self.cs.open_route {
            stops.push(depot);
        }
        let mut labels: Vec<(f64, f64)> = vec![(cap, 0.0)];
        for w in stops.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut next = Vec::new();
            for &(fuel, cost) in &labels {
                let d = self.dm.get(a, b);
                if rate * d <= fuel + tol(cap) {
                    next.push((fuel - rate * d, cost + d));
                }
                for s1 in 0..k {
                    let d1 = self.dm.get(a, stations[s1]);
                    if rate * d1 > fuel + tol(cap) {
                        continue;
                    }
                    for sk in 0..k {
                        let d2 = self.dm.get(stations[sk], b);
                        if sp[s1][sk].is_finite() && range(d2) {
                            next.push((cap - rate * d2, cost + d1 + sp[s1][sk] + d2));
                        }
                    }
                }
            }
            if let Some(limit) = self.cs.distance_limit {
                next.retain(|l| l.1 <= limit + tol(limit));
            }
            next.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.partial_cmp(&y.1).unwrap()));
            labels.clear();
            let mut best_cost = f64::INFINITY;
            for l in next {
                if l.1 < best_cost - 1e-12 {
                    best_cost = l.1;
                    labels.push(l);
                }
            }
            if labels.is_empty() {
                return None;
            }
        }
        labels.iter().map(|l| l.1).reduce(f64::min)
    }

    fn route_ok_ignoring_energy(&self, depot: usize, seq: &[usize]) -> bool {
        let relaxed = ConstraintSet {
            electric: None,
            distance_limit: None,
            ..self.cs.clone()
        };
        Oracle::new(self.inst, &relaxed, self.dm).route_ok(depot, seq)
    }

    /// Optimal total cost by enumerating every set partition of the
    /// customers and every visiting order within each part. Unlimited
    /// fleet, any depot per route. `None` when infeasible.
    pub fn optimum(&self) -> Option<f64> {
        assert!(self.cs.precedence.is_none(), "oracle does not enumerate precedence");
        let cust = self.customers();
        let n = cust.len();
        assert!(n <= 9, "brute force is exponential");
        let full = (1usize << n) - 1;
        let mut single = vec![f64::INFINITY; full + 1];
        for mask in 1..=full {
            let mut members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| cust[i]).collect();
            members.sort_unstable();
            let mut best = f64::INFINITY;
            permute(&mut members, 0, &mut |seq| {
                for &d in &self.inst.depots {
                    if let Some(c) = self.best_route(d, seq) {
                        best = best.min(c);
                    }
                }
            });
            single[mask] = best;
        }
        let mut part = vec![f64::INFINITY; full + 1];
        part[0] = 0.0;
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            // submasks of `rest`, each joined with the lowest bit
            let mut sub = rest;
            loop {
                let s = sub | low;
                let c = single[s] + part[mask ^ s];
                if c < part[mask] {
                    part[mask] = c;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        part[full].is_finite().then_some(part[full])
    }
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
