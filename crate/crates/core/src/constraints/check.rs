use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BackhaulMode, ConstraintSet};
use crate::scalar::{within, Scalar};
use crate::solution::Solution;
use crate::vrplib::{DistanceMatrix, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    Capacity,
    Distance,
    TimeWindow,
    Electric,
    BackhaulOrder,
    Precedence,
    ForbiddenArc,
    Visit,
    Depot,
    Route,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Capacity => "Capacity",
            ConstraintKind::Distance => "Distance",
            ConstraintKind::TimeWindow => "Time window",
            ConstraintKind::Electric => "Electric",
            ConstraintKind::BackhaulOrder => "Backhaul order",
            ConstraintKind::Precedence => "Precedence",
            ConstraintKind::ForbiddenArc => "Forbidden arc",
            ConstraintKind::Visit => "Visit",
            ConstraintKind::Depot => "Depot",
            ConstraintKind::Route => "Route",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    /// 1-based, matching `Route #k` in solution files.
    pub route: Option<usize>,
    pub node: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        write!(
            f,
            "{}, route {}, node {}: {}",
            self.kind,
            opt(self.route),
            opt(self.node),
            self.message
        )
    }
}

/// Structurally invalid route; distinct from an infeasible one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("route visits nothing")]
    Empty,
    #[error("node {0} does not exist")]
    UnknownNode(usize),
    #[error("route starts at {0}, which is not a depot")]
    StartNotDepot(usize),
    #[error("closed route starts at depot {start} but ends at {end}")]
    EndMismatch { start: usize, end: usize },
    #[error("depot {node} inside the route at position {position}")]
    DepotInside { position: usize, node: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep<S> {
    pub node: usize,
    pub arrival: S,
    pub departure: S,
    pub load_after: S,
    pub fuel_after: S,
    pub cumulative_distance: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteTrace<S> {
    pub steps: Vec<TraceStep<S>>,
    /// In route order; empty iff feasible.
    pub violations: Vec<Violation>,
}

impl<S: Scalar> RouteTrace<S> {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    pub fn distance(&self) -> S {
        self.steps.last().map_or(S::zero(), |s| s.cumulative_distance)
    }
}

/// Every violation found in a solution.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn kinds(&self) -> impl Iterator<Item = ConstraintKind> + '_ {
        self.violations.iter().map(|v| v.kind)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "feasible");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

enum Event<S> {
    Step(TraceStep<S>),
    Breach {
        kind: ConstraintKind,
        node: usize,
        message: Msg<S>,
    },
}

/// Violation text, formatted only when a trace is requested.
enum Msg<S> {
    Exceeds { what: &'static str, value: S, bound: S },
    Late { arrival: S, latest: S },
    PickupBeforeDelivery,
    Forbidden { from: usize },
    After { other: usize },
}

impl<S: Scalar> Msg<S> {
    fn render(&self) -> String {
        match self {
            Msg::Exceeds { what, value, bound } => format!("{what} {value} exceeds {bound}"),
            Msg::Late { arrival, latest } => format!("arrival {arrival} after latest {latest}"),
            Msg::PickupBeforeDelivery => "delivery after a pickup".to_string(),
            Msg::Forbidden { from } => format!("arc from {from} is forbidden"),
            Msg::After { other } => format!("must precede node {other}, which comes earlier"),
        }
    }
}

/// Route simulator bound to one instance and constraint set. Building it
/// indexes precedence pairs and node roles once; the checks themselves do
/// not allocate.
#[derive(Debug, Clone)]
pub struct Checker<'a, S> {
    pub inst: &'a Instance<S>,
    pub cs: &'a ConstraintSet<S>,
    pub dm: &'a DistanceMatrix<S>,
    depot: Vec<bool>,
    station: Vec<bool>,
    /// `preds[b]`: nodes that must come before `b` (0 unused).
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl<'a, S: Scalar> Checker<'a, S> {
    pub fn new(inst: &'a Instance<S>, cs: &'a ConstraintSet<S>, dm: &'a DistanceMatrix<S>) -> Self {
        let n = inst.dimension;
        let mut depot = vec![false; n + 1];
        for &d in &inst.depots {
            depot[d] = true;
        }
        let mut station = vec![false; n + 1];
        if let Some(e) = &cs.electric {
            for &s in &e.stations {
                station[s] = true;
            }
        } else if let Some(st) = &inst.stations {
            for &s in st {
                station[s] = true;
            }
        }
        let mut direct = vec![Vec::new(); n + 1];
        for &(a, b) in cs.precedence.iter().flatten() {
            if a != b && !depot[a] && !depot[b] {
                direct[a].push(b);
            }
        }
        // transitive closure, so that partial routes never box a node in
        let mut preds = vec![Vec::new(); n + 1];
        let mut succs = vec![Vec::new(); n + 1];
        if direct.iter().any(|d| !d.is_empty()) {
            let mut seen = vec![usize::MAX; n + 1];
            let mut stack = Vec::new();
            for a in 1..=n {
                stack.clear();
                stack.extend(direct[a].iter().copied());
                while let Some(b) = stack.pop() {
                    if seen[b] == a || b == a {
                        continue;
                    }
                    seen[b] = a;
                    succs[a].push(b);
                    preds[b].push(a);
                    stack.extend(direct[b].iter().copied());
                }
            }
            for list in preds.iter_mut().chain(succs.iter_mut()) {
                list.sort_unstable();
            }
        }
        Checker {
            inst,
            cs,
            dm,
            depot,
            station,
            preds,
            succs,
        }
    }

    pub fn is_depot(&self, v: usize) -> bool {
        self.depot[v]
    }

    pub fn is_station(&self, v: usize) -> bool {
        self.station[v]
    }

    pub fn is_customer(&self, v: usize) -> bool {
        !self.depot[v] && !self.station[v]
    }

    /// Nodes tied to `v` by a precedence pair, either direction.
    pub fn partners(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.preds[v].iter().chain(&self.succs[v]).copied()
    }

    pub fn preds_of(&self, v: usize) -> &[usize] {
        &self.preds[v]
    }

    pub fn succs_of(&self, v: usize) -> &[usize] {
        &self.succs[v]
    }

    pub fn has_precedence(&self) -> bool {
        self.preds.iter().any(|p| !p.is_empty())
    }

    /// Shape check for a full node sequence.
    pub fn validate_shape(&self, nodes: &[usize]) -> Result<(), RouteError> {
        let n = self.inst.dimension;
        if let Some(&bad) = nodes.iter().find(|&&v| v == 0 || v > n) {
            return Err(RouteError::UnknownNode(bad));
        }
        let (&start, rest) = nodes.split_first().ok_or(RouteError::Empty)?;
        if !self.depot[start] {
            return Err(RouteError::StartNotDepot(start));
        }
        let interior = if self.cs.open_route {
            rest
        } else {
            let (&end, inner) = rest.split_last().ok_or(RouteError::Empty)?;
            if end != start {
                return Err(RouteError::EndMismatch { start, end });
            }
            inner
        };
        if interior.is_empty() {
            return Err(RouteError::Empty);
        }
        if let Some(p) = interior.iter().position(|&v| self.depot[v]) {
            return Err(RouteError::DepotInside {
                position: p + 1,
                node: interior[p],
            });
        }
        Ok(())
    }

    /// Core forward simulation. `nodes` must already be well formed.
    fn run<I, F>(&self, nodes: I, mut sink: F) -> ControlFlow<()>
    where
        I: Iterator<Item = usize> + Clone,
        F: FnMut(Event<S>) -> ControlFlow<()>,
    {
        let inst = self.inst;
        let cs = self.cs;
        let zero = S::zero();

        // departure load and where cumulative linehaul first overflows
        let mut linehaul = zero;
        let mut overflow_at = None;
        if let Some(cap) = cs.capacity {
            for (p, v) in nodes.clone().enumerate() {
                if self.is_customer(v) {
                    let d = inst.demand(v);
                    if d > zero {
                        linehaul += d;
                        if overflow_at.is_none() && !within(linehaul, cap) {
                            overflow_at = Some(p);
                        }
                    }
                }
            }
        }

        let mut it = nodes.clone().enumerate();
        let Some((_, start)) = it.next() else {
            return ControlFlow::Continue(());
        };
        let energy = cs.electric.as_ref();
        let mut fuel = energy.map_or(zero, |e| e.fuel_capacity);
        let mut time = match (cs.time_windows, inst.time_window(start)) {
            (true, Some((e, _))) => e,
            _ => zero,
        };
        let mut load = linehaul;
        let mut dist = zero;
        let mut seen_pickup = false;
        sink(Event::Step(TraceStep {
            node: start,
            arrival: time,
            departure: time,
            load_after: load,
            fuel_after: fuel,
            cumulative_distance: dist,
        }))?;

        let mut prev = start;
        for (p, v) in it {
            let leg = self.dm.get(prev, v);
            if leg.is_infinite() {
                sink(Event::Breach {
                    kind: ConstraintKind::ForbiddenArc,
                    node: v,
                    message: Msg::Forbidden { from: prev },
                })?;
            } else {
                dist += leg;
            }
            let leg = if leg.is_finite() { leg } else { zero };
            let arrival = time + leg;

            if let Some(e) = energy {
                fuel -= e.consumption_rate * leg;
                if fuel < -S::slack(e.fuel_capacity) {
                    sink(Event::Breach {
                        kind: ConstraintKind::Electric,
                        node: v,
                        message: Msg::Exceeds {
                            what: "energy needed",
                            value: e.fuel_capacity - fuel,
                            bound: e.fuel_capacity,
                        },
                    })?;
                }
            }
            if let Some(limit) = cs.distance_limit {
                if !within(dist, limit) {
                    sink(Event::Breach {
                        kind: ConstraintKind::Distance,
                        node: v,
                        message: Msg::Exceeds {
                            what: "distance",
                            value: dist,
                            bound: limit,
                        },
                    })?;
                }
            }
            let mut begin = arrival;
            if cs.time_windows {
                if let Some((earliest, latest)) = inst.time_window(v) {
                    if !within(arrival, latest) {
                        sink(Event::Breach {
                            kind: ConstraintKind::TimeWindow,
                            node: v,
                            message: Msg::Late { arrival, latest },
                        })?;
                    }
                    begin = begin.max(earliest);
                }
            }
            let mut departure = begin;
            if !self.depot[v] {
                departure += inst.service_time(v);
            }
            if self.station[v] {
                if let Some(e) = energy {
                    departure += (e.fuel_capacity - fuel).max(zero) / e.refuel_rate;
                    fuel = e.fuel_capacity;
                }
            }

            if self.is_customer(v) {
                let d = inst.demand(v);
                if d > zero {
                    if seen_pickup && cs.backhaul == Some(BackhaulMode::Strict) {
                        sink(Event::Breach {
                            kind: ConstraintKind::BackhaulOrder,
                            node: v,
                            message: Msg::PickupBeforeDelivery,
                        })?;
                    }
                    load -= d;
                } else if d < zero {
                    seen_pickup = true;
                    load -= d;
                }
                if let Some(cap) = cs.capacity {
                    if overflow_at == Some(p) {
                        sink(Event::Breach {
                            kind: ConstraintKind::Capacity,
                            node: v,
                            message: Msg::Exceeds {
                                what: "linehaul load",
                                value: linehaul,
                                bound: cap,
                            },
                        })?;
                    } else if d < zero && !within(load, cap) {
                        sink(Event::Breach {
                            kind: ConstraintKind::Capacity,
                            node: v,
                            message: Msg::Exceeds {
                                what: "load",
                                value: load,
                                bound: cap,
                            },
                        })?;
                    }
                }
                for &a in &self.preds[v] {
                    if nodes.clone().skip(p + 1).any(|w| w == a) {
                        sink(Event::Breach {
                            kind: ConstraintKind::Precedence,
                            node: a,
                            message: Msg::After { other: v },
                        })?;
                    }
                }
            }

            sink(Event::Step(TraceStep {
                node: v,
                arrival,
                departure,
                load_after: load,
                fuel_after: fuel,
                cumulative_distance: dist,
            }))?;
            time = departure;
            prev = v;
        }
        ControlFlow::Continue(())
    }

    /// True when the well-formed sequence violates nothing. Stops at the
    /// first breach.
    pub fn feasible<I>(&self, nodes: I) -> bool
    where
        I: Iterator<Item = usize> + Clone,
    {
        self.run(nodes, |e| match e {
            Event::Breach { .. } => ControlFlow::Break(()),
            Event::Step(_) => ControlFlow::Continue(()),
        })
        .is_continue()
    }

    /// Index in the sequence and kind of the first violation, if any.
    pub fn first_breach<I>(&self, nodes: I) -> Option<(usize, ConstraintKind)>
    where
        I: Iterator<Item = usize> + Clone,
    {
        let mut pos = 0;
        let mut found = None;
        let _ = self.run(nodes, |e| match e {
            Event::Step(_) => {
                pos += 1;
                ControlFlow::Continue(())
            }
            Event::Breach { kind, .. } => {
                found = Some((pos, kind));
                ControlFlow::Break(())
            }
        });
        found
    }

    /// Full diagnostic trace of a route given as a node sequence.
    pub fn trace(&self, nodes: &[usize]) -> Result<RouteTrace<S>, RouteError> {
        self.validate_shape(nodes)?;
        let mut steps = Vec::with_capacity(nodes.len());
        let mut violations = Vec::new();
        let _ = self.run(nodes.iter().copied(), |e| {
            match e {
                Event::Step(s) => steps.push(s),
                Event::Breach { kind, node, message } => violations.push(Violation {
                    kind,
                    route: None,
                    node: Some(node),
                    message: message.render(),
                }),
            }
            ControlFlow::Continue(())
        });
        Ok(RouteTrace { steps, violations })
    }

    pub fn check_solution(&self, sol: &Solution<S>) -> FeasibilityReport {
        let mut violations = Vec::new();
        let n = self.inst.dimension;
        let mut route_of: Vec<Option<usize>> = vec![None; n + 1];
        let mut count = vec![0usize; n + 1];

        for (k, r) in sol.routes.iter().enumerate() {
            let rk = Some(k + 1);
            if r.depot == 0 || r.depot > n || !self.depot[r.depot] {
                violations.push(Violation {
                    kind: ConstraintKind::Depot,
                    route: rk,
                    node: Some(r.depot),
                    message: "route does not start at a depot".into(),
                });
                continue;
            }
            let nodes = r.nodes(self.cs.open_route);
            match self.trace(&nodes) {
                Err(e) => violations.push(Violation {
                    kind: ConstraintKind::Route,
                    route: rk,
                    node: None,
                    message: e.to_string(),
                }),
                Ok(t) => {
                    violations.extend(t.violations.into_iter().map(|mut v| {
                        v.route = rk;
                        v
                    }));
                }
            }
            for &v in &r.visits {
                if v >= 1 && v <= n && self.is_customer(v) {
                    count[v] += 1;
                    route_of[v] = Some(k + 1);
                }
            }
        }

        for v in 1..=n {
            if !self.is_customer(v) {
                continue;
            }
            match count[v] {
                1 => {}
                0 => violations.push(Violation {
                    kind: ConstraintKind::Visit,
                    route: None,
                    node: Some(v),
                    message: "missing".into(),
                }),
                c => violations.push(Violation {
                    kind: ConstraintKind::Visit,
                    route: None,
                    node: Some(v),
                    message: format!("duplicated ({c} visits)"),
                }),
            }
        }

        for b in 1..=n {
            for &a in &self.preds[b] {
                if let (Some(ra), Some(rb)) = (route_of[a], route_of[b]) {
                    if ra != rb {
                        violations.push(Violation {
                            kind: ConstraintKind::Precedence,
                            route: None,
                            node: Some(a),
                            message: format!("must precede node {b} on the same route (routes {ra} and {rb})"),
                        });
                    }
                }
            }
        }
        FeasibilityReport { violations }
    }
}

/// Simulates one route given as a full node sequence (depot first; depot
/// last unless open).
pub fn check_route<S: Scalar>(
    route: &[usize],
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
) -> Result<RouteTrace<S>, RouteError> {
    Checker::new(inst, cs, dm).trace(route)
}

pub fn check_solution<S: Scalar>(
    sol: &Solution<S>,
    inst: &Instance<S>,
    cs: &ConstraintSet<S>,
    dm: &DistanceMatrix<S>,
) -> FeasibilityReport {
    Checker::new(inst, cs, dm).check_solution(sol)
}
