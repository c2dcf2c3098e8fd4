use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// One vehicle: its depot and the nodes visited in between. Stations may
/// appear among `visits`; depots never do.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    pub depot: usize,
    pub visits: Vec<usize>,
}

impl Route {
    pub fn new(depot: usize, visits: Vec<usize>) -> Self {
        Route { depot, visits }
    }

    /// Full node sequence, with the return leg unless `open`.
    pub fn nodes(&self, open: bool) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.visits.len() + 2);
        v.push(self.depot);
        v.extend_from_slice(&self.visits);
        if !open {
            v.push(self.depot);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution<S = f64> {
    pub routes: Vec<Route>,
    pub cost: S,
}

impl<S: Scalar> Default for Solution<S> {
    fn default() -> Self {
        Solution {
            routes: Vec::new(),
            cost: S::zero(),
        }
    }
}

impl<S: Scalar> Solution<S> {
    pub fn new(routes: Vec<Route>) -> Self {
        Solution {
            routes,
            cost: S::zero(),
        }
    }

    /// Every visited node that is not a station, in route order.
    pub fn visited<'a>(&'a self, is_station: impl Fn(usize) -> bool + 'a) -> impl Iterator<Item = usize> + 'a {
        self.routes
            .iter()
            .flat_map(|r| r.visits.iter().copied())
            .filter(move |&v| !is_station(v))
    }

    /// CVRPLIB `.sol` text. Depots are omitted, stations kept.
    pub fn to_sol(&self) -> String {
        self.to_sol_with(false)
    }

    /// Like [`Solution::to_sol`]; with `depots` each route line starts with
    /// its depot id, which multi-depot files need to be read back.
    pub fn to_sol_with(&self, depots: bool) -> String {
        let mut out = String::new();
        for (k, r) in self.routes.iter().enumerate() {
            let lead = depots.then_some(r.depot);
            let ids: Vec<String> = lead.iter().chain(&r.visits).map(usize::to_string).collect();
            let _ = writeln!(out, "Route #{}: {}", k + 1, ids.join(" "));
        }
        let _ = writeln!(out, "Cost {}", self.cost);
        out
    }
}

impl<S: Scalar> fmt::Display for Solution<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolFormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Routes and the optional `Cost` line of a `.sol` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolFile<S> {
    pub routes: Vec<Vec<usize>>,
    pub cost: Option<S>,
}

impl<S: Scalar> SolFile<S> {
    /// Routes as [`Route`]s. A line that starts with a depot id is assigned
    /// to that depot; any other line goes to `default_depot`. The cost is
    /// left at zero.
    pub fn into_solution(self, is_depot: impl Fn(usize) -> bool, default_depot: usize) -> Solution<S> {
        let routes = self
            .routes
            .into_iter()
            .map(|ids| match ids.first() {
                Some(&d) if is_depot(d) => Route::new(d, ids[1..].to_vec()),
                _ => Route::new(default_depot, ids),
            })
            .collect();
        Solution::new(routes)
    }
}

pub fn parse_sol<S: Scalar>(text: &str) -> Result<SolFile<S>, SolFormatError> {
    let mut routes = Vec::new();
    let mut cost = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = |message: String| SolFormatError::Malformed { line: line_no, message };
        if let Some(rest) = t.strip_prefix("Route") {
            let (_, ids) = rest
                .split_once(':')
                .ok_or_else(|| bad("route line without ':'".into()))?;
            let route = ids
                .split_whitespace()
                .map(|tok| tok.parse::<usize>().map_err(|_| bad(format!("bad node id {tok:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            routes.push(route);
        } else if let Some(rest) = t.strip_prefix("Cost") {
            let v = rest.trim();
            cost = Some(v.parse::<S>().map_err(|_| bad(format!("bad cost {v:?}")))?);
        } else {
            return Err(bad(format!("unexpected line {t:?}")));
        }
    }
    Ok(SolFile { routes, cost })
}
