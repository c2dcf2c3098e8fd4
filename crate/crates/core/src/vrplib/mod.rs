//! VRPLIB instance files: parsing, typed model, serialization and
//! distance matrices.
//!
//! Node ids are 1-based throughout, as in the files themselves. Per-node
//! vectors are stored 0-based (`coords[id - 1]`), and the accessor methods
//! on [`Instance`] take 1-based ids.

mod distance;
mod raw;
mod write;

use std::collections::BTreeSet;
use std::fmt;

use log::warn;
use thiserror::Error;

use crate::scalar::Scalar;

pub use distance::{build_distance_matrix, DistanceError, DistanceMatrix, Rounding};
pub use raw::{normalize_key, Entry, Field, RawInstance, Row};
pub use write::{write_instance, write_instance_with, Terminator};

use raw::{
    DEMAND_SECTION, DEPOT_SECTION, EDGE_WEIGHT_SECTION, NODE_COORD_SECTION, SERVICE_TIME_SECTION,
    STATION_SECTION, TIME_WINDOW_SECTION,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing DIMENSION")]
    MissingDimension,
    #[error("missing geometry: neither NODE_COORD_SECTION nor EDGE_WEIGHT_SECTION present")]
    MissingGeometry,
    #[error("line {line}: malformed numeric token {token:?}")]
    MalformedNumber { line: usize, token: String },
    #[error("section length mismatch in {section}: expected {expected} entries, found {found}")]
    SectionLength {
        section: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {section} row needs {expected} tokens")]
    ShortRow {
        section: String,
        line: usize,
        expected: usize,
    },
    #[error("line {line}: node id {id} in {section} is outside 1..={dimension}")]
    IdOutOfRange {
        section: String,
        line: usize,
        id: i64,
        dimension: usize,
    },
    #[error("line {line}: duplicate node id {id} in {section}")]
    DuplicateId {
        section: String,
        line: usize,
        id: usize,
    },
    #[error("line {line}: time window of node {node} has earliest > latest")]
    InvertedTimeWindow { line: usize, node: usize },
    #[error("depot {depot} has nonzero demand")]
    DepotDemand { depot: usize },
    #[error("unsupported {what}: {value}")]
    Unsupported { what: &'static str, value: String },
    #[error("line {line}: unexpected content {content:?}")]
    UnexpectedLine { line: usize, content: String },
}

/// Typed VRPLIB problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S = f64> {
    pub name: String,
    pub comment: Option<String>,
    /// TYPE as declared in the file. Reference only; classification uses the
    /// fields that are actually present.
    pub declared_type: Option<String>,
    pub dimension: usize,
    /// Normalized EDGE_WEIGHT_TYPE, e.g. `EUC_2D` or `EXPLICIT`.
    pub edge_weight_type: Option<String>,
    pub coords: Option<Vec<[S; 2]>>,
    /// Row-major full matrix as written in the file. SOP-style `-1`
    /// entries are kept verbatim and mirrored in `forbidden_arcs`.
    pub explicit_weights: Option<Vec<Vec<S>>>,
    pub demands: Option<Vec<S>>,
    pub capacity: Option<S>,
    pub distance_limit: Option<S>,
    pub time_windows: Option<Vec<(S, S)>>,
    pub service_times: Option<Vec<S>>,
    /// Never empty. Defaults to `[1]` when the file has no DEPOT_SECTION.
    pub depots: Vec<usize>,
    pub depot_section: bool,
    pub fuel_capacity: Option<S>,
    pub fuel_consumption_rate: Option<S>,
    pub refuel_rate: Option<S>,
    pub stations: Option<Vec<usize>>,
    /// `(a, b)`: `a` must be visited before `b`.
    pub precedence: Option<Vec<(usize, usize)>>,
    pub forbidden_arcs: Option<Vec<(usize, usize)>>,
}

impl<S: Scalar> Instance<S> {
    pub fn is_depot(&self, id: usize) -> bool {
        self.depots.contains(&id)
    }

    pub fn is_station(&self, id: usize) -> bool {
        self.stations.as_ref().is_some_and(|s| s.contains(&id))
    }

    /// All nodes that are neither depots nor stations, ascending.
    pub fn customers(&self) -> Vec<usize> {
        (1..=self.dimension)
            .filter(|&id| !self.is_depot(id) && !self.is_station(id))
            .collect()
    }

    pub fn demand(&self, id: usize) -> S {
        self.demands.as_ref().map_or(S::zero(), |d| d[id - 1])
    }

    pub fn service_time(&self, id: usize) -> S {
        self.service_times.as_ref().map_or(S::zero(), |s| s[id - 1])
    }

    pub fn time_window(&self, id: usize) -> Option<(S, S)> {
        self.time_windows.as_ref().map(|tw| tw[id - 1])
    }

    pub fn has_geometry(&self) -> bool {
        self.coords.is_some() || self.explicit_weights.is_some()
    }
}

impl<S: Scalar> fmt::Display for Instance<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_instance(self))
    }
}

/// Parse a complete VRPLIB file into an [`Instance`].
pub fn parse_instance<S: Scalar>(text: &str) -> Result<Instance<S>, ParseError> {
    let raw = RawInstance::parse(text)?;
    Instance::from_raw(&raw)
}

fn number<S: Scalar>(token: &str, line: usize) -> Result<S, ParseError> {
    token
        .parse::<S>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ParseError::MalformedNumber {
            line,
            token: token.to_string(),
        })
}

fn node_id(token: &str, line: usize, section: &str, dimension: usize) -> Result<usize, ParseError> {
    let id: i64 = token.parse().map_err(|_| ParseError::MalformedNumber {
        line,
        token: token.to_string(),
    })?;
    if id < 1 || id as usize > dimension {
        return Err(ParseError::IdOutOfRange {
            section: section.to_string(),
            line,
            id,
            dimension,
        });
    }
    Ok(id as usize)
}

/// Reads a node-indexed section (`id v1 v2 ...`) into a dense per-node vector.
fn per_node<S: Scalar, T: Copy>(
    rows: &[Row],
    section: &str,
    dimension: usize,
    width: usize,
    make: impl Fn(&[S]) -> T,
) -> Result<Vec<T>, ParseError> {
    if rows.len() != dimension {
        return Err(ParseError::SectionLength {
            section: section.to_string(),
            expected: dimension,
            found: rows.len(),
        });
    }
    let mut out: Vec<Option<T>> = vec![None; dimension];
    let mut values = Vec::with_capacity(width);
    for row in rows {
        if row.tokens.len() < width + 1 {
            return Err(ParseError::ShortRow {
                section: section.to_string(),
                line: row.line,
                expected: width + 1,
            });
        }
        let id = node_id(&row.tokens[0], row.line, section, dimension)?;
        values.clear();
        for tok in &row.tokens[1..=width] {
            values.push(number::<S>(tok, row.line)?);
        }
        if out[id - 1].is_some() {
            return Err(ParseError::DuplicateId {
                section: section.to_string(),
                line: row.line,
                id,
            });
        }
        out[id - 1] = Some(make(&values));
    }
    // length == dimension and no duplicates, so every slot is filled
    Ok(out.into_iter().map(|v| v.unwrap()).collect())
}

fn id_list(rows: &[Row], section: &str, dimension: usize) -> Result<Vec<usize>, ParseError> {
    let mut seen = BTreeSet::new();
    let mut ids = Vec::new();
    for row in rows {
        for tok in &row.tokens {
            let id = node_id(tok, row.line, section, dimension)?;
            if !seen.insert(id) {
                return Err(ParseError::DuplicateId {
                    section: section.to_string(),
                    line: row.line,
                    id,
                });
            }
            ids.push(id);
        }
    }
    Ok(ids)
}

type Matrix<S> = Vec<Vec<S>>;
type Arcs = Vec<(usize, usize)>;

fn full_matrix<S: Scalar>(
    rows: &[Row],
    dimension: usize,
) -> Result<(Matrix<S>, Option<(Arcs, Arcs)>), ParseError> {
    let mut tokens: Vec<(&str, usize)> = rows
        .iter()
        .flat_map(|r| r.tokens.iter().map(move |t| (t.as_str(), r.line)))
        .collect();
    let n2 = dimension * dimension;
    // TSPLIB SOP files open the matrix with the dimension itself.
    if tokens.len() == n2 + 1 && tokens[0].0.parse::<usize>().ok() == Some(dimension) {
        tokens.remove(0);
    }
    if tokens.len() != n2 {
        return Err(ParseError::SectionLength {
            section: EDGE_WEIGHT_SECTION.to_string(),
            expected: n2,
            found: tokens.len(),
        });
    }
    let mut matrix = vec![Vec::with_capacity(dimension); dimension];
    let mut forbidden = Vec::new();
    let minus_one = -S::one();
    for (k, (tok, line)) in tokens.into_iter().enumerate() {
        let v = number::<S>(tok, line)?;
        let (i, j) = (k / dimension, k % dimension);
        if i != j && v == minus_one {
            forbidden.push((i + 1, j + 1));
        }
        matrix[i].push(v);
    }
    let arcs = if forbidden.is_empty() {
        None
    } else {
        let mut precedence: Vec<(usize, usize)> = forbidden.iter().map(|&(i, j)| (j, i)).collect();
        precedence.sort_unstable();
        Some((forbidden, precedence))
    };
    Ok((matrix, arcs))
}

impl<S: Scalar> Instance<S> {
    pub fn from_raw(raw: &RawInstance) -> Result<Self, ParseError> {
        let kw = |k: &str| raw.keyword(k);
        let dim_field = kw("DIMENSION").ok_or(ParseError::MissingDimension)?;
        let dimension: usize =
            dim_field
                .value
                .trim()
                .parse()
                .map_err(|_| ParseError::MalformedNumber {
                    line: dim_field.line,
                    token: dim_field.value.clone(),
                })?;
        if dimension == 0 {
            return Err(ParseError::MalformedNumber {
                line: dim_field.line,
                token: dim_field.value.clone(),
            });
        }
        let scalar_kw = |k: &str| -> Result<Option<S>, ParseError> {
            kw(k).map(|f| number::<S>(f.value.trim(), f.line)).transpose()
        };

        for name in raw.unknown_sections() {
            warn!("ignoring unknown section {name}");
        }

        let edge_weight_type = kw("EDGE_WEIGHT_TYPE").map(|f| normalize_key(&f.value));
        if let Some(t) = edge_weight_type.as_deref() {
            if t != "EUC_2D" && t != "EXPLICIT" {
                return Err(ParseError::Unsupported {
                    what: "EDGE_WEIGHT_TYPE",
                    value: t.to_string(),
                });
            }
        }
        if let Some(f) = kw("EDGE_WEIGHT_FORMAT") {
            let fmt = normalize_key(&f.value);
            if fmt != "FULL_MATRIX" {
                return Err(ParseError::Unsupported {
                    what: "EDGE_WEIGHT_FORMAT",
                    value: fmt,
                });
            }
        }

        let coords = raw
            .section(NODE_COORD_SECTION)
            .map(|rows| per_node::<S, _>(rows, NODE_COORD_SECTION, dimension, 2, |v| [v[0], v[1]]))
            .transpose()?;
        let (explicit_weights, arcs) = match raw.section(EDGE_WEIGHT_SECTION) {
            Some(rows) => {
                let (m, arcs) = full_matrix::<S>(rows, dimension)?;
                (Some(m), arcs)
            }
            None => (None, None),
        };
        if coords.is_none() && explicit_weights.is_none() {
            return Err(ParseError::MissingGeometry);
        }
        let (forbidden_arcs, precedence) = match arcs {
            Some((f, p)) => (Some(f), Some(p)),
            None => (None, None),
        };

        let demands = raw
            .section(DEMAND_SECTION)
            .map(|rows| per_node::<S, _>(rows, DEMAND_SECTION, dimension, 1, |v| v[0]))
            .transpose()?;
        let time_windows = match raw.section(TIME_WINDOW_SECTION) {
            Some(rows) => {
                let tw = per_node::<S, _>(rows, TIME_WINDOW_SECTION, dimension, 2, |v| (v[0], v[1]))?;
                if let Some(node) = tw.iter().position(|&(a, b)| a > b) {
                    let line = rows
                        .iter()
                        .find(|r| r.tokens[0].parse::<usize>().ok() == Some(node + 1))
                        .map_or(0, |r| r.line);
                    return Err(ParseError::InvertedTimeWindow { line, node: node + 1 });
                }
                Some(tw)
            }
            None => None,
        };
        let service_times = raw
            .section(SERVICE_TIME_SECTION)
            .map(|rows| per_node::<S, _>(rows, SERVICE_TIME_SECTION, dimension, 1, |v| v[0]))
            .transpose()?;

        let (depots, depot_section) = match raw.section(DEPOT_SECTION) {
            Some(rows) => {
                let ids = id_list(rows, DEPOT_SECTION, dimension)?;
                if ids.is_empty() {
                    (vec![1], true)
                } else {
                    (ids, true)
                }
            }
            None => (vec![1], false),
        };
        let stations = raw
            .section(STATION_SECTION)
            .map(|rows| id_list(rows, STATION_SECTION, dimension))
            .transpose()?;

        if let Some(d) = &demands {
            if let Some(&depot) = depots.iter().find(|&&dep| d[dep - 1] != S::zero()) {
                return Err(ParseError::DepotDemand { depot });
            }
        }

        Ok(Instance {
            name: kw("NAME").map(|f| f.value.clone()).unwrap_or_default(),
            comment: kw("COMMENT").map(|f| f.value.clone()),
            declared_type: kw("TYPE").map(|f| f.value.clone()),
            dimension,
            edge_weight_type,
            coords,
            explicit_weights,
            demands,
            capacity: scalar_kw("CAPACITY")?,
            distance_limit: scalar_kw("DISTANCE_LIMIT")?,
            time_windows,
            service_times,
            depots,
            depot_section,
            fuel_capacity: scalar_kw("FUEL_CAPACITY")?,
            fuel_consumption_rate: scalar_kw("FUEL_CONSUMPTION_RATE")?,
            refuel_rate: scalar_kw("REFUEL_RATE")?,
            stations,
            precedence,
            forbidden_arcs,
        })
    }
}
