//! Problem descriptions and their bracketed line format.

use std::fmt;

use serde::{Deserialize, Serialize};
use vrpkit_core::{BackhaulMode, Instance, VariantFlags};

/// One constraint as `(name, explanation)`, e.g. `("Capacity (C)", "...")`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintItem {
    pub name: String,
    pub explanation: String,
}

/// Problem type P, summary S, constraints K, inputs X, output contract Y and
/// objective Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDescription {
    pub problem_type: String,
    pub summary: String,
    pub constraints: Vec<ConstraintItem>,
    pub inputs: Vec<String>,
    pub outputs: String,
    pub objective: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError(pub String);

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Phase-one answer: summary, constraints, name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOne {
    pub summary: String,
    pub constraints: Vec<ConstraintItem>,
    pub problem_type: String,
}

/// Phase-two answer: inputs, output contract, objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTwo {
    pub inputs: Vec<String>,
    pub outputs: String,
    pub objective: String,
}

impl ProblemDescription {
    pub fn from_phases(one: PhaseOne, two: PhaseTwo) -> Self {
        ProblemDescription {
            problem_type: one.problem_type,
            summary: one.summary,
            constraints: one.constraints,
            inputs: two.inputs,
            outputs: two.outputs,
            objective: two.objective,
        }
    }

    pub fn phase_one(&self) -> PhaseOne {
        PhaseOne {
            summary: self.summary.clone(),
            constraints: self.constraints.clone(),
            problem_type: self.problem_type.clone(),
        }
    }

    pub fn phase_two(&self) -> PhaseTwo {
        PhaseTwo {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            objective: self.objective.clone(),
        }
    }

    /// Flags named by the constraint list.
    pub fn constraint_flags(&self) -> VariantFlags {
        flags_from_constraints(&self.constraints)
    }
}

impl PhaseOne {
    pub fn render(&self) -> String {
        let k: Vec<String> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}) {}: {}", i + 1, c.name, c.explanation))
            .collect();
        format!(
            "1) [{}]\n2) [{}]\n3) \"{}\"\n",
            self.summary,
            k.join(" "),
            self.problem_type
        )
    }
}

impl PhaseTwo {
    pub fn render(&self) -> String {
        format!(
            "4) [{}]\n5) [{}]\n6) [{}]\n",
            self.inputs.join(", "),
            self.outputs,
            self.objective
        )
    }
}

/// Content of the line tagged `tag)`, e.g. `"2"` for `2) [...]`.
fn tagged<'a>(text: &'a str, tag: &str) -> Option<&'a str> {
    let prefix = format!("{tag})");
    text.lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix(prefix.as_str()).map(str::trim))
}

fn bracketed(s: &str) -> Option<&str> {
    let (a, b) = (s.find('[')?, s.rfind(']')?);
    (a < b).then(|| s[a + 1..b].trim())
}

fn quoted(s: &str) -> Option<&str> {
    let s = s.trim();
    let inner = s.trim_matches(|c| matches!(c, '"' | '\u{201c}' | '\u{201d}' | '~' | '\'' | '`'));
    let was_quoted = inner.len() < s.len();
    (was_quoted && !inner.is_empty() && !inner.contains(char::is_whitespace)).then_some(inner)
}

pub fn parse_phase_one(text: &str) -> Result<PhaseOne, FormatError> {
    let line = |t: &str| tagged(text, t).ok_or_else(|| FormatError(format!("missing line {t})")));
    let summary = bracketed(line("1")?).ok_or_else(|| FormatError("description is not in [ ]".into()))?;
    let k = bracketed(line("2")?).ok_or_else(|| FormatError("constraints are not in [ ]".into()))?;
    let name = quoted(line("3")?).ok_or_else(|| FormatError("specific name is not quoted".into()))?;
    Ok(PhaseOne {
        summary: summary.to_string(),
        constraints: parse_constraint_list(k),
        problem_type: name.to_string(),
    })
}

pub fn parse_phase_two(text: &str) -> Result<PhaseTwo, FormatError> {
    let line = |t: &str| tagged(text, t).ok_or_else(|| FormatError(format!("missing line {t})")));
    let inputs = bracketed(line("4")?).ok_or_else(|| FormatError("input is not in [ ]".into()))?;
    let outputs = bracketed(line("5")?).ok_or_else(|| FormatError("output is not in [ ]".into()))?;
    let objective = bracketed(line("6")?).ok_or_else(|| FormatError("objective is not in [ ]".into()))?;
    let inputs: Vec<String> = inputs
        .split(',')
        .map(|s| s.trim().trim_matches(|c| matches!(c, '"' | '\'' | '`')).to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if inputs.is_empty() {
        return Err(FormatError("input list is empty".into()));
    }
    Ok(PhaseTwo {
        inputs,
        outputs: outputs.to_string(),
        objective: objective.to_string(),
    })
}

/// Splits `1) A: x. 2) B: y.` into items.
pub fn parse_constraint_list(s: &str) -> Vec<ConstraintItem> {
    let bytes = s.as_bytes();
    let mut starts = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b')' {
                starts.push((i, j + 1));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    if starts.is_empty() {
        return split_item(s).into_iter().collect();
    }
    starts
        .iter()
        .enumerate()
        .filter_map(|(k, &(_, body))| {
            let end = starts.get(k + 1).map_or(s.len(), |n| n.0);
            split_item(&s[body..end])
        })
        .collect()
}

fn split_item(s: &str) -> Option<ConstraintItem> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (name, explanation) = s.split_once(':').unwrap_or((s, ""));
    Some(ConstraintItem {
        name: name.trim().to_string(),
        explanation: explanation.trim().to_string(),
    })
}

/// Which variant flag a constraint name stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    Capacity,
    Open,
    Backhaul,
    Mixed,
    DistanceLimit,
    TimeWindows,
    MultiDepot,
    Electric,
    Precedence,
    Asymmetric,
    Visit,
    Depot,
}

pub fn tag_of(name: &str) -> Option<ConstraintTag> {
    use ConstraintTag::*;
    let lower = name.to_ascii_lowercase();
    let abbrev = lower
        .rfind('(')
        .and_then(|a| lower[a + 1..].find(')').map(|b| lower[a + 1..a + 1 + b].trim().to_string()));
    if let Some(a) = abbrev.as_deref() {
        let t = match a {
            "c" => Some(Capacity),
            "o" => Some(Open),
            "b" => Some(Backhaul),
            "m" | "mb" => Some(Mixed),
            "l" => Some(DistanceLimit),
            "tw" => Some(TimeWindows),
            "md" => Some(MultiDepot),
            "e" => Some(Electric),
            "p" => Some(Precedence),
            "a" => Some(Asymmetric),
            "v" => Some(Visit),
            "d" => Some(Depot),
            _ => None,
        };
        if t.is_some() {
            return t;
        }
    }
    let has = |k: &str| lower.contains(k);
    if has("mixed") {
        Some(Mixed)
    } else if has("backhaul") {
        Some(Backhaul)
    } else if has("capacity") {
        Some(Capacity)
    } else if has("open") {
        Some(Open)
    } else if has("distance limit") || has("duration limit") || has("length limit") {
        Some(DistanceLimit)
    } else if has("time window") {
        Some(TimeWindows)
    } else if has("multi-depot") || has("multi depot") || has("multiple depot") {
        Some(MultiDepot)
    } else if has("electric") || has("energy") || has("fuel") {
        Some(Electric)
    } else if has("precedence") {
        Some(Precedence)
    } else if has("asymmetric") {
        Some(Asymmetric)
    } else if has("visit") {
        Some(Visit)
    } else if has("depot") {
        Some(Depot)
    } else {
        None
    }
}

/// Reads a specific name, preferring the spelling that matches `expected`:
/// `VRPTW` is uncapacitated under the canonical reading and capacitated
/// under the older one.
pub fn name_flags(name: &str, expected: &VariantFlags) -> Option<VariantFlags> {
    let strict = VariantFlags::parse(name);
    let lenient = VariantFlags::parse_lenient(name);
    if strict.as_ref() == Some(expected) {
        strict
    } else {
        lenient.or(strict)
    }
}

pub fn flags_from_constraints(items: &[ConstraintItem]) -> VariantFlags {
    use ConstraintTag::*;
    let mut f = VariantFlags::default();
    let mut mixed = false;
    for it in items {
        match tag_of(&it.name) {
            Some(Capacity) => f.capacity = true,
            Some(Open) => f.open_route = true,
            Some(Backhaul) => {
                f.backhaul.get_or_insert(BackhaulMode::Strict);
            }
            Some(Mixed) => mixed = true,
            Some(DistanceLimit) => f.distance_limit = true,
            Some(TimeWindows) => f.time_windows = true,
            Some(MultiDepot) => f.multi_depot = true,
            Some(Electric) => f.electric = true,
            Some(Precedence) => f.precedence = true,
            Some(Asymmetric) => f.asymmetric = true,
            Some(Visit) | Some(Depot) | None => {}
        }
    }
    if mixed {
        f.backhaul = Some(BackhaulMode::Mixed);
    }
    f
}

/// Canonical input names, with accepted aliases.
pub const INPUT_NAMES: &[(&str, &[&str])] = &[
    ("depot", &["depots", "depot_section"]),
    ("node_coordinates", &["coordinates", "node_coords", "node_coord", "coords"]),
    ("edge_weights", &["edge_weight", "distance_matrix", "cost_matrix", "edge_weight_section"]),
    ("demands", &["demand"]),
    ("capacity", &["vehicle_capacity"]),
    ("distance_limit", &["route_length_limit", "duration_limit"]),
    ("time_windows", &["time_window"]),
    ("service_times", &["service_time"]),
    ("fuel_capacity", &["battery_capacity"]),
    ("fuel_consumption_rate", &["consumption_rate", "energy_consumption_rate"]),
    ("refuel_rate", &["recharge_rate", "charging_rate"]),
    ("stations", &["charging_stations", "station", "station_section"]),
    ("precedence", &["precedence_constraints", "precedences"]),
];

/// Canonical spelling of an input name, or `None` if unknown.
pub fn canonical_input(name: &str) -> Option<&'static str> {
    let n = name.trim().to_ascii_lowercase();
    INPUT_NAMES
        .iter()
        .find(|(c, aliases)| *c == n || aliases.contains(&n.as_str()))
        .map(|(c, _)| *c)
}

/// Whether `inst` has data for a canonical input name.
pub fn input_available(inst: &Instance<f64>, canonical: &str) -> bool {
    match canonical {
        "depot" => !inst.depots.is_empty(),
        "node_coordinates" => inst.coords.is_some(),
        "edge_weights" => inst.explicit_weights.is_some(),
        "demands" => inst.demands.is_some(),
        "capacity" => inst.capacity.is_some(),
        "distance_limit" => inst.distance_limit.is_some(),
        "time_windows" => inst.time_windows.is_some(),
        "service_times" => inst.service_times.is_some(),
        "fuel_capacity" => inst.fuel_capacity.is_some(),
        "fuel_consumption_rate" => inst.fuel_consumption_rate.is_some(),
        "refuel_rate" => inst.refuel_rate.is_some(),
        "stations" => inst.stations.is_some(),
        "precedence" => inst.precedence.is_some(),
        _ => false,
    }
}

/// Inputs a solver needs for `flags` on `inst`, in canonical order.
pub fn required_inputs(inst: &Instance<f64>, flags: &VariantFlags) -> Vec<String> {
    let mut x = vec!["depot"];
    if inst.explicit_weights.is_some() {
        x.push("edge_weights");
    } else {
        x.push("node_coordinates");
    }
    if flags.capacity || flags.backhaul.is_some() {
        x.extend(["demands", "capacity"]);
    }
    if flags.distance_limit {
        x.push("distance_limit");
    }
    if flags.time_windows {
        x.push("time_windows");
        if inst.service_times.is_some() {
            x.push("service_times");
        }
    }
    if flags.electric {
        x.extend(["fuel_capacity", "fuel_consumption_rate", "refuel_rate", "stations"]);
    }
    if flags.precedence {
        x.push("precedence");
    }
    x.into_iter().map(String::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GA1: &str = "1) [The Capacitated Vehicle Routing Problem (CVRP) involves routes.]\n\n\
        2) [1) Capacity (C): the total demand on any route cannot exceed vehicle capacity. \
        2) Visit (V): each customer is visited exactly once. 3) Depot (D): every route starts and ends at the depot.]\n\n\
        3) \"CVRP\"\n";

    #[test]
    fn reads_phase_one_sample() {
        let p = parse_phase_one(GA1).unwrap();
        assert_eq!(p.problem_type, "CVRP");
        assert_eq!(p.constraints.len(), 3);
        assert_eq!(p.constraints[0].name, "Capacity (C)");
        assert_eq!(p.constraints[2].name, "Depot (D)");
        assert!(p.summary.starts_with("The Capacitated"));
        assert_eq!(parse_phase_one(&p.render()).unwrap(), p);
    }

    #[test]
    fn reads_phase_two_sample() {
        let t = "4) [depot, node_coordinates, demands, vehicle_capacity]\n\n5) [A set of routes.]\n\n6) [Minimize the total travel distance.]";
        let p = parse_phase_two(t).unwrap();
        assert_eq!(p.inputs, vec!["depot", "node_coordinates", "demands", "vehicle_capacity"]);
        assert_eq!(canonical_input("vehicle_capacity"), Some("capacity"));
        assert_eq!(parse_phase_two(&p.render()).unwrap(), p);
    }

    #[test]
    fn missing_name_line_is_an_error() {
        let t = GA1.replace("3) \"CVRP\"", "");
        assert!(parse_phase_one(&t).is_err());
        assert!(parse_phase_one("1) [x]\n2) [y]\n3) CVRP\n").is_err());
    }

    #[test]
    fn constraint_names_map_to_flags() {
        let k = parse_constraint_list(
            "1) Capacity (C): a. 2) Backhaul (B): b. 3) Mixed (M): c. 4) Time Windows (TW): d. 5) Visit (V): e.",
        );
        let f = flags_from_constraints(&k);
        assert!(f.capacity && f.time_windows);
        assert_eq!(f.backhaul, Some(BackhaulMode::Mixed));
        assert_eq!(f.code(), "CVRPMBTW");
    }
}
