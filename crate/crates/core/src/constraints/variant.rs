use std::fmt;

use serde::{Deserialize, Serialize};

/// How negative-demand (pickup) customers may be interleaved with deliveries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackhaulMode {
    /// All deliveries before any pickup on a route.
    Strict,
    /// Any order, load kept within `[0, capacity]`.
    Mixed,
}

/// Which constraint families are active, without their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VariantFlags {
    pub capacity: bool,
    pub open_route: bool,
    pub backhaul: Option<BackhaulMode>,
    pub distance_limit: bool,
    pub time_windows: bool,
    pub multi_depot: bool,
    pub electric: bool,
    pub asymmetric: bool,
    pub precedence: bool,
}

impl VariantFlags {
    fn is_plain_tour(&self) -> bool {
        !(self.capacity
            || self.open_route
            || self.backhaul.is_some()
            || self.distance_limit
            || self.time_windows
            || self.multi_depot
            || self.electric)
    }

    /// Canonical code: letters in the order MD, E, O, (A), C, B|MB, L, TW.
    pub fn code(&self) -> String {
        if self.precedence {
            return "SOP".into();
        }
        if self.is_plain_tour() {
            return if self.asymmetric { "ATSP" } else { "TSP" }.into();
        }
        let mut s = String::new();
        if self.multi_depot {
            s.push_str("MD");
        }
        if self.electric {
            s.push('E');
        }
        if self.open_route {
            s.push('O');
        }
        if self.asymmetric {
            s.push('A');
        }
        if self.capacity {
            s.push('C');
        }
        s.push_str("VRP");
        match self.backhaul {
            Some(BackhaulMode::Strict) => s.push('B'),
            Some(BackhaulMode::Mixed) => s.push_str("MB"),
            None => {}
        }
        if self.distance_limit {
            s.push('L');
        }
        if self.time_windows {
            s.push_str("TW");
        }
        s
    }

    /// Parses a canonical code. `VRP` without `C` means uncapacitated.
    pub fn parse(code: &str) -> Option<Self> {
        parse_code(code, false)
    }

    /// Also accepts the older spelling where capacity is implied
    /// (`OVRP`, `VRPTW`, `MDVRPB`, ...).
    pub fn parse_lenient(code: &str) -> Option<Self> {
        parse_code(code, true)
    }

    /// Single-letter constraint names as used in descriptions.
    pub fn letters(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.capacity {
            v.push("C");
        }
        if self.open_route {
            v.push("O");
        }
        match self.backhaul {
            Some(BackhaulMode::Strict) => v.push("B"),
            Some(BackhaulMode::Mixed) => v.push("MB"),
            None => {}
        }
        if self.distance_limit {
            v.push("L");
        }
        if self.time_windows {
            v.push("TW");
        }
        if self.multi_depot {
            v.push("MD");
        }
        if self.electric {
            v.push("E");
        }
        v
    }
}

impl fmt::Display for VariantFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

fn parse_code(code: &str, implied_capacity: bool) -> Option<VariantFlags> {
    let code = code.trim().to_ascii_uppercase();
    let mut flags = VariantFlags::default();
    match code.as_str() {
        "TSP" => return Some(flags),
        "ATSP" => {
            flags.asymmetric = true;
            return Some(flags);
        }
        "SOP" => {
            flags.precedence = true;
            flags.open_route = true;
            flags.asymmetric = true;
            return Some(flags);
        }
        _ => {}
    }
    let mut rest = code.as_str();
    let mut take = |p: &str| -> bool {
        match rest.strip_prefix(p) {
            Some(r) => {
                rest = r;
                true
            }
            None => false,
        }
    };
    flags.multi_depot = take("MD");
    flags.electric = take("E");
    flags.open_route = take("O");
    flags.asymmetric = take("A");
    flags.capacity = take("C");
    if !take("VRP") {
        return None;
    }
    if take("MB") {
        flags.backhaul = Some(BackhaulMode::Mixed);
    } else if take("B") {
        flags.backhaul = Some(BackhaulMode::Strict);
    }
    flags.distance_limit = take("L");
    flags.time_windows = take("TW");
    if !rest.is_empty() {
        return None;
    }
    if implied_capacity {
        flags.capacity = true;
    }
    Some(flags)
}
