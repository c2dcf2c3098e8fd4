use std::fmt::Write as _;

use super::Instance;
use crate::scalar::Scalar;

/// How sections are closed in emitted text. All three parse identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Terminator {
    /// `-1` after DEPOT_SECTION and STATION_SECTION, `EOF` at the end.
    #[default]
    Canonical,
    /// `-1` after every section, no `EOF`.
    MinusOne,
    /// Sections end where the next header starts; no `-1`, no `EOF`.
    NextHeader,
    /// No `-1` anywhere; a final `EOF` line.
    Eof,
}

/// Canonical VRPLIB text for `inst`.
pub fn write_instance<S: Scalar>(inst: &Instance<S>) -> String {
    write_instance_with(inst, Terminator::Canonical)
}

pub fn write_instance_with<S: Scalar>(inst: &Instance<S>, term: Terminator) -> String {
    let mut out = String::new();
    let kw = |out: &mut String, key: &str, value: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{key} : {value}");
    };
    kw(&mut out, "NAME", &inst.name);
    if let Some(c) = &inst.comment {
        kw(&mut out, "COMMENT", c);
    }
    if let Some(t) = &inst.declared_type {
        kw(&mut out, "TYPE", t);
    }
    kw(&mut out, "DIMENSION", &inst.dimension);
    if let Some(t) = &inst.edge_weight_type {
        kw(&mut out, "EDGE_WEIGHT_TYPE", t);
    }
    if inst.explicit_weights.is_some() {
        kw(&mut out, "EDGE_WEIGHT_FORMAT", &"FULL_MATRIX");
    }
    let scalars = [
        ("CAPACITY", inst.capacity),
        ("DISTANCE_LIMIT", inst.distance_limit),
        ("FUEL_CAPACITY", inst.fuel_capacity),
        ("FUEL_CONSUMPTION_RATE", inst.fuel_consumption_rate),
        ("REFUEL_RATE", inst.refuel_rate),
    ];
    for (key, v) in scalars {
        if let Some(v) = v {
            kw(&mut out, key, &v);
        }
    }

    let close = |out: &mut String, list_section: bool| {
        let minus_one = match term {
            Terminator::Canonical => list_section,
            Terminator::MinusOne => true,
            Terminator::NextHeader | Terminator::Eof => false,
        };
        if minus_one {
            out.push_str("-1\n");
        }
    };

    if let Some(c) = &inst.coords {
        out.push_str("NODE_COORD_SECTION\n");
        for (i, p) in c.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, p[0], p[1]);
        }
        close(&mut out, false);
    }
    if let Some(w) = &inst.explicit_weights {
        out.push_str("EDGE_WEIGHT_SECTION\n");
        let n = inst.dimension;
        let minus_one = -S::one();
        // precedence pairs not already encoded as -1 entries
        let mut extra = vec![false; n * n];
        for &(a, b) in inst.precedence.iter().flatten() {
            extra[(b - 1) * n + (a - 1)] = true;
        }
        for &(i, j) in inst.forbidden_arcs.iter().flatten() {
            extra[(i - 1) * n + (j - 1)] = true;
        }
        for (i, row) in w.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if extra[i * n + j] && i != j {
                        minus_one.to_string()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        close(&mut out, false);
    }
    if let Some(d) = &inst.demands {
        out.push_str("DEMAND_SECTION\n");
        for (i, v) in d.iter().enumerate() {
            let _ = writeln!(out, "{} {}", i + 1, v);
        }
        close(&mut out, false);
    }
    if let Some(tw) = &inst.time_windows {
        out.push_str("TIME_WINDOW_SECTION\n");
        for (i, (a, b)) in tw.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, a, b);
        }
        close(&mut out, false);
    }
    if let Some(s) = &inst.service_times {
        out.push_str("SERVICE_TIME_SECTION\n");
        for (i, v) in s.iter().enumerate() {
            let _ = writeln!(out, "{} {}", i + 1, v);
        }
        close(&mut out, false);
    }
    if inst.depot_section {
        out.push_str("DEPOT_SECTION\n");
        for d in &inst.depots {
            let _ = writeln!(out, "{d}");
        }
        close(&mut out, true);
    }
    if let Some(st) = &inst.stations {
        out.push_str("STATION_SECTION\n");
        for s in st {
            let _ = writeln!(out, "{s}");
        }
        close(&mut out, true);
    }
    if matches!(term, Terminator::Canonical | Terminator::Eof) {
        out.push_str("EOF\n");
    }
    out
}
