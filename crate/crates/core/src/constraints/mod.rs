//! Variant classification and feasibility checking.

mod check;
mod variant;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::vrplib::Instance;

pub use check::{
    check_route, check_solution, Checker, ConstraintKind, FeasibilityReport, RouteError,
    RouteTrace, TraceStep, Violation,
};
pub use variant::{BackhaulMode, VariantFlags};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams<S> {
    pub fuel_capacity: S,
    pub consumption_rate: S,
    pub refuel_rate: S,
    pub stations: Vec<usize>,
}

/// Active constraints with their bound parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet<S> {
    pub capacity: Option<S>,
    pub distance_limit: Option<S>,
    pub time_windows: bool,
    pub open_route: bool,
    pub multi_depot: bool,
    pub backhaul: Option<BackhaulMode>,
    pub electric: Option<EnergyParams<S>>,
    /// `(a, b)`: `a` before `b`, on the same route.
    pub precedence: Option<Vec<(usize, usize)>>,
    pub asymmetric: bool,
}

impl<S: Scalar> Default for ConstraintSet<S> {
    fn default() -> Self {
        ConstraintSet {
            capacity: None,
            distance_limit: None,
            time_windows: false,
            open_route: false,
            multi_depot: false,
            backhaul: None,
            electric: None,
            precedence: None,
            asymmetric: false,
        }
    }
}

impl<S: Scalar> ConstraintSet<S> {
    pub fn flags(&self) -> VariantFlags {
        VariantFlags {
            capacity: self.capacity.is_some(),
            open_route: self.open_route,
            backhaul: self.backhaul,
            distance_limit: self.distance_limit.is_some(),
            time_windows: self.time_windows,
            multi_depot: self.multi_depot,
            electric: self.electric.is_some(),
            asymmetric: self.asymmetric,
            precedence: self.precedence.is_some(),
        }
    }

    pub fn code(&self) -> String {
        self.flags().code()
    }
}

/// Where an open-route or backhaul-mode decision came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HintSource {
    Default,
    DeclaredType,
    Name,
    Override,
}

impl fmt::Display for HintSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HintSource::Default => "default",
            HintSource::DeclaredType => "declared TYPE",
            HintSource::Name => "NAME",
            HintSource::Override => "override",
        })
    }
}

/// Caller overrides for the two properties the file fields cannot express.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub open_route: Option<bool>,
    pub mixed_backhaul: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSignature<S> {
    pub code: String,
    pub set: ConstraintSet<S>,
    pub open_source: HintSource,
    pub backhaul_source: HintSource,
    /// Non-fatal remarks (ambiguities, ignored partial fields).
    pub notes: Vec<String>,
}

/// Variant codes found in TYPE, then NAME.
fn hints<S: Scalar>(inst: &Instance<S>) -> Vec<(HintSource, VariantFlags)> {
    let mut out = Vec::new();
    let sources = [
        (HintSource::DeclaredType, inst.declared_type.as_deref()),
        (HintSource::Name, Some(inst.name.as_str())),
    ];
    for (src, text) in sources {
        let Some(text) = text else { continue };
        let found = text
            .split(|c: char| !c.is_ascii_alphanumeric())
            .find_map(VariantFlags::parse_lenient);
        if let Some(f) = found {
            out.push((src, f));
        }
    }
    out
}

fn positive<S: Scalar>(v: Option<S>) -> Option<S> {
    v.filter(|x| *x > S::zero())
}

pub fn classify<S: Scalar>(inst: &Instance<S>) -> VariantSignature<S> {
    classify_with(inst, &ClassifyOptions::default())
}

/// Derives the constraint set from the fields present in `inst`. The
/// declared TYPE only contributes the open-route and mixed-backhaul hints.
pub fn classify_with<S: Scalar>(inst: &Instance<S>, opts: &ClassifyOptions) -> VariantSignature<S> {
    let mut notes = Vec::new();
    let hints = hints(inst);

    let capacity = match (inst.capacity, &inst.demands) {
        (Some(c), Some(_)) => Some(c),
        (Some(_), None) => {
            notes.push("CAPACITY without DEMAND_SECTION ignored".to_string());
            None
        }
        _ => None,
    };

    let has_pickups = inst
        .demands
        .as_ref()
        .is_some_and(|d| d.iter().any(|&x| x < S::zero()));

    let energy = [
        inst.fuel_capacity,
        inst.fuel_consumption_rate,
        inst.refuel_rate,
    ];
    let any_energy = energy.iter().any(Option::is_some) || inst.stations.is_some();
    let electric = match (
        positive(inst.fuel_capacity),
        positive(inst.fuel_consumption_rate),
        positive(inst.refuel_rate),
        &inst.stations,
    ) {
        (Some(fc), Some(rate), Some(rr), Some(st)) => Some(EnergyParams {
            fuel_capacity: fc,
            consumption_rate: rate,
            refuel_rate: rr,
            stations: st.clone(),
        }),
        _ => {
            if any_energy {
                notes.push("incomplete or non-positive energy parameters; electric constraint off".to_string());
            }
            None
        }
    };

    let precedence = inst.precedence.clone().filter(|p| !p.is_empty());

    let asymmetric = inst.explicit_weights.as_ref().is_some_and(|w| {
        (0..w.len()).any(|i| (i + 1..w.len()).any(|j| w[i][j] != w[j][i]))
    });

    let (open_route, open_source) = if let Some(o) = opts.open_route {
        (o, HintSource::Override)
    } else if precedence.is_some() {
        (true, HintSource::Default)
    } else if let Some((src, f)) = hints.first() {
        (f.open_route, *src)
    } else {
        (false, HintSource::Default)
    };

    let (backhaul, backhaul_source) = if !has_pickups {
        (None, HintSource::Default)
    } else if let Some(m) = opts.mixed_backhaul {
        let mode = if m { BackhaulMode::Mixed } else { BackhaulMode::Strict };
        (Some(mode), HintSource::Override)
    } else if let Some((src, mode)) = hints.iter().find_map(|(s, f)| f.backhaul.map(|b| (*s, b))) {
        (Some(mode), src)
    } else {
        notes.push(
            "negative demands: strict vs mixed backhaul is not expressible in fields; defaulted to strict (B)"
                .to_string(),
        );
        (Some(BackhaulMode::Strict), HintSource::Default)
    };

    let set = ConstraintSet {
        capacity,
        distance_limit: inst.distance_limit,
        time_windows: inst.time_windows.is_some(),
        open_route,
        multi_depot: inst.depots.len() > 1,
        backhaul,
        electric,
        precedence,
        asymmetric,
    };
    VariantSignature {
        code: set.code(),
        set,
        open_source,
        backhaul_source,
        notes,
    }
}
