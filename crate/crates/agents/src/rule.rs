//! Deterministic provider: answers every role from the instance itself.

use vrpkit_core::{classify_with, parse_instance, BackhaulMode, ClassifyOptions, Instance, VariantFlags};

use crate::description::{
    canonical_input, input_available, parse_phase_one, parse_phase_two, required_inputs, tag_of, ConstraintItem,
    ConstraintTag, PhaseOne, PhaseTwo, ProblemDescription,
};
use crate::prompts::{self, JudgeReply};
use crate::provider::{Provider, ProviderError, Role};

#[derive(Debug, Clone, Default)]
pub struct RuleBasedProvider {
    opts: ClassifyOptions,
}

impl RuleBasedProvider {
    pub fn new(opts: ClassifyOptions) -> Self {
        RuleBasedProvider { opts }
    }
}

fn instance_of(prompt: &str) -> Result<Instance<f64>, ProviderError> {
    let text = prompts::instance_text(prompt)
        .ok_or_else(|| ProviderError::Unavailable("prompt carries no instance".into()))?;
    parse_instance(text).map_err(|e| ProviderError::Unavailable(format!("instance does not parse: {e}")))
}

impl Provider for RuleBasedProvider {
    fn name(&self) -> &str {
        "rule"
    }

    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError> {
        match role {
            Role::Ga | Role::Ra => {
                let inst = instance_of(prompt)?;
                let d = derive_description(&inst, &self.opts);
                Ok(if prompts::is_phase_two(prompt) {
                    d.phase_two().render()
                } else {
                    d.phase_one().render()
                })
            }
            Role::Ja => {
                let inst = instance_of(prompt)?;
                let first = prompts::between(prompt, prompts::FIRST_MARKER, prompts::SECOND_MARKER).unwrap_or("");
                let second = prompts::between(prompt, prompts::SECOND_MARKER, prompts::FILE_MARKER).unwrap_or("");
                Ok(prompts::render_judge(&judge_answers(first, second, &inst, &self.opts)))
            }
            Role::Eaa => {
                let error = prompts::between(prompt, prompts::ERROR_MARKER, prompts::TASK_MARKER)
                    .ok_or_else(|| ProviderError::Unavailable("prompt carries no error message".into()))?;
                Ok(format!("jud: {}\n", canned_analysis(error)))
            }
        }
    }
}

fn item(name: &str, explanation: &str) -> ConstraintItem {
    ConstraintItem {
        name: name.into(),
        explanation: explanation.into(),
    }
}

fn constraint_items(f: &VariantFlags) -> Vec<ConstraintItem> {
    let mut k = Vec::new();
    if f.capacity {
        k.push(item("Capacity (C)", "the load carried by a vehicle never exceeds its capacity."));
    }
    match f.backhaul {
        Some(BackhaulMode::Strict) => k.push(item(
            "Backhaul (B)",
            "every delivery on a route is served before any pickup.",
        )),
        Some(BackhaulMode::Mixed) => k.push(item(
            "Mixed (M)",
            "deliveries and pickups may be interleaved while the load stays within capacity.",
        )),
        None => {}
    }
    if f.open_route {
        k.push(item("Open Route (O)", "vehicles do not return to the depot after the last stop."));
    }
    if f.distance_limit {
        k.push(item("Distance Limit (L)", "the length of each route is bounded."));
    }
    if f.time_windows {
        k.push(item(
            "Time Windows (TW)",
            "service at each customer starts within its time window, waiting when early.",
        ));
    }
    if f.multi_depot {
        k.push(item("Multi-depot (MD)", "each route belongs to one of several depots."));
    }
    if f.electric {
        k.push(item(
            "Electricity (E)",
            "energy is consumed in proportion to distance and recharged to full at charging stations.",
        ));
    }
    if f.precedence {
        k.push(item("Precedence (P)", "some nodes must be visited before others."));
    }
    if f.asymmetric {
        k.push(item("Asymmetric (A)", "travel costs depend on the direction of travel."));
    }
    k.push(item("Visit (V)", "each customer is visited exactly once."));
    k.push(if f.open_route {
        item("Depot (D)", "every route starts at a depot.")
    } else {
        item("Depot (D)", "every route starts and ends at the same depot.")
    });
    k
}

fn summary(f: &VariantFlags, code: &str) -> String {
    if !f.capacity && f.backhaul.is_none() {
        return if f.precedence {
            format!("The sequential ordering problem ({code}) asks for the cheapest path from the first node through all nodes that respects the precedence relations.")
        } else if f.asymmetric {
            format!("The asymmetric travelling salesman problem ({code}) asks for the shortest tour through all nodes when travel costs depend on direction.")
        } else {
            format!("The travelling salesman problem ({code}) asks for the shortest tour that visits every node once and returns to the start.")
        };
    }
    let mut extras = Vec::new();
    if f.open_route {
        extras.push("routes end at their last customer");
    }
    match f.backhaul {
        Some(BackhaulMode::Strict) => extras.push("pickups follow all deliveries"),
        Some(BackhaulMode::Mixed) => extras.push("pickups and deliveries may mix"),
        None => {}
    }
    if f.distance_limit {
        extras.push("route length is limited");
    }
    if f.time_windows {
        extras.push("customers have time windows");
    }
    if f.multi_depot {
        extras.push("vehicles are based at several depots");
    }
    if f.electric {
        extras.push("vehicles must recharge at stations");
    }
    if f.asymmetric {
        extras.push("travel costs are asymmetric");
    }
    let tail = if extras.is_empty() {
        String::new()
    } else {
        format!(", where {}", extras.join(", "))
    };
    format!("The capacitated vehicle routing problem variant {code} asks for least-distance vehicle routes that serve every customer once without exceeding vehicle capacity{tail}.")
}

/// Description implied by the instance's fields.
pub fn derive_description(inst: &Instance<f64>, opts: &ClassifyOptions) -> ProblemDescription {
    let sig = classify_with(inst, opts);
    let f = sig.set.flags();
    let outputs = if !f.capacity && f.backhaul.is_none() {
        if f.open_route {
            "A single path starting at the first node that visits every node exactly once and respects all listed constraints."
        } else {
            "A single tour that visits every node exactly once and returns to the start."
        }
    } else if f.open_route {
        "A set of vehicle routes, each starting at a depot and ending at its last customer, visiting every customer exactly once and respecting all listed constraints."
    } else {
        "A set of vehicle routes, each starting and ending at the same depot, visiting every customer exactly once and respecting all listed constraints."
    };
    ProblemDescription {
        problem_type: sig.code.clone(),
        summary: summary(&f, &sig.code),
        constraints: constraint_items(&f),
        inputs: required_inputs(inst, &f),
        outputs: outputs.into(),
        objective: "Minimize the total travel distance.".into(),
    }
}

fn check_first(one: &PhaseOne, expected: &VariantFlags) -> Result<String, String> {
    let want = expected.code();
    let named = crate::description::name_flags(&one.problem_type, expected)
        .ok_or_else(|| format!("the specific name {} is not a known variant code; to fix, use \"{want}\"", one.problem_type))?;
    if named != *expected {
        return Err(format!(
            "the specific name {} conflicts with the instance fields, which describe {want}; to fix, use \"{want}\" and its constraints",
            one.problem_type
        ));
    }
    let listed = crate::description::flags_from_constraints(&one.constraints);
    if listed != named {
        return Err(format!(
            "the constraints describe {} but the specific name is {}; to fix, list exactly the constraints of {want}",
            listed.code(),
            one.problem_type
        ));
    }
    if !one.constraints.iter().any(|c| tag_of(&c.name) == Some(ConstraintTag::Visit)) {
        return Err("the Visit constraint is missing; to fix, add Visit (V)".into());
    }
    if one.summary.trim().is_empty() {
        return Err("the problem description is empty; to fix, describe the problem".into());
    }
    Ok(format!(
        "The first answer matches the instance, with consistent constraints and the specific name {want}."
    ))
}

fn check_second(two: &PhaseTwo, inst: &Instance<f64>, expected: &VariantFlags) -> Result<String, String> {
    let mut given = Vec::new();
    for name in &two.inputs {
        if name.contains(char::is_whitespace) {
            return Err(format!("the input name '{name}' contains spaces; to fix, use underscores"));
        }
        match canonical_input(name) {
            Some(c) if input_available(inst, c) => given.push(c),
            _ => {
                return Err(format!(
                    "the input {name} is not provided by the instance; to fix, remove {name} from the input"
                ))
            }
        }
    }
    let missing: Vec<String> = required_inputs(inst, expected)
        .into_iter()
        .filter(|r| !given.contains(&r.as_str()))
        .collect();
    if !missing.is_empty() {
        return Err(format!(
            "it omits {} from the input; to fix, add {}",
            missing.join(", "),
            missing.join(", ")
        ));
    }
    if two.outputs.trim().is_empty() || two.objective.trim().is_empty() {
        return Err("the output or objective is empty; to fix, state the routes to return and minimize total distance".into());
    }
    Ok("The second answer lists inputs the instance provides, a feasible route output and a distance objective.".into())
}

/// Judges both answers against the instance, which is the reference.
pub fn judge_answers(first: &str, second: &str, inst: &Instance<f64>, opts: &ClassifyOptions) -> JudgeReply {
    let expected = classify_with(inst, opts).set.flags();
    let one = parse_phase_one(first)
        .map_err(|e| format!("the first answer is not in the three-line format ({e}); to fix, follow the format"))
        .and_then(|p| check_first(&p, &expected));
    let two = parse_phase_two(second)
        .map_err(|e| format!("the second answer is not in the three-line format ({e}); to fix, follow the format"))
        .and_then(|p| check_second(&p, inst, &expected));
    let (right1, jud1) = match one {
        Ok(s) => (true, s),
        Err(s) => (false, s),
    };
    let (right2, jud2) = match two {
        Ok(s) => (true, s),
        Err(s) => (false, s),
    };
    JudgeReply {
        right1,
        jud1: jud1.replace('\n', " "),
        right2,
        jud2: jud2.replace('\n', " "),
    }
}

/// Canned diagnosis keyed on the violated constraint named in `error`.
pub fn canned_analysis(error: &str) -> String {
    let e = error.to_ascii_lowercase();
    let pick = |keys: &[&str]| keys.iter().any(|k| e.contains(k));
    if pick(&["timed out", "time limit", "timeout"]) {
        "The algorithm timed out, so the search is too expensive for the time budget; to fix, reduce the iteration count or the destroy ratio".into()
    } else if pick(&["backhaul order"]) {
        "A delivery follows a pickup, which means the description and the backhaul flag disagree; to fix, check whether the instance allows mixed backhauls (MB) rather than strict ones (B) and revise the problem type".into()
    } else if pick(&["capacity"]) {
        "A route exceeds vehicle capacity; to fix, verify the capacity flag and that demands were parsed with the right signs".into()
    } else if pick(&["time window"]) {
        "A customer is reached after its latest time; to fix, verify the time window flag, the service times and that the depot window allows the return".into()
    } else if pick(&["electric", "energy"]) {
        "The battery runs empty on a route; to fix, verify the fuel capacity, consumption rate and that charging stations are listed".into()
    } else if pick(&["distance"]) {
        "A route is longer than the distance limit; to fix, verify the distance limit flag and value".into()
    } else if pick(&["precedence"]) {
        "A precedence relation is broken; to fix, verify the precedence flag and that related nodes share a route".into()
    } else if pick(&["forbidden arc"]) {
        "A route uses a forbidden arc; to fix, verify the edge weights and precedence encoding".into()
    } else if pick(&["visit", "missing", "duplicated"]) {
        "A customer is missing or served twice; to fix, verify the customer set and the depot and station lists".into()
    } else {
        "The failure does not name a constraint; to fix, re-derive the problem type from the instance fields".into()
    }
}
