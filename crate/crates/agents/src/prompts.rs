//! Prompt templates for the four agent roles, and the markers used to pull
//! their parts back out.

const CATEGORIES: &str = "\
- Electricity (E): electric vehicles are subject to fuel constraints. Each vehicle has a limited fuel capacity, fuel is consumed proportionally to the distance traveled related to fuel consumption rate, and vehicles must recharge at designated charging stations when necessary. Recharging consumes time related to the refuel rate and remaining fuel.
- Capacity (C): vehicles have limited capacity.
- Open Route (O): vehicles do not return to the depot.
- Backhaul (B): vehicles must handle linehaul (deliveries) first, then backhaul (pickups).
- Mixed (M): vehicles may mix deliveries and pickups in the same route.
- Distance Limit (L): each route has a maximum distance.
- Time Windows (TW): customers must be served within specified time intervals.
- Multi-depot (MD): there are multiple depots.
- Precedence (P): some nodes must be visited before others.
- Asymmetric (A): the travel cost from a to b may differ from b to a.
- Visit constraint (V): each customer may only be visited once.
- Depot constraint (D): routes must start and end at the depot.";

pub const VRP_MARKER: &str = "Below is the .vrp instance content:\n";
pub const PREVIOUS_MARKER: &str = "Here is your previous answer:\n";
pub const ISSUES_MARKER: &str = "\n\nThese issues were identified:\n";
pub const FIRST_MARKER: &str = "Here is the first answer:\n";
pub const SECOND_MARKER: &str = "\n\nHere is the second answer:\n";
pub const FILE_MARKER: &str = "\n\nHere is the VRP file:\n";
pub const ERROR_MARKER: &str = "The solver run failed and produced the following error message:\n";
pub const TASK_MARKER: &str = "\n\nYour task:";
pub const PHASE_TWO_TAG: &str = "4) [input]";
pub const REASK: &str = "\n\nYour previous reply could not be parsed. Reply again using the output format exactly.";

const PHASE_ONE_FORMAT: &str = "Output exactly three lines in this order:\n\n1) [problem description]\n\n2) [constraints]\n\n3) \"specific name\"\n\n";
const PHASE_TWO_FORMAT: &str = "Output exactly three lines in this order:\n\n4) [input]\n\n5) [output]\n\n6) [objective]\n\n";

pub fn describe_one(vrp: &str) -> String {
    format!(
        "We need to solve a VRP instance. I will provide you with the instance. Please analyze it carefully.\n\
First, give a concise description of the problem type in [ ], explaining what the problem is about.\n\n\
Second, identify its constraints and list them clearly in numbered format (1), 2), 3), ...) within [ ]. \
For each constraint, write both the abbreviation (if any) and a short explanation (e.g., 'Capacity (C): vehicles have limited capacity.'). \
Do not include instance-specific details like the exact number of nodes, vehicles, or capacity values.\n\n\
Typical constraint categories (not exhaustive):\n{CATEGORIES}\n\n\
Finally, write the standard problem type abbreviation (e.g., TSP, CVRP, CVRPL, CVRPTW, OCVRP, MDCVRP, ECVRP) enclosed in \" \".\n\
Check again whether the constraints fit the specific name; the Visit constraint should be present.\n\n\
{PHASE_ONE_FORMAT}{VRP_MARKER}{vrp}"
    )
}

pub fn describe_two(phase_one: &str, vrp: &str) -> String {
    format!(
        "We need to design an algorithm for the following VRP instance.\nThe details of the instance are:\n{phase_one}\n\
Based on this description and the instance contents, please specify:\n\n\
First, list the essential input elements an algorithm would require from the instance, including depot. Element names must not contain spaces; use underscores _ instead.\n\n\
Second, describe precisely what the algorithm should output (e.g., a best feasible set of vehicle routes that satisfy all listed constraints).\n\n\
Third, describe clearly the optimization objective (e.g., minimize total travel distance).\n\n\
Important: Each of the three answers (input, output, objective) must be enclosed in [ ] as shown. \
Do not include instance-specific details. Also verify that every listed input is actually provided by the instance content.\n\n\
{PHASE_TWO_FORMAT}{VRP_MARKER}{vrp}"
    )
}

pub fn revise_one(previous: &str, issues: &str, vrp: &str) -> String {
    format!(
        "We need to solve a VRP instance. Give a concise description of the problem type in [ ], \
list its constraints in numbered format within [ ] with abbreviation and short explanation, \
and write the standard problem type abbreviation enclosed in \" \". Ensure the abbreviation is consistent with the constraints, and include the Visit constraint.\n\n\
Reference constraint categories (not exhaustive):\n{CATEGORIES}\n\n\
{PREVIOUS_MARKER}{previous}{ISSUES_MARKER}{issues}\n\n\
Now, please correct your answer strictly according to the rules above.\n\n\
{PHASE_ONE_FORMAT}{VRP_MARKER}{vrp}"
    )
}

pub fn revise_two(phase_one: &str, previous: &str, issues: &str, vrp: &str) -> String {
    format!(
        "We need to design an algorithm for the following VRP instance.\nThe details of the instance are:\n{phase_one}\n\
List the essential elements an algorithm would require from the instance (the list must include depot; names use underscores, no spaces), \
describe precisely what the algorithm should output, and describe the optimization objective. Each answer must be enclosed in [ ].\n\n\
{PREVIOUS_MARKER}{previous}{ISSUES_MARKER}{issues}\n\n\
Now, please correct your answer strictly according to the rules above.\n\n\
{PHASE_TWO_FORMAT}{VRP_MARKER}{vrp}"
    )
}

pub fn judge(first: &str, second: &str, vrp: &str) -> String {
    format!(
        "You are a VRP expert. I will give you the original .vrp file content, a first answer \
(problem description + constraints + specific name) and a second answer (input, output, objective).\n\n\
For the first answer: check for contradictions between the problem description, the constraints, the specific name and the .vrp file. \
If any exist, treat the .vrp file as the ground truth and mark it as incorrect.\n\n\
For the second answer: check that input, output and objective are consistent with the instance and the constraints. \
Every input listed must be directly obtainable from the instance, and names must not contain spaces.\n\n\
If correct, return True with a short explanation. If wrong, return False with a short explanation and a suggestion. \
Write each explanation on a single line.\n\n\
Output format must be exactly 4 lines:\n\n1) right1: True/False\n\n2) jud1: explanation\n\n3) right2: True/False\n\n4) jud2: explanation\n\n\
{FIRST_MARKER}{first}{SECOND_MARKER}{second}{FILE_MARKER}{vrp}"
    )
}

pub fn analyze(description: &str, error: &str, vrp: &str) -> String {
    format!(
        "You are a strict reviewer and VRP expert.\n\nWe are working on a VRP problem instance.\n\n{description}\n\n\
Use the provided .vrp file content as the only ground truth for analysis. Do not invent or assume data that is not present in the instance.\n\n\
{ERROR_MARKER}{error}{TASK_MARKER} analyse the error message and explain why the error happened. \
Provide clear and concrete suggestions for how to fix the configuration. \
Write plain text on a single line without additional colons except the required jud: prefix.\n\n\
Output format must be exactly 1 line:\n\n1) jud: explanation and suggestions\n\n{VRP_MARKER}{vrp}"
    )
}

/// Text after the last occurrence of `marker`.
pub fn after<'a>(prompt: &'a str, marker: &str) -> Option<&'a str> {
    prompt.rfind(marker).map(|i| &prompt[i + marker.len()..])
}

/// Text between `start` and the next `end`.
pub fn between<'a>(prompt: &'a str, start: &str, end: &str) -> Option<&'a str> {
    let s = prompt.find(start)? + start.len();
    let e = prompt[s..].find(end)? + s;
    Some(&prompt[s..e])
}

/// The instance text embedded in any prompt.
pub fn instance_text(prompt: &str) -> Option<&str> {
    after(prompt, VRP_MARKER).or_else(|| after(prompt, FILE_MARKER))
}

pub fn is_phase_two(prompt: &str) -> bool {
    prompt.contains(PHASE_TWO_TAG)
}

/// `right1/jud1/right2/jud2` from a judge reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeReply {
    pub right1: bool,
    pub jud1: String,
    pub right2: bool,
    pub jud2: String,
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| {
        let l = l.trim();
        let at = l.find(key)?;
        Some(l[at + key.len()..].trim())
    })
}

fn truth(s: &str) -> Option<bool> {
    let w = s.split(|c: char| !c.is_ascii_alphabetic()).find(|w| !w.is_empty())?;
    match w.to_ascii_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

pub fn parse_judge(text: &str) -> Option<JudgeReply> {
    Some(JudgeReply {
        right1: truth(field(text, "right1:")?)?,
        jud1: field(text, "jud1:")?.to_string(),
        right2: truth(field(text, "right2:")?)?,
        jud2: field(text, "jud2:")?.to_string(),
    })
}

pub fn render_judge(r: &JudgeReply) -> String {
    let tf = |b: bool| if b { "True" } else { "False" };
    format!(
        "1) right1: {}\n2) jud1: {}\n3) right2: {}\n4) jud2: {}\n",
        tf(r.right1),
        r.jud1,
        tf(r.right2),
        r.jud2
    )
}

/// The single `jud:` line of an error-analysis reply.
pub fn parse_analysis(text: &str) -> Option<String> {
    field(text, "jud:").filter(|s| !s.is_empty()).map(String::from)
}
