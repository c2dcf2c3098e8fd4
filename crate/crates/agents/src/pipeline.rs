//! Instance text to solution: describe, judge and revise until accepted,
//! reuse or store the buffered configuration, solve, and on failure let the
//! error-analysis role steer another revision.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vrpkit_core::{
    check_solution, build_distance_matrix, classify_with, parse_instance, solve_with_matrix, BackhaulMode,
    ClassifyOptions, ConstraintSet, Instance, ParseError, Rounding, SearchStats, Solution, SolverConfig, SolverError,
    VariantFlags,
};

use crate::buffer::{signature, Buffer, BufferEntry};
use crate::description::{
    canonical_input, input_available, name_flags, parse_phase_one, parse_phase_two, required_inputs, PhaseOne, PhaseTwo,
    ProblemDescription,
};
use crate::prompts;
use crate::provider::{Provider, ProviderError, Role};
use crate::transcript::{Transcript, TranscriptEntry};

/// Verdict of the judgment role on a description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub verdict: bool,
    /// Why, on one line; nonempty whenever `verdict` is false.
    pub explanation: String,
    /// What to change, on one line; may be empty when accepted.
    pub suggestions: String,
    pub first_ok: bool,
    pub second_ok: bool,
    pub first_note: String,
    pub second_note: String,
}

fn fix_part(note: &str) -> &str {
    note.split_once("to fix,").map_or(note, |(_, s)| s).trim()
}

impl Judgment {
    pub fn from_reply(r: &prompts::JudgeReply) -> Self {
        let verdict = r.right1 && r.right2;
        let failing: Vec<&str> = [(r.right1, r.jud1.as_str()), (r.right2, r.jud2.as_str())]
            .into_iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, s)| s)
            .collect();
        let explanation = if verdict {
            format!("{} {}", r.jud1, r.jud2).trim().to_string()
        } else {
            let e = failing.join(" ");
            if e.trim().is_empty() {
                "rejected without explanation".into()
            } else {
                e
            }
        };
        let suggestions = failing.iter().map(|s| fix_part(s)).collect::<Vec<_>>().join("; ");
        Judgment {
            verdict,
            explanation,
            suggestions,
            first_ok: r.right1,
            second_ok: r.right2,
            first_note: r.jud1.clone(),
            second_note: r.jud2.clone(),
        }
    }

    /// A rejection of both answers with one note.
    pub fn rejected(note: impl Into<String>) -> Self {
        let note = note.into();
        Judgment {
            verdict: false,
            explanation: note.clone(),
            suggestions: fix_part(&note).to_string(),
            first_ok: false,
            second_ok: false,
            first_note: note.clone(),
            second_note: note,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineErrorKind {
    #[error("cannot read instance: {0}")]
    Io(String),
    #[error("instance does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("unparseable {role} reply after one re-ask: {reason}")]
    Unparseable { role: Role, reason: String },
    #[error("description not accepted after {rounds} rounds: {last}")]
    DescriptionRejected { rounds: usize, last: String },
    #[error("no feasible solution after {attempts} attempts: {last}")]
    SolveFailed { attempts: usize, last: SolverError },
    #[error("buffer write failed: {0}")]
    Buffer(String),
}

/// A failed run, with everything that was said up to the failure.
#[derive(Debug, Error)]
#[error("{kind}")]
pub struct PipelineError {
    pub kind: PipelineErrorKind,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub max_rounds: usize,
    /// Command-line overrides; they win over description hints.
    pub classify: ClassifyOptions,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_rounds: 5,
            classify: ClassifyOptions::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub instance: Instance<f64>,
    pub description: ProblemDescription,
    pub config: ConstraintSet<f64>,
    pub solution: Solution<f64>,
    pub stats: SearchStats<f64>,
    pub transcript: Transcript,
    pub entry: BufferEntry,
    pub buffer_hit: bool,
}

/// Provider calls for one run, recorded into a transcript.
pub struct Agents<'p> {
    provider: &'p mut dyn Provider,
    pub transcript: Transcript,
    pub round: usize,
}

impl<'p> Agents<'p> {
    pub fn new(provider: &'p mut dyn Provider) -> Self {
        Agents {
            provider,
            transcript: Transcript::default(),
            round: 1,
        }
    }

    fn call(&mut self, role: Role, prompt: String) -> Result<String, ProviderError> {
        let t = Instant::now();
        let r = self.provider.complete(role, &prompt);
        self.transcript.entries.push(TranscriptEntry {
            role,
            round: self.round,
            prompt,
            response: r.clone().map_err(|e| e.to_string()),
            elapsed: t.elapsed(),
        });
        r
    }

    /// One call, plus one re-ask if the reply does not parse.
    fn ask<T>(
        &mut self,
        role: Role,
        prompt: String,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, PipelineErrorKind> {
        let reply = self.call(role, prompt.clone())?;
        match parse(&reply) {
            Ok(v) => Ok(v),
            Err(_) => {
                let reply = self.call(role, format!("{prompt}{}", prompts::REASK))?;
                parse(&reply).map_err(|reason| PipelineErrorKind::Unparseable { role, reason })
            }
        }
    }

    fn phase_one(&mut self, role: Role, prompt: String) -> Result<PhaseOne, PipelineErrorKind> {
        self.ask(role, prompt, |r| {
            parse_phase_one(r).map_err(|e| format!("unparseable description ({e})"))
        })
    }

    fn phase_two(&mut self, role: Role, prompt: String) -> Result<PhaseTwo, PipelineErrorKind> {
        self.ask(role, prompt, |r| {
            parse_phase_two(r).map_err(|e| format!("unparseable description ({e})"))
        })
    }

    /// Two generation calls: description, constraints and name; then
    /// inputs, outputs and objective.
    pub fn describe(&mut self, vrp: &str) -> Result<ProblemDescription, PipelineErrorKind> {
        let one = self.phase_one(Role::Ga, prompts::describe_one(vrp))?;
        let two = self.phase_two(Role::Ga, prompts::describe_two(&one.render(), vrp))?;
        Ok(ProblemDescription::from_phases(one, two))
    }

    pub fn judge_description(&mut self, desc: &ProblemDescription, vrp: &str) -> Result<Judgment, PipelineErrorKind> {
        let prompt = prompts::judge(&desc.phase_one().render(), &desc.phase_two().render(), vrp);
        let reply = self.ask(Role::Ja, prompt, |r| {
            prompts::parse_judge(r).ok_or_else(|| "judgment lacks right1/jud1/right2/jud2 lines".to_string())
        })?;
        Ok(Judgment::from_reply(&reply))
    }

    /// Revises the parts the judgment rejected.
    pub fn revise_description(
        &mut self,
        desc: &ProblemDescription,
        judgment: &Judgment,
        vrp: &str,
    ) -> Result<ProblemDescription, PipelineErrorKind> {
        let old_one = desc.phase_one();
        let one = if judgment.first_ok {
            old_one.clone()
        } else {
            self.phase_one(Role::Ra, prompts::revise_one(&old_one.render(), &judgment.first_note, vrp))?
        };
        let two = if judgment.second_ok && one == old_one {
            desc.phase_two()
        } else {
            let issues = if judgment.second_ok {
                "the first answer changed; restate the inputs to match it"
            } else {
                judgment.second_note.as_str()
            };
            self.phase_two(
                Role::Ra,
                prompts::revise_two(&one.render(), &desc.phase_two().render(), issues, vrp),
            )?
        };
        Ok(ProblemDescription::from_phases(one, two))
    }

    /// One-line diagnosis of a failed solve.
    pub fn analyze_failure(
        &mut self,
        desc: &ProblemDescription,
        failure: &str,
        vrp: &str,
    ) -> Result<String, PipelineErrorKind> {
        let context = format!(
            "Problem description: {}\nConstraints: {}\nSpecific name: {}\nInput definition: {}\nOutput definition: {}\nOptimization objective: {}",
            desc.summary,
            desc.constraints
                .iter()
                .map(|c| format!("{} {}", c.name, c.explanation))
                .collect::<Vec<_>>()
                .join(" "),
            desc.problem_type,
            desc.inputs.join(", "),
            desc.outputs,
            desc.objective
        );
        let error = failure.replace('\n', " ");
        self.ask(Role::Eaa, prompts::analyze(&context, &error, vrp), |r| {
            prompts::parse_analysis(r).ok_or_else(|| "analysis lacks a jud: line".to_string())
        })
    }

    fn fail(self, kind: PipelineErrorKind) -> PipelineError {
        PipelineError {
            kind,
            transcript: self.transcript,
        }
    }
}

/// Maps a judged description onto a constraint set bound to `inst`. The
/// open-route and mixed-backhaul hints come from the description unless
/// `opts` overrides them; every other flag must match the instance fields.
pub fn derive_config(
    desc: &ProblemDescription,
    inst: &Instance<f64>,
    opts: &ClassifyOptions,
) -> Result<ConstraintSet<f64>, String> {
    let first = VariantFlags::parse_lenient(&desc.problem_type)
        .ok_or_else(|| format!("the specific name {} is not a variant code", desc.problem_type))?;
    let hints = ClassifyOptions {
        open_route: opts.open_route.or(Some(first.open_route)),
        mixed_backhaul: opts
            .mixed_backhaul
            .or(first.backhaul.map(|m| m == BackhaulMode::Mixed)),
    };
    let sig = classify_with(inst, &hints);
    let got = sig.set.flags();
    let named = name_flags(&desc.problem_type, &got).unwrap_or(first);
    if named != got {
        return Err(format!(
            "the description says {} but the instance fields give {}; to fix, use \"{}\"",
            named.code(),
            got.code(),
            got.code()
        ));
    }
    let listed = desc.constraint_flags();
    if listed != named {
        return Err(format!(
            "the constraints describe {} but the specific name is {}",
            listed.code(),
            desc.problem_type
        ));
    }
    let given: Vec<&str> = desc.inputs.iter().filter_map(|x| canonical_input(x)).collect();
    if let Some(bad) = desc
        .inputs
        .iter()
        .find(|x| canonical_input(x).is_none_or(|c| !input_available(inst, c)))
    {
        return Err(format!("the input {bad} is not provided by the instance; to fix, remove it"));
    }
    let missing: Vec<String> = required_inputs(inst, &got)
        .into_iter()
        .filter(|r| !given.contains(&r.as_str()))
        .collect();
    if !missing.is_empty() {
        return Err(format!("the inputs omit {}; to fix, add them", missing.join(", ")));
    }
    Ok(sig.set)
}

enum Attempt {
    Solved(Solution<f64>, SearchStats<f64>),
    Failed(SolverError),
}

fn attempt(inst: &Instance<f64>, cs: &ConstraintSet<f64>, cfg: &SolverConfig) -> Attempt {
    let rounding = cfg.rounding.unwrap_or_else(|| Rounding::default_for(inst));
    let dm = match build_distance_matrix(inst, rounding) {
        Ok(dm) => dm,
        Err(e) => return Attempt::Failed(e.into()),
    };
    match solve_with_matrix(inst, cs, &dm, cfg) {
        Ok((sol, stats)) => {
            let report = check_solution(&sol, inst, cs, &dm);
            if report.feasible() {
                Attempt::Solved(sol, stats)
            } else {
                Attempt::Failed(SolverError::Defect {
                    step: stats.steps,
                    report,
                })
            }
        }
        Err(e) => Attempt::Failed(e),
    }
}

/// Reads `path` and runs [`run_pipeline`] on its contents.
pub fn run_pipeline_path(
    path: impl AsRef<Path>,
    provider: &mut dyn Provider,
    cfg: &PipelineConfig,
    buffer: &mut Buffer,
) -> Result<PipelineOutcome, PipelineError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError {
        kind: PipelineErrorKind::Io(format!("{}: {e}", path.display())),
        transcript: Transcript::default(),
    })?;
    run_pipeline(&text, provider, cfg, buffer)
}

pub fn run_pipeline(
    vrp: &str,
    provider: &mut dyn Provider,
    cfg: &PipelineConfig,
    buffer: &mut Buffer,
) -> Result<PipelineOutcome, PipelineError> {
    let early = |kind| PipelineError {
        kind,
        transcript: Transcript::default(),
    };
    if cfg.max_rounds == 0 {
        return Err(early(PipelineErrorKind::Config("max_rounds must be at least 1".into())));
    }
    cfg.solver
        .validate()
        .map_err(|e| early(PipelineErrorKind::Config(e.to_string())))?;
    let inst: Instance<f64> = parse_instance(vrp).map_err(|e| early(e.into()))?;

    let mut agents = Agents::new(provider);
    macro_rules! try_agent {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(kind) => return Err(agents.fail(kind)),
            }
        };
    }

    let mut desc = try_agent!(agents.describe(vrp));
    let sig = signature(&desc);
    let mut cached = None;
    if let Some(entry) = buffer.get(&sig) {
        match derive_config(&entry.description, &inst, &cfg.classify) {
            Ok(cs) => {
                agents.transcript.note(agents.round, format!("buffer hit {sig}"));
                cached = Some((entry.description.clone(), cs));
            }
            Err(why) => agents
                .transcript
                .note(agents.round, format!("buffer entry {sig} does not fit: {why}")),
        }
    } else {
        agents.transcript.note(agents.round, format!("buffer miss {sig}"));
    }
    let buffer_hit = cached.is_some();

    let mut cs = match cached {
        Some((d, cs)) => {
            desc = d;
            cs
        }
        None => {
            let mut judged = 0;
            loop {
                let mut j = try_agent!(agents.judge_description(&desc, vrp));
                judged += 1;
                if j.verdict {
                    match derive_config(&desc, &inst, &cfg.classify) {
                        Ok(cs) => break cs,
                        Err(why) => {
                            agents
                                .transcript
                                .note(agents.round, format!("configuration rejected: {why}"));
                            j = Judgment::rejected(why);
                        }
                    }
                }
                if judged >= cfg.max_rounds {
                    let last = j.explanation;
                    return Err(agents.fail(PipelineErrorKind::DescriptionRejected { rounds: judged, last }));
                }
                agents.round += 1;
                desc = try_agent!(agents.revise_description(&desc, &j, vrp));
            }
        }
    };

    let mut blind_used = false;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut solver = cfg.solver.clone();
        solver.seed = solver.seed.wrapping_add(attempts as u64 - 1);
        match attempt(&inst, &cs, &solver) {
            Attempt::Solved(solution, stats) => {
                agents.transcript.note(
                    agents.round,
                    format!("solved {} with cost {} in {} steps", cs.code(), solution.cost, stats.steps),
                );
                if stats.truncated {
                    agents
                        .transcript
                        .note(agents.round, "warning: time limit reached, search truncated");
                }
                let entry = match buffer.store(desc.clone(), cs.clone()) {
                    Ok(e) => e,
                    Err(e) => return Err(agents.fail(PipelineErrorKind::Buffer(e.to_string()))),
                };
                return Ok(PipelineOutcome {
                    instance: inst,
                    description: desc,
                    config: cs,
                    solution,
                    stats,
                    transcript: agents.transcript,
                    entry,
                    buffer_hit,
                });
            }
            Attempt::Failed(err) => {
                agents
                    .transcript
                    .note(agents.round, format!("solve attempt {attempts} failed: {err}"));
                if attempts >= cfg.max_rounds || matches!(err, SolverError::Config(_)) {
                    return Err(agents.fail(PipelineErrorKind::SolveFailed { attempts, last: err }));
                }
                match agents.analyze_failure(&desc, &err.to_string(), vrp) {
                    Ok(advice) => {
                        agents.round += 1;
                        let revised = try_agent!(agents.revise_description(&desc, &Judgment::rejected(advice), vrp));
                        let j = try_agent!(agents.judge_description(&revised, vrp));
                        match j.verdict.then(|| derive_config(&revised, &inst, &cfg.classify)) {
                            Some(Ok(new_cs)) => {
                                desc = revised;
                                cs = new_cs;
                            }
                            Some(Err(why)) => agents
                                .transcript
                                .note(agents.round, format!("revision rejected: {why}")),
                            None => agents
                                .transcript
                                .note(agents.round, format!("revision rejected: {}", j.explanation)),
                        }
                    }
                    Err(PipelineErrorKind::Provider(e)) => {
                        agents
                            .transcript
                            .note(agents.round, format!("analysis unavailable: {e}"));
                        if blind_used {
                            return Err(agents.fail(PipelineErrorKind::SolveFailed { attempts, last: err }));
                        }
                        blind_used = true;
                        cs = classify_with(&inst, &cfg.classify).set;
                        agents
                            .transcript
                            .note(agents.round, format!("blind re-classification as {}", cs.code()));
                    }
                    Err(kind) => return Err(agents.fail(kind)),
                }
            }
        }
    }
}
