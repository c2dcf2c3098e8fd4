use vrpkit_agents::mock::{AdversarialProvider, ScriptedProvider, VerdictScript};
use vrpkit_agents::{
    derive_config, run_pipeline, run_pipeline_path, Buffer, PipelineConfig, PipelineErrorKind, Provider,
    ProviderError, Role, RuleBasedProvider,
};
use vrpkit_core::synth::{all_variants, synthesize};
use vrpkit_core::{
    build_distance_matrix, check_solution, write_instance, ClassifyOptions, Instance, Rounding, SolverConfig,
    VariantFlags,
};

fn cfg(iterations: usize) -> PipelineConfig {
    PipelineConfig {
        max_rounds: 4,
        classify: ClassifyOptions::default(),
        solver: SolverConfig {
            iterations,
            ..Default::default()
        },
    }
}

fn text_of(code: &str, n: usize, seed: u64) -> String {
    let flags = VariantFlags::parse(code).unwrap();
    write_instance(&synthesize::<f64>(&flags, n, seed))
}

fn rule() -> RuleBasedProvider {
    RuleBasedProvider::new(ClassifyOptions::default())
}

/// Answers like the rule-based provider but cannot analyse errors.
struct NoAnalysis(RuleBasedProvider);

impl Provider for NoAnalysis {
    fn name(&self) -> &str {
        "no-analysis"
    }
    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError> {
        match role {
            Role::Eaa => Err(ProviderError::Unavailable("offline".into())),
            _ => self.0.complete(role, prompt),
        }
    }
}

fn overfull_cvrp() -> String {
    let flags = VariantFlags::parse("CVRP").unwrap();
    let mut inst: Instance<f64> = synthesize(&flags, 8, 3);
    let cap = inst.capacity.unwrap();
    let c = inst.customers()[0];
    inst.demands.as_mut().unwrap()[c - 1] = cap + 1.0;
    write_instance(&inst)
}

#[test]
fn rule_based_pipeline_closes_over_every_variant() {
    for flags in all_variants() {
        let code = flags.code();
        let text = text_of(&code, 9, 11);
        let mut buffer = Buffer::in_memory();
        let out = run_pipeline(&text, &mut rule(), &cfg(80), &mut buffer)
            .unwrap_or_else(|e| panic!("{code}: {e}\n{}", e.transcript));
        assert_eq!(out.config.code(), code);
        let dm = build_distance_matrix(&out.instance, Rounding::default_for(&out.instance)).unwrap();
        assert!(check_solution(&out.solution, &out.instance, &out.config, &dm).feasible(), "{code}");
        assert_eq!(out.transcript.roles(), vec![Role::Ga, Role::Ga, Role::Ja], "{code}");
        assert!(!out.buffer_hit);
        assert_eq!(buffer.len(), 1);
    }
}

#[test]
fn second_run_hits_the_buffer_and_skips_judgment() {
    let text = text_of("CVRPTW", 10, 4);
    let mut buffer = Buffer::in_memory();
    let first = run_pipeline(&text, &mut rule(), &cfg(100), &mut buffer).unwrap();
    assert_eq!(first.entry.hit_count, 0);
    let second = run_pipeline(&text, &mut rule(), &cfg(100), &mut buffer).unwrap();
    assert!(second.buffer_hit);
    assert_eq!(second.transcript.count(Role::Ja), 0);
    assert!(second.transcript.has_event("buffer hit"));
    assert_eq!(second.entry.hit_count, 1);
    assert_eq!(second.entry.created_at, first.entry.created_at);
    assert_eq!(second.config, first.config);
    assert_eq!(buffer.len(), 1);
}

#[test]
fn buffer_survives_reopening() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.jsonl");
    let file = dir.path().join("inst.vrp");
    std::fs::write(&file, text_of("MDCVRPB", 9, 2)).unwrap();
    {
        let mut buffer = Buffer::open(&path).unwrap();
        run_pipeline_path(&file, &mut rule(), &cfg(60), &mut buffer).unwrap();
    }
    let mut buffer = Buffer::open(&path).unwrap();
    assert_eq!(buffer.len(), 1);
    let out = run_pipeline_path(&file, &mut rule(), &cfg(60), &mut buffer).unwrap();
    assert!(out.buffer_hit);
    assert_eq!(Buffer::open(&path).unwrap().entries().next().unwrap().hit_count, 1);
}

#[test]
fn same_inputs_same_outcome() {
    let text = text_of("OVRPMBLTW", 10, 8);
    let run = || {
        let out = run_pipeline(&text, &mut rule(), &cfg(150), &mut Buffer::in_memory()).unwrap();
        (out.solution.routes, out.solution.cost, out.description)
    };
    assert_eq!(run(), run());
}

#[test]
fn boxed_and_concrete_providers_agree() {
    let text = text_of("ECVRPTW", 8, 5);
    let a = run_pipeline(&text, &mut rule(), &cfg(100), &mut Buffer::in_memory()).unwrap();
    let mut boxed: Box<dyn Provider> = Box::new(rule());
    let b = run_pipeline(&text, &mut boxed, &cfg(100), &mut Buffer::in_memory()).unwrap();
    assert_eq!(a.solution.routes, b.solution.routes);
    assert_eq!(a.transcript.roles(), b.transcript.roles());
}

#[test]
fn adversarial_judge_is_bounded_by_max_rounds() {
    let text = text_of("CVRPL", 8, 1);
    let mut p = AdversarialProvider::default();
    let err = run_pipeline(&text, &mut p, &cfg(50), &mut Buffer::in_memory()).unwrap_err();
    match err.kind {
        PipelineErrorKind::DescriptionRejected { rounds, .. } => assert_eq!(rounds, 4),
        ref k => panic!("unexpected {k}"),
    }
    assert_eq!(err.transcript.count(Role::Ja), 4);
    assert_eq!(p.calls.iter().filter(|r| **r == Role::Ja).count(), 4);
    assert_eq!(err.transcript.entries.len(), p.calls.len());
}

#[test]
fn revisions_follow_rejections_with_contiguous_rounds() {
    let text = text_of("MDOVRPTW", 9, 6);
    let mut p = VerdictScript::new(ClassifyOptions::default(), [false, false]);
    let out = run_pipeline(&text, &mut p, &cfg(60), &mut Buffer::in_memory()).unwrap();
    assert_eq!(out.transcript.count(Role::Ja), 3);
    assert_eq!(out.transcript.count(Role::Ra), 4);
    let mut last = 1;
    for e in &out.transcript.entries {
        assert!(e.round == last || e.round == last + 1);
        last = e.round;
    }
    assert_eq!(last, 3);
    assert_eq!(out.transcript.entries.len(), p.calls.len());
}

#[test]
fn garbage_reply_is_reasked_once() {
    let text = text_of("CVRP", 6, 1);
    let mut p = ScriptedProvider::new([Ok("nonsense".to_string()), Ok("still nonsense".to_string())]);
    let err = run_pipeline(&text, &mut p, &cfg(10), &mut Buffer::in_memory()).unwrap_err();
    assert!(matches!(err.kind, PipelineErrorKind::Unparseable { role: Role::Ga, .. }));
    assert_eq!(p.calls, vec![Role::Ga, Role::Ga]);
    assert!(err.transcript.entries[1].prompt.ends_with(vrpkit_agents::prompts::REASK));
}

#[test]
fn unparseable_instance_never_reaches_the_provider() {
    let mut p = ScriptedProvider::new([]);
    let err = run_pipeline("NAME : x\nDIMENSION : oops\n", &mut p, &cfg(10), &mut Buffer::in_memory()).unwrap_err();
    assert!(matches!(err.kind, PipelineErrorKind::Parse(_)));
    assert!(err.transcript.is_empty());
    assert!(p.calls.is_empty());
}

#[test]
fn infeasible_instance_fails_after_bounded_attempts() {
    let mut p = rule();
    let err = run_pipeline(&overfull_cvrp(), &mut p, &cfg(30), &mut Buffer::in_memory()).unwrap_err();
    match err.kind {
        PipelineErrorKind::SolveFailed { attempts, .. } => assert_eq!(attempts, 4),
        ref k => panic!("unexpected {k}"),
    }
    assert_eq!(err.transcript.count(Role::Eaa), 3);
    assert!(err.transcript.has_event("solve attempt 4 failed"));
}

#[test]
fn missing_analysis_falls_back_to_one_blind_round() {
    let mut p = NoAnalysis(rule());
    let err = run_pipeline(&overfull_cvrp(), &mut p, &cfg(30), &mut Buffer::in_memory()).unwrap_err();
    assert!(matches!(err.kind, PipelineErrorKind::SolveFailed { attempts: 2, .. }));
    assert!(err.transcript.has_event("analysis unavailable"));
    assert!(err.transcript.has_event("blind re-classification as CVRP"));
}

#[test]
fn derived_config_rejects_a_wrong_name() {
    let text = text_of("CVRPTW", 6, 2);
    let out = run_pipeline(&text, &mut rule(), &cfg(20), &mut Buffer::in_memory()).unwrap();
    let mut desc = out.description.clone();
    desc.problem_type = "CVRP".into();
    assert!(derive_config(&desc, &out.instance, &ClassifyOptions::default()).is_err());
    let mut desc = out.description.clone();
    desc.inputs.retain(|i| !i.contains("time"));
    let err = derive_config(&desc, &out.instance, &ClassifyOptions::default()).unwrap_err();
    assert!(err.contains("time_windows"), "{err}");
}

#[test]
fn command_line_hints_win() {
    let text = text_of("CVRP", 8, 9);
    let opts = ClassifyOptions {
        open_route: Some(true),
        mixed_backhaul: None,
    };
    let mut c = cfg(60);
    c.classify = opts;
    let out = run_pipeline(&text, &mut RuleBasedProvider::new(opts), &c, &mut Buffer::in_memory()).unwrap();
    assert_eq!(out.config.code(), "OCVRP");
    assert!(out.config.flags().open_route);
}
