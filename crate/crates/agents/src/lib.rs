//! Text-model agents that describe a VRPLIB instance, agree on its variant
//! and drive the core solver, with a persistent buffer of accepted
//! configurations.

pub mod buffer;
pub mod description;
pub mod mock;
pub mod pipeline;
pub mod prompts;
pub mod provider;
pub mod rule;
pub mod transcript;

pub use buffer::{signature, Buffer, BufferEntry};
pub use description::{ConstraintItem, ProblemDescription};
pub use pipeline::{
    derive_config, run_pipeline, run_pipeline_path, Agents, Judgment, PipelineConfig, PipelineError,
    PipelineErrorKind, PipelineOutcome,
};
pub use provider::{build_provider, Provider, ProviderConfig, ProviderError, ProviderKind, Role};
pub use rule::RuleBasedProvider;
pub use transcript::{Transcript, TranscriptEntry, TranscriptEvent};
