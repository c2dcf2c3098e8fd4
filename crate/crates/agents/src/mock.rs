//! Test providers: scripted replies, scripted verdicts and an adversary.

use std::collections::VecDeque;

use vrpkit_core::ClassifyOptions;

use crate::prompts::{self, JudgeReply};
use crate::provider::{Provider, ProviderError, Role};
use crate::rule::RuleBasedProvider;

/// Replays canned replies in order; errors once the script runs out.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    replies: VecDeque<Result<String, ProviderError>>,
    pub calls: Vec<Role>,
}

impl ScriptedProvider {
    pub fn new<I: IntoIterator<Item = Result<String, ProviderError>>>(replies: I) -> Self {
        ScriptedProvider {
            replies: replies.into_iter().collect(),
            calls: Vec::new(),
        }
    }
}

impl Provider for ScriptedProvider {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&mut self, role: Role, _prompt: &str) -> Result<String, ProviderError> {
        self.calls.push(role);
        self.replies
            .pop_front()
            .unwrap_or_else(|| Err(ProviderError::Unavailable("script exhausted".into())))
    }
}

/// Rule-based answers, except that judge verdicts follow a script. Once the
/// script is used up the rule-based verdict applies.
#[derive(Debug)]
pub struct VerdictScript {
    inner: RuleBasedProvider,
    verdicts: VecDeque<bool>,
    pub calls: Vec<Role>,
}

impl VerdictScript {
    pub fn new(opts: ClassifyOptions, verdicts: impl IntoIterator<Item = bool>) -> Self {
        VerdictScript {
            inner: RuleBasedProvider::new(opts),
            verdicts: verdicts.into_iter().collect(),
            calls: Vec::new(),
        }
    }
}

fn rejection() -> String {
    prompts::render_judge(&JudgeReply {
        right1: false,
        jud1: "the answer is rejected by the script; to fix, restate the description".into(),
        right2: false,
        jud2: "the answer is rejected by the script; to fix, restate the inputs".into(),
    })
}

impl Provider for VerdictScript {
    fn name(&self) -> &str {
        "verdict-script"
    }

    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError> {
        self.calls.push(role);
        if role == Role::Ja {
            if let Some(v) = self.verdicts.pop_front() {
                if !v {
                    return Ok(rejection());
                }
            }
        }
        self.inner.complete(role, prompt)
    }
}

/// Rejects every description and gives useless error analyses.
#[derive(Debug, Default)]
pub struct AdversarialProvider {
    inner: RuleBasedProvider,
    pub calls: Vec<Role>,
}

impl Provider for AdversarialProvider {
    fn name(&self) -> &str {
        "adversarial"
    }

    fn complete(&mut self, role: Role, prompt: &str) -> Result<String, ProviderError> {
        self.calls.push(role);
        match role {
            Role::Ja => Ok(rejection()),
            Role::Eaa => Ok("jud: no idea\n".into()),
            _ => self.inner.complete(role, prompt),
        }
    }
}
