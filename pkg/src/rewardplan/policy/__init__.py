"""Action-proposal backends: scripted, seeded-random, and remote ReAct."""

from rewardplan.policy.backends import (
    RandomPolicy,
    ScriptedPolicy,
    SeedBankPolicy,
    SequencePolicy,
    TrialScriptedPolicy,
)
from rewardplan.policy.base import (
    Policy,
    PolicyContext,
    PromptTemplate,
    Proposal,
    parse_react,
    render_policy_task,
    render_react,
    render_transcript,
)
from rewardplan.policy.remote import ChatCompletionsClient, RemotePolicy

__all__ = [
    "ChatCompletionsClient",
    "Policy",
    "PolicyContext",
    "PromptTemplate",
    "Proposal",
    "RandomPolicy",
    "RemotePolicy",
    "ScriptedPolicy",
    "SeedBankPolicy",
    "SequencePolicy",
    "TrialScriptedPolicy",
    "parse_react",
    "render_policy_task",
    "render_react",
    "render_transcript",
]
