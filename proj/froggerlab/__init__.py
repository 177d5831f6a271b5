"""Frogger reinforcement-learning workbench.

Deterministic Frogger simulator with object-centric and pixel observations, a
depth-first planner, a prioritized replay buffer with demonstration preloading,
a small hand-rolled DQN, and an LLM prompt harness.
"""

from ._core import (
    Action,
    ConfigError,
    EnvConfig,
    FroggerEnv,
    GameObject,
    PrioritizedBuffer,
    QNetParams,
    SearchResult,
    SnapshotError,
    Transition,
    TransportError,
    UsageError,
    action_from_name,
    action_name,
    brute_dfs,
    build_prompt,
    encode_object_state,
    extract,
    format_objects,
    objects,
    parse_action,
    parse_objects,
    preprocess,
    priority,
    q_forward,
    render,
    replay_plan,
    to_pgm,
    token_reward_correlation,
)

__all__ = [
    "Action",
    "ConfigError",
    "EnvConfig",
    "FroggerEnv",
    "GameObject",
    "PrioritizedBuffer",
    "QNetParams",
    "SearchResult",
    "SnapshotError",
    "Transition",
    "TransportError",
    "UsageError",
    "action_from_name",
    "action_name",
    "brute_dfs",
    "build_prompt",
    "encode_object_state",
    "extract",
    "format_objects",
    "objects",
    "parse_action",
    "parse_objects",
    "preprocess",
    "priority",
    "q_forward",
    "render",
    "replay_plan",
    "to_pgm",
    "token_reward_correlation",
]
