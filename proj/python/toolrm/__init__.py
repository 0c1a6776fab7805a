"""Outcome reward modeling for tool calls: parsing, matching, features, scoring.

Catalogs, conversations and gold answers are plain JSON-shaped Python values.
A candidate is either raw model text (``str``) or a list of ``{name: {args}}``.
"""

import json

from . import _toolrm
from ._toolrm import ToolrmError, UsageError, bt_probability, pair_loss

__all__ = [
    "FEATURE_NAMES",
    "ToolrmError",
    "UsageError",
    "bt_probability",
    "featurize",
    "match",
    "obfuscate_tools",
    "obfuscation_map",
    "pair_loss",
    "parse_tool_calls",
    "pearson",
    "render_reward_prompt",
    "run_cli",
    "score",
]

FEATURE_NAMES = tuple(_toolrm.feature_names)


def _j(value):
    return json.dumps(value)


def parse_tool_calls(text):
    """Parse model text. Returns a call list, or the raw string if malformed."""
    return json.loads(_toolrm.parse_tool_calls(text))


def match(tools, gold, candidate):
    """Compare a candidate against gold; returns {"correct", ["error", "detail"]}."""
    return json.loads(_toolrm.match(_j(tools), _j(gold), _j(candidate)))


def featurize(tools, messages, candidate):
    return list(_toolrm.featurize(_j(tools), _j(messages), _j(candidate)))


def score(scorer, tools, messages, candidate):
    """Score with a backend descriptor such as ``builtin:model.json``."""
    return _toolrm.score(scorer, _j(tools), _j(messages), _j(candidate))


def render_reward_prompt(tools, messages, candidate):
    return _toolrm.render_reward_prompt(_j(tools), _j(messages), _j(candidate))


def obfuscation_map(tools, seed, shuffle_tools=False):
    return json.loads(_toolrm.obfuscation_map(_j(tools), seed, shuffle_tools))


def obfuscate_tools(tools, mapping, invert=False):
    return json.loads(_toolrm.obfuscate_tools(_j(tools), _j(mapping), invert))


def pearson(x, y):
    return _toolrm.pearson(list(x), list(y))


def run_cli(*args):
    """Run a ``toolrm`` subcommand in-process; returns (exit_code, stdout, stderr)."""
    return _toolrm.run_cli([str(a) for a in args])
