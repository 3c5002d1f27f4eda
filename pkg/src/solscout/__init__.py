"""solscout: a Solidity logic-vulnerability scanner.

Combines an LLM code-understanding stage (scenario/property matching and
key-variable recognition) with static confirmation checks (dataflow,
value comparison, statement order, user-controlled arguments) behind a
deterministic record/replay harness.
"""

__version__ = "0.1.0"
