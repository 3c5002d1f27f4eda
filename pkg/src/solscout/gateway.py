"""Prompt construction, chat-completion transport, and answer parsing.

Every query is an independent two-message conversation (system + user);
no history ever leaks between queries. Exchanges are keyed by
(purpose, rule, function, prompt hash) so a recorded transcript replays
a scan bit-exactly with zero network use.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass

import requests

from .errors import ProviderError, ReplayMiss, UnparseableAnswer
from .frontend import contains_identifier

SYSTEM_PROMPT = (
    "You are a smart contract auditor. You will be asked questions related "
    "to code properties. You can mimic answering them in the background five "
    "times and provide me with the most frequently appearing answer. "
    "Furthermore, please strictly adhere to the output format specified in "
    "the question; there is no need to explain your answer."
)

MODES = ("live", "record", "replay")


def system_prompt() -> str:
    return SYSTEM_PROMPT


def estimate_tokens(text: str) -> int:
    """Deterministic budget estimator: ceil(utf-8 bytes / 4)."""
    if not text:
        return 0
    return -(-len(text.encode("utf-8")) // 4)


def prompt_sha256(system: str, user: str) -> str:
    return hashlib.sha256((system + "\x00" + user).encode("utf-8")).hexdigest()


# ----------------------------------------------------------------------
# prompt builders


def build_scenario_prompt(scenarios: list, code: str) -> str:
    if not scenarios:
        raise ValueError("at least one scenario is required")
    shape = ", ".join(f'"{i}": "Yes" or "No"' for i in range(1, len(scenarios) + 1))
    questions = "\n".join(
        f'"{i}": {sentence}?' for i, sentence in enumerate(scenarios, 1)
    )
    return (
        "Given the following smart contract code, answer the questions below "
        f"and organize the result in a json format like {{{shape}}}.\n\n"
        f"{questions}\n\n{code}"
    )


def build_property_prompt(rule, code: str, scenario_index: int = 0) -> str:
    sentence = f"{rule.scenarios[scenario_index]} {rule.property}"
    return (
        f'Does the following smart contract code "{sentence}"? '
        f'Answer only "Yes" or "No".\n\n{code}'
    )


def build_recognition_prompt(recognition, code: str) -> str:
    lines = [
        f'In this function, {question} Please answer in a section starts with "{slot}:".'
        for slot, question in recognition.questions
    ]
    shape = ", ".join(
        f'"{slot}":{{"Variable name":"Description"}}' for slot in recognition.slots
    )
    lines.append(f"Please answer in the following json format: {{{shape}}}")
    return "\n".join(lines) + f"\n\n{code}"


# ----------------------------------------------------------------------
# answer parsing


def _first_json_object(text: str):
    start = text.find("{")
    while start != -1:
        depth = 0
        in_str = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_str:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        return json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
        start = text.find("{", start + 1)
    return None


_YES_NO_RE = re.compile(r"[A-Za-z]+")


def _as_yes(value) -> bool:
    return isinstance(value, str) and value.strip().strip(".!,").lower() == "yes"


def parse_scenario_answer(text: str, n: int) -> dict:
    """Map scenario index -> yes/no. Missing or garbled keys default to no."""
    obj = _first_json_object(text)
    if not isinstance(obj, dict):
        raise UnparseableAnswer(f"no JSON object in scenario answer: {text[:80]!r}")
    result = {}
    for i in range(1, n + 1):
        value = obj.get(str(i), obj.get(i))
        result[i] = _as_yes(value)
    return result


def parse_yes_no(text: str) -> bool:
    """First standalone yes/no token decides; anything else is unparseable."""
    for word in _YES_NO_RE.findall(text):
        lowered = word.lower()
        if lowered == "yes":
            return True
        if lowered == "no":
            return False
    raise UnparseableAnswer(f"no yes/no answer in: {text[:80]!r}")


def parse_recognition_answer(text: str, slots: list) -> dict:
    """Extract slot -> (name, description); absent slots are left out."""
    obj = _first_json_object(text)
    if not isinstance(obj, dict):
        raise UnparseableAnswer(f"no JSON object in recognition answer: {text[:80]!r}")
    out = {}
    for slot in slots:
        value = obj.get(slot)
        if isinstance(value, dict) and value:
            name, desc = next(iter(value.items()))
            out[slot] = (str(name).strip(), str(desc).strip())
        elif isinstance(value, str) and value.strip():
            out[slot] = (value.strip(), "")
    return out


@dataclass
class RecognitionAbort:
    """Validation verdict: the answer is ungrounded, candidate is dropped."""

    slot: str
    reason: str


def validate_recognition(answer: dict, context, slots: list):
    """Names must exist verbatim in the context and carry a description."""
    validated = {}
    for slot in slots:
        if slot not in answer:
            return RecognitionAbort(slot, "missing from answer")
        name, desc = answer[slot]
        if not name:
            return RecognitionAbort(slot, "empty name")
        if not desc:
            return RecognitionAbort(slot, "empty description")
        if not contains_identifier(context.text, name):
            return RecognitionAbort(slot, f"{name!r} does not occur in the context")
        validated[slot] = (name, desc)
    return validated


# ----------------------------------------------------------------------
# transcripts


@dataclass
class LlmExchange:
    purpose: str  # scenario|property|recognition
    rule_id: str
    function_id: str
    system: str
    user: str
    response: str
    tokens_in: int
    tokens_out: int
    latency: float = 0.0
    prompt_sha256: str = ""

    def __post_init__(self):
        if not self.prompt_sha256:
            self.prompt_sha256 = prompt_sha256(self.system, self.user)

    @property
    def key(self) -> tuple:
        return (self.purpose, self.rule_id, self.function_id, self.prompt_sha256)

    def to_json(self) -> str:
        return json.dumps(
            {
                "purpose": self.purpose,
                "rule_id": self.rule_id,
                "function_id": self.function_id,
                "prompt_sha256": self.prompt_sha256,
                "system": self.system,
                "user": self.user,
                "response": self.response,
                "tokens_in": self.tokens_in,
                "tokens_out": self.tokens_out,
            },
            sort_keys=True,
        )


class Transcript:
    """Keyed store of exchanges; lookups match on key, never on order."""

    def __init__(self):
        self.entries: dict[tuple, LlmExchange] = {}

    def append(self, exchange: LlmExchange) -> None:
        self.entries[exchange.key] = exchange

    def get(self, key: tuple):
        return self.entries.get(key)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def load(cls, path: str) -> "Transcript":
        transcript = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                raw = json.loads(line)
                transcript.append(
                    LlmExchange(
                        purpose=raw["purpose"],
                        rule_id=raw["rule_id"],
                        function_id=raw["function_id"],
                        system=raw["system"],
                        user=raw["user"],
                        response=raw["response"],
                        tokens_in=int(raw["tokens_in"]),
                        tokens_out=int(raw["tokens_out"]),
                        prompt_sha256=raw["prompt_sha256"],
                    )
                )
        return transcript

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for exchange in self.entries.values():
                fh.write(exchange.to_json() + "\n")


# ----------------------------------------------------------------------
# provider


@dataclass
class ProviderConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    max_context_tokens: int = 4096
    price_in_per_1k: float = 0.0
    price_out_per_1k: float = 0.0
    api_key_env: str = "SOLSCOUT_API_KEY"
    timeout: float = 60.0
    max_in_flight: int = 4


class LlmGateway:
    """Mode-aware completion client: live HTTP, record, or replay."""

    RETRIES = 3
    BACKOFF_BASE = 1.0

    def __init__(self, config: ProviderConfig, mode: str = "replay",
                 transcript: Transcript | None = None,
                 record_path: str | None = None,
                 sleeper=time.sleep):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.config = config
        self.mode = mode
        self.transcript = transcript if transcript is not None else Transcript()
        self.exchanges: list[LlmExchange] = []
        self._sleep = sleeper
        self._lock = threading.Lock()
        self._gate = threading.Semaphore(max(1, config.max_in_flight))
        self._record_fh = open(record_path, "a", encoding="utf-8") if record_path else None

    def close(self) -> None:
        if self._record_fh is not None:
            self._record_fh.close()
            self._record_fh = None

    # -- core ----------------------------------------------------------

    def complete(self, purpose: str, rule_id: str, function_id: str,
                 system: str, user: str) -> LlmExchange:
        digest = prompt_sha256(system, user)
        key = (purpose, rule_id, function_id, digest)
        if self.mode == "replay":
            entry = self.transcript.get(key)
            if entry is None:
                raise ReplayMiss(key)
            with self._lock:
                self.exchanges.append(entry)
            return entry

        with self._gate:
            response, tokens_in, tokens_out, latency = self._http_call(system, user)
        if tokens_in <= 0:
            tokens_in = estimate_tokens(system) + estimate_tokens(user)
        if tokens_out <= 0:
            tokens_out = estimate_tokens(response)
        exchange = LlmExchange(
            purpose=purpose,
            rule_id=rule_id,
            function_id=function_id,
            system=system,
            user=user,
            response=response,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            latency=latency,
            prompt_sha256=digest,
        )
        with self._lock:
            self.exchanges.append(exchange)
            if self.mode == "record":
                self.transcript.append(exchange)
                if self._record_fh is not None:
                    self._record_fh.write(exchange.to_json() + "\n")
                    self._record_fh.flush()
        return exchange

    def ask(self, purpose: str, rule_id: str, function_id: str,
            user: str, parser):
        """Complete + parse, retrying the identical prompt once on garbage."""
        last_error = None
        for _ in range(2):
            exchange = self.complete(purpose, rule_id, function_id, SYSTEM_PROMPT, user)
            try:
                return parser(exchange.response), exchange
            except UnparseableAnswer as exc:
                last_error = exc
        raise last_error

    # -- transport ------------------------------------------------------

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise ProviderError(
                f"API key env var {self.config.api_key_env} is not set"
            )
        return key

    def _http_call(self, system: str, user: str):
        payload = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        headers = {"Authorization": f"Bearer {self._api_key()}"}
        last_error = None
        for attempt in range(self.RETRIES):
            if attempt:
                self._sleep(self.BACKOFF_BASE * (2 ** (attempt - 1)))
            started = time.monotonic()
            try:
                resp = requests.post(
                    self.config.endpoint, json=payload, headers=headers,
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                last_error = ProviderError(f"request failed: {exc}")
                continue
            latency = time.monotonic() - started
            if resp.status_code >= 500 or resp.status_code == 429:
                last_error = ProviderError(f"provider returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProviderError(f"provider returned {resp.status_code}: {resp.text[:200]}")
            try:
                body = resp.json()
                content = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError) as exc:
                raise ProviderError(f"malformed provider response: {exc}") from exc
            usage = body.get("usage") or {}
            return (
                content,
                int(usage.get("prompt_tokens") or 0),
                int(usage.get("completion_tokens") or 0),
                latency,
            )
        raise last_error
