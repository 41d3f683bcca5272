"""Given-clause saturation as an episodic reset/step environment.

An action selects one unprocessed clause of the proof state. The episode ends
when the selected clause is empty (reward 1.0), when the step limit or the
clause limit is reached, or when nothing is left to select.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Optional, Protocol

import numpy as np

from .logic import canonical_key, generate_inferences
from .syntax import Clause, ClauseSet, Role
from .tptp import TptpError, parse_problem, serialize_clause


class EnvError(Exception):
    pass


class ProblemLoadError(EnvError):
    def __init__(self, problem_id: str, cause: Exception):
        super().__init__(f"cannot load problem '{problem_id}': {cause}")
        self.problem_id = problem_id
        self.cause = cause


class ConfigError(EnvError):
    pass


class NoEpisodeError(EnvError):
    """step() called before reset()."""


class EpisodeOverError(EnvError):
    """step() called after the episode ended."""


class InvalidActionError(EnvError):
    """Action index outside the proof state."""


class ClauseProcessedError(EnvError):
    """Action selects a clause that was already given."""


class Terminal(str, enum.Enum):
    RUNNING = "running"
    REFUTED = "refuted"
    STEP_LIMIT = "step_limit"
    CLAUSE_LIMIT = "clause_limit"
    SATURATED = "saturated"


@dataclass
class EnvConfig:
    step_limit: int = 100
    max_clauses: int = 1000
    problem_list: list[str] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.step_limit < 1:
            raise ConfigError(f"step_limit must be positive, got {self.step_limit}")
        if self.max_clauses < 1:
            raise ConfigError(f"max_clauses must be positive, got {self.max_clauses}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class ProofState:
    clauses: list[Clause]
    problem_id: str
    steps_taken: int = 0
    terminal: Terminal = Terminal.RUNNING

    @property
    def running(self) -> bool:
        return self.terminal is Terminal.RUNNING


@dataclass(frozen=True)
class ObservedClause:
    id: int
    order_number: int
    text: str
    size: int
    processed: bool


@dataclass(frozen=True)
class Observation:
    clauses: tuple[ObservedClause, ...]
    action_mask: tuple[bool, ...]
    steps_taken: int
    problem_id: str


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: dict


class Backend(Protocol):
    """What an agent needs from an environment."""

    def reset(self, problem_id: Optional[str] = None) -> Observation: ...

    def step(self, action: int) -> StepResult: ...


class ProblemLibrary:
    """Problem ids mapped to CNF text, parsed on demand and cached."""

    def __init__(
        self,
        texts: Mapping[str, str],
        include_resolver: Optional[Callable[[str], str]] = None,
    ):
        self._texts = dict(texts)
        self._resolver = include_resolver
        self._parsed: dict[str, ClauseSet] = {}

    @classmethod
    def from_directory(cls, directory, include_root=None) -> "ProblemLibrary":
        """All ``*.p`` files under ``directory``; ids are relative paths without suffix.

        Includes resolve against ``include_root``, else ``$TPTP_ROOT``, else
        ``directory``.
        """
        directory = Path(directory)
        if not directory.is_dir():
            raise EnvError(f"not a directory: {directory}")
        texts = {}
        for path in sorted(directory.rglob("*.p")):
            problem_id = path.relative_to(directory).with_suffix("").as_posix()
            texts[problem_id] = path.read_text(encoding="utf-8")
        root = include_root or os.environ.get("TPTP_ROOT") or directory
        return cls(texts, directory_resolver(root))

    @property
    def ids(self) -> list[str]:
        return sorted(self._texts)

    def __contains__(self, problem_id: str) -> bool:
        return problem_id in self._texts

    def __len__(self) -> int:
        return len(self._texts)

    def load(self, problem_id: str) -> ClauseSet:
        if problem_id not in self._parsed:
            if problem_id not in self._texts:
                raise ProblemLoadError(problem_id, KeyError(problem_id))
            try:
                self._parsed[problem_id] = parse_problem(
                    self._texts[problem_id], self._resolver, source=problem_id
                )
            except TptpError as exc:
                raise ProblemLoadError(problem_id, exc) from exc
        return self._parsed[problem_id]


def directory_resolver(root) -> Callable[[str], str]:
    root = Path(root)

    def resolve(name: str) -> str:
        return (root / name).read_text(encoding="utf-8")

    return resolve


def extract_proof(state: ProofState, empty_clause_id: int) -> set[int]:
    """Ancestor closure of the empty clause under parent links, itself included."""
    by_id = {c.id: c for c in state.clauses}
    if empty_clause_id not in by_id:
        raise KeyError(f"no clause with id {empty_clause_id}")
    if not by_id[empty_clause_id].is_empty:
        raise ValueError(f"clause {empty_clause_id} is not empty")
    proof: set[int] = set()
    stack = [empty_clause_id]
    while stack:
        cid = stack.pop()
        if cid in proof:
            continue
        proof.add(cid)
        stack.extend(by_id[cid].inference.parents)
    return proof


def _observe(clause: Clause) -> ObservedClause:
    return ObservedClause(
        id=clause.id,
        order_number=clause.order_number,
        text=serialize_clause(clause),
        size=clause.size,
        processed=clause.processed,
    )


class SaturationEnv:
    """The native saturation backend."""

    def __init__(self, config: EnvConfig, library: ProblemLibrary):
        self.config = config
        self.library = library
        self.np_random = np.random.default_rng(config.seed)
        self.state: Optional[ProofState] = None
        self._observed: list[ObservedClause] = []
        self._keys: set = set()
        self._processed: list[Clause] = []

    def reset(self, problem_id: Optional[str] = None) -> Observation:
        if problem_id is None:
            if not self.config.problem_list:
                raise ConfigError("problem_list is empty")
            k = int(self.np_random.integers(len(self.config.problem_list)))
            problem_id = self.config.problem_list[k]
        problem = self.library.load(problem_id)
        if len(problem) > self.config.max_clauses:
            raise ConfigError(
                f"problem '{problem_id}' has {len(problem)} clauses, "
                f"more than max_clauses={self.config.max_clauses}"
            )
        clauses = [
            replace(c, id=k, order_number=k, processed=False) for k, c in enumerate(problem.clauses)
        ]
        self.state = ProofState(clauses=clauses, problem_id=problem_id)
        self._observed = [_observe(c) for c in clauses]
        self._keys = {canonical_key(c) for c in clauses}
        self._processed = []
        return self.observation()

    def observation(self) -> Observation:
        state = self.state
        running = state.running
        return Observation(
            clauses=tuple(self._observed),
            action_mask=tuple(running and not c.processed for c in self._observed),
            steps_taken=state.steps_taken,
            problem_id=state.problem_id,
        )

    def step(self, action: int) -> StepResult:
        state = self.state
        if state is None:
            raise NoEpisodeError("step() before reset()")
        if not state.running:
            raise EpisodeOverError(f"episode already ended ({state.terminal.value})")
        if not 0 <= action < len(state.clauses):
            raise InvalidActionError(f"action {action} out of range 0..{len(state.clauses) - 1}")
        given = state.clauses[action]
        if given.processed:
            raise ClauseProcessedError(f"clause {action} is already processed")

        given.processed = True
        self._observed[action] = replace(self._observed[action], processed=True)
        self._processed.append(given)
        state.steps_taken += 1
        info: dict = {}

        if given.is_empty:
            state.terminal = Terminal.REFUTED
            info["proof_clause_ids"] = sorted(extract_proof(state, given.id))
        else:
            for new in generate_inferences(given, self._processed):
                key = canonical_key(new)
                if key in self._keys:
                    continue
                self._keys.add(key)
                new.id = new.order_number = len(state.clauses)
                new.label = f"c{new.id}"
                new.role = Role.DERIVED
                state.clauses.append(new)
                self._observed.append(_observe(new))
            if state.steps_taken >= self.config.step_limit:
                state.terminal = Terminal.STEP_LIMIT
            elif len(state.clauses) >= self.config.max_clauses:
                state.terminal = Terminal.CLAUSE_LIMIT
            elif all(c.processed for c in state.clauses):
                state.terminal = Terminal.SATURATED

        info["terminal_reason"] = state.terminal.value
        refuted = state.terminal is Terminal.REFUTED
        return StepResult(
            observation=self.observation(),
            reward=1.0 if refuted else 0.0,
            terminated=refuted,
            truncated=not refuted and not state.running,
            info=info,
        )


class ScriptError(EnvError):
    """The scripted backend was asked for something it has no recording of."""


@dataclass
class EpisodeScript:
    problem_id: str
    initial: Observation
    steps: list[tuple[int, StepResult]] = field(default_factory=list)


class ScriptedBackend:
    """Replays recorded episodes; any deviation from the recording raises."""

    def __init__(self, episodes: list[EpisodeScript]):
        self._episodes = list(episodes)
        self._next = 0
        self._current: Optional[EpisodeScript] = None
        self._cursor = 0

    def reset(self, problem_id: Optional[str] = None) -> Observation:
        if self._next >= len(self._episodes):
            raise ScriptError("no recorded episode left")
        script = self._episodes[self._next]
        if problem_id is not None and problem_id != script.problem_id:
            raise ScriptError(f"recorded episode is for '{script.problem_id}', not '{problem_id}'")
        self._next += 1
        self._current = script
        self._cursor = 0
        return script.initial

    def step(self, action: int) -> StepResult:
        script = self._current
        if script is None:
            raise ScriptError("step() with no recorded episode in progress")
        if self._cursor >= len(script.steps):
            raise ScriptError("recording has no further steps")
        recorded_action, result = script.steps[self._cursor]
        if action != recorded_action:
            raise ScriptError(f"recording took action {recorded_action}, got {action}")
        self._cursor += 1
        return result


class RecordingBackend:
    """Wraps a backend and keeps every episode as an EpisodeScript."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.episodes: list[EpisodeScript] = []

    def reset(self, problem_id: Optional[str] = None) -> Observation:
        obs = self.inner.reset(problem_id)
        self.episodes.append(EpisodeScript(obs.problem_id, obs))
        return obs

    def step(self, action: int) -> StepResult:
        result = self.inner.step(action)
        self.episodes[-1].steps.append((action, result))
        return result
