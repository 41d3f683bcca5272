"""Linear Q-learning over clause features.

Each clause is seen only through two numbers, its size and its order
number. A logistic regression maps them to a Q-value. Only episodes that
ended in a refutation are replayed, with the final reward spread evenly
over the steps that selected proof clauses.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .env import Backend, Observation, ObservedClause, StepResult

DEFAULT_S_CAP = 64
MODEL_VERSION = 1


@dataclass(frozen=True)
class Featurizer:
    max_clauses: int
    s_cap: int = DEFAULT_S_CAP

    def __post_init__(self):
        if self.max_clauses < 1 or self.s_cap < 1:
            raise ValueError("max_clauses and s_cap must be positive")

    def __call__(self, clause) -> np.ndarray:
        return featurize(clause, self.max_clauses, self.s_cap)

    def matrix(self, clauses: Sequence) -> np.ndarray:
        sizes = np.fromiter((c.size for c in clauses), dtype=float, count=len(clauses))
        orders = np.fromiter((c.order_number for c in clauses), dtype=float, count=len(clauses))
        return np.column_stack(
            (np.minimum(sizes, self.s_cap) / self.s_cap, orders / self.max_clauses)
        )


def featurize(clause, max_clauses: int, s_cap: int = DEFAULT_S_CAP) -> np.ndarray:
    """[normalized size, normalized order number] of a clause or observed clause.

    The order component can exceed 1 by the generation burst that overshoots
    the soft clause limit; it is clipped.
    """
    size = min(clause.size, s_cap) / s_cap
    order = min(clause.order_number / max_clauses, 1.0)
    return np.array([size, order])


@dataclass
class QModel:
    weights: np.ndarray = field(default_factory=lambda: np.zeros(2))
    bias: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (2,):
            raise ValueError(f"expected 2 weights, got shape {self.weights.shape}")
        self.bias = float(self.bias)

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights + self.bias

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.weights)) and math.isfinite(self.bias))


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def q_value(model: QModel, features) -> float:
    return float(sigmoid(model.logits(np.asarray(features, dtype=float))))


class NoLegalActionError(ValueError):
    pass


def select_action(
    model: QModel,
    obs: Observation,
    epsilon: float,
    rng: np.random.Generator,
    featurizer: Featurizer,
) -> int:
    """Epsilon-greedy choice among unmasked clauses; greedy ties go to the lowest index."""
    legal = np.flatnonzero(obs.action_mask)
    if legal.size == 0:
        raise NoLegalActionError("no selectable clause")
    if epsilon > 0 and rng.random() < epsilon:
        return int(legal[rng.integers(legal.size)])
    candidates = [obs.clauses[k] for k in legal]
    # Sigmoid is monotone, so the logit argmax is the Q-value argmax.
    scores = model.logits(featurizer.matrix(candidates))
    return int(legal[int(np.argmax(scores))])


@dataclass(frozen=True)
class Transition:
    features: tuple[float, float]
    distributed_reward: float
    problem_id: str
    episode_index: int
    step_index: int


@dataclass
class EpisodeRecord:
    problem_id: str
    episode_index: int
    transitions: list[Transition]
    final_reward: float
    proof_ids: frozenset[int]


class ReplayBuffer:
    """Successful episodes only, oldest evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.episodes: deque[EpisodeRecord] = deque(maxlen=capacity)
        self.insertion_counter = 0

    def __len__(self) -> int:
        return len(self.episodes)

    def add(self, record: EpisodeRecord) -> None:
        if record.final_reward != 1.0:
            raise ValueError("only episodes with final reward 1.0 may be stored")
        self.episodes.append(record)
        self.insertion_counter += 1


# One recorded step: what the agent saw, what it chose, and the chosen clause.
EpisodeStep = tuple[Observation, int, ObservedClause]


def record_episode(
    buffer: ReplayBuffer,
    episode: Sequence[EpisodeStep],
    final_reward: float,
    proof_ids,
    featurizer: Featurizer,
    episode_index: Optional[int] = None,
) -> Optional[EpisodeRecord]:
    """Store a successful episode with its reward spread over proof steps.

    Failed episodes are ignored. Returns the stored record, or None.
    """
    if final_reward <= 0:
        return None
    if not episode:
        raise RuntimeError("successful episode with no steps")
    proof = frozenset(proof_ids or ())
    in_proof = [clause.id in proof for _, _, clause in episode]
    k = sum(in_proof)
    if k == 0:
        raise RuntimeError("successful episode selected no proof clause")
    share = final_reward / k
    problem_id = episode[0][0].problem_id
    index = buffer.insertion_counter if episode_index is None else episode_index
    transitions = [
        Transition(
            features=tuple(float(x) for x in featurizer(clause)),
            distributed_reward=share if hit else 0.0,
            problem_id=problem_id,
            episode_index=index,
            step_index=step,
        )
        for step, ((_, _, clause), hit) in enumerate(zip(episode, in_proof))
    ]
    record = EpisodeRecord(problem_id, index, transitions, float(final_reward), proof)
    buffer.add(record)
    return record


def sample_batch(buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator) -> list[Transition]:
    """Draw with replacement; episode weight grows linearly from oldest (1) to newest (n)."""
    n = len(buffer)
    if n == 0:
        raise ValueError("cannot sample from an empty buffer")
    weights = np.arange(1, n + 1, dtype=float)
    picks = rng.choice(n, size=batch_size, p=weights / weights.sum())
    batch = []
    for e in picks:
        transitions = buffer.episodes[int(e)].transitions
        batch.append(transitions[int(rng.integers(len(transitions)))])
    return batch


def batch_arrays(batch: Sequence[Transition]) -> tuple[np.ndarray, np.ndarray]:
    features = np.array([t.features for t in batch], dtype=float).reshape(-1, 2)
    targets = np.array([t.distributed_reward for t in batch], dtype=float)
    return features, targets


def loss(model: QModel, features: np.ndarray, targets: np.ndarray) -> float:
    q = sigmoid(model.logits(features))
    return float(np.mean((q - targets) ** 2))


def gradient(model: QModel, features: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, float]:
    """Gradient of the mean squared error w.r.t. (weights, bias)."""
    q = sigmoid(model.logits(features))
    dlogit = 2.0 * (q - targets) * q * (1.0 - q) / len(targets)
    return features.T @ dlogit, float(dlogit.sum())


def update(model: QModel, batch: Sequence[Transition], learning_rate: float) -> QModel:
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    features, targets = batch_arrays(batch)
    grad_w, grad_b = gradient(model, features, targets)
    if not (np.all(np.isfinite(grad_w)) and math.isfinite(grad_b)):
        raise FloatingPointError("non-finite gradient; check the features")
    new = QModel(model.weights - learning_rate * grad_w, model.bias - learning_rate * grad_b)
    if not new.is_finite():
        raise FloatingPointError("update produced non-finite parameters")
    return new


@dataclass
class TrainConfig:
    episodes: int = 200
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.8
    batch_size: int = 64
    updates_per_episode: int = 10
    learning_rate: float = 2.0
    buffer_capacity: int = 200
    s_cap: int = DEFAULT_S_CAP
    seed: int = 0

    def epsilon(self, episode: int) -> float:
        decay = self.eps_decay_fraction * self.episodes
        if decay <= 0 or episode >= decay:
            return self.eps_end
        return self.eps_start + (self.eps_end - self.eps_start) * (episode / decay)


@dataclass
class EpisodeOutcome:
    problem_id: str
    steps: list[EpisodeStep]
    last: StepResult

    @property
    def solved(self) -> bool:
        return self.last.terminated

    @property
    def terminal_reason(self) -> str:
        return self.last.info["terminal_reason"]

    @property
    def proof_ids(self) -> Optional[list[int]]:
        return self.last.info.get("proof_clause_ids")


def run_episode(
    backend: Backend,
    model: QModel,
    epsilon: float,
    rng: np.random.Generator,
    featurizer: Featurizer,
    problem_id: Optional[str] = None,
) -> EpisodeOutcome:
    obs = backend.reset(problem_id)
    steps: list[EpisodeStep] = []
    while True:
        action = select_action(model, obs, epsilon, rng, featurizer)
        result = backend.step(action)
        steps.append((obs, action, obs.clauses[action]))
        if result.terminated or result.truncated:
            return EpisodeOutcome(obs.problem_id, steps, result)
        obs = result.observation


@dataclass
class TrainResult:
    model: QModel
    log: list[dict[str, Any]]
    buffer: ReplayBuffer


def train(
    backend: Backend,
    config: TrainConfig,
    featurizer: Featurizer,
    rng: Optional[np.random.Generator] = None,
    model: Optional[QModel] = None,
) -> TrainResult:
    """Collect one episode at a time, store it if it succeeded, then fit on replayed batches."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    model = QModel() if model is None else model
    buffer = ReplayBuffer(config.buffer_capacity)
    log = []
    for episode in range(config.episodes):
        epsilon = config.epsilon(episode)
        outcome = run_episode(backend, model, epsilon, rng, featurizer)
        record_episode(
            buffer, outcome.steps, outcome.last.reward, outcome.proof_ids, featurizer, episode
        )
        if len(buffer):
            for _ in range(config.updates_per_episode):
                model = update(model, sample_batch(buffer, config.batch_size, rng), config.learning_rate)
        log.append(
            {
                "episode": episode,
                "problem": outcome.problem_id,
                "terminal": outcome.terminal_reason,
                "steps": len(outcome.steps),
                "clauses": len(outcome.last.observation.clauses),
                "buffer_size": len(buffer),
                "epsilon": epsilon,
            }
        )
    return TrainResult(model, log, buffer)


@dataclass
class EvalResult:
    problem_id: str
    solved: bool
    steps: int
    clauses: int
    terminal_reason: str


def evaluate(
    backend: Backend,
    problem_ids: Sequence[str],
    model: QModel,
    featurizer: Featurizer,
    epsilon: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> list[EvalResult]:
    """One episode per problem, in the given order."""
    rng = np.random.default_rng(0) if rng is None else rng
    results = []
    for pid in problem_ids:
        out = run_episode(backend, model, epsilon, rng, featurizer, problem_id=pid)
        results.append(
            EvalResult(pid, out.solved, len(out.steps), len(out.last.observation.clauses), out.terminal_reason)
        )
    return results


def model_to_json(model: QModel, featurizer: Featurizer) -> str:
    doc = {
        "version": MODEL_VERSION,
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
        "s_cap": featurizer.s_cap,
        "max_clauses": featurizer.max_clauses,
    }
    return json.dumps(doc) + "\n"


def model_from_json(text: str) -> tuple[QModel, Featurizer]:
    doc = json.loads(text)
    if not isinstance(doc, dict) or doc.get("version") != MODEL_VERSION:
        raise ValueError("unsupported model file version")
    weights = doc.get("weights")
    if not isinstance(weights, list) or len(weights) != 2:
        raise ValueError("model file must hold exactly 2 weights")
    values = [*weights, doc.get("bias")]
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ValueError("weights and bias must be numbers")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("weights and bias must be finite")
    s_cap, max_clauses = doc.get("s_cap"), doc.get("max_clauses")
    if not all(isinstance(v, int) and not isinstance(v, bool) and v > 0 for v in (s_cap, max_clauses)):
        raise ValueError("s_cap and max_clauses must be positive integers")
    return QModel(np.array(weights, dtype=float), float(doc["bias"])), Featurizer(max_clauses, s_cap)


def save_model(path, model: QModel, featurizer: Featurizer) -> None:
    Path(path).write_text(model_to_json(model, featurizer), encoding="utf-8")


def load_model(path) -> tuple[QModel, Featurizer]:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
