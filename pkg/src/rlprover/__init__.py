"""Reinforcement-learning clause selection for a given-clause saturation prover."""

from .agent import (
    Featurizer,
    QModel,
    ReplayBuffer,
    TrainConfig,
    featurize,
    q_value,
    record_episode,
    sample_batch,
    select_action,
    train,
    update,
)
from .env import EnvConfig, ProblemLibrary, SaturationEnv, ScriptedBackend, extract_proof
from .logic import apply, factor, generate_inferences, is_tautology, rename_apart, resolve, unify
from .syntax import Clause, ClauseSet, Function, Literal, Variable
from .tptp import parse_problem, serialize_clause

__version__ = "0.1.0"
