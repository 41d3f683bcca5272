"""Command line entry points: train, solve, evaluate, serve, gen."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import agent
from .agent import Featurizer, QModel, TrainConfig
from .corpus import write_chain
from .env import (
    EnvConfig,
    EnvError,
    ProblemLibrary,
    ProblemLoadError,
    SaturationEnv,
    directory_resolver,
)
from .tptp import TptpError, parse_problem, serialize_clause
from .wire import serve_stdio, serve_tcp


def _env_flags(p: argparse.ArgumentParser, step_limit: int = 100, max_clauses: int = 1000) -> None:
    p.add_argument("--step-limit", type=int, default=step_limit)
    p.add_argument("--max-clauses", type=int, default=max_clauses)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlprover", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a clause-selection model")
    p.add_argument("--problems", required=True, help="directory of *.p CNF problems")
    p.add_argument("--episodes", type=int, default=200)
    _env_flags(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--log", help="per-episode JSON lines log (default: stdout)")
    p.add_argument("--learning-rate", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    p.add_argument("--updates-per-episode", type=int, default=TrainConfig.updates_per_episode)
    p.add_argument("--buffer-capacity", type=int, default=TrainConfig.buffer_capacity)
    p.add_argument("--eps-start", type=float, default=TrainConfig.eps_start)
    p.add_argument("--eps-end", type=float, default=TrainConfig.eps_end)
    p.add_argument("--s-cap", type=int, default=TrainConfig.s_cap)

    p = sub.add_parser("solve", help="run one greedy episode on a problem file")
    p.add_argument("problem", help="CNF problem file")
    p.add_argument("--model", help="model file (default: zero model)")
    _env_flags(p)

    p = sub.add_parser("evaluate", help="run one greedy episode per problem in a corpus")
    p.add_argument("--problems", required=True)
    p.add_argument("--model")
    p.add_argument("--epsilon", type=float, default=0.0)
    _env_flags(p)

    p = sub.add_parser("serve", help="serve the environment as line-delimited JSON")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true")
    mode.add_argument("--tcp", type=int, metavar="PORT", help="TCP port, 0 for an ephemeral one")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--problems", required=True)
    _env_flags(p)

    p = sub.add_parser("gen", help="write a synthetic problem")
    p.add_argument("--family", choices=["chain"], default="chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--distractors", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _fail(message: str, code: int = 2) -> int:
    print(f"rlprover: {message}", file=sys.stderr)
    return code


def _parseable_library(directory) -> tuple[ProblemLibrary, list[str], dict[str, str]]:
    """The corpus plus ids that parse and a map of failing ids to messages."""
    library = ProblemLibrary.from_directory(directory)
    good, bad = [], {}
    for pid in library.ids:
        try:
            library.load(pid)
            good.append(pid)
        except ProblemLoadError as exc:
            bad[pid] = str(exc.cause)
    return library, good, bad


def _load_model(path: Optional[str], max_clauses: int) -> tuple[QModel, Featurizer, str]:
    if path is None:
        return QModel(), Featurizer(max_clauses), "zero model"
    model, featurizer = agent.load_model(path)
    return model, featurizer, path


def cmd_train(args) -> int:
    try:
        library, good, bad = _parseable_library(args.problems)
    except (EnvError, OSError) as exc:
        return _fail(str(exc))
    for pid, msg in bad.items():
        print(f"rlprover: skipping {pid}: {msg}", file=sys.stderr)
    if not good:
        return _fail(f"no parseable CNF problems in {args.problems}")
    try:
        env_config = EnvConfig(args.step_limit, args.max_clauses, good, args.seed)
        config = TrainConfig(
            episodes=args.episodes,
            eps_start=args.eps_start,
            eps_end=args.eps_end,
            batch_size=args.batch_size,
            updates_per_episode=args.updates_per_episode,
            learning_rate=args.learning_rate,
            buffer_capacity=args.buffer_capacity,
            s_cap=args.s_cap,
            seed=args.seed,
        )
        featurizer = Featurizer(args.max_clauses, args.s_cap)
        result = agent.train(SaturationEnv(env_config, library), config, featurizer)
    except (EnvError, ValueError) as exc:
        return _fail(str(exc))
    lines = "".join(json.dumps(entry) + "\n" for entry in result.log)
    if args.log:
        Path(args.log).write_text(lines, encoding="utf-8")
    else:
        sys.stdout.write(lines)
    agent.save_model(args.out, result.model, featurizer)
    return 0


def _derivation_lines(state, proof_ids) -> list[str]:
    lines = []
    for clause in sorted((state.clauses[i] for i in proof_ids), key=lambda c: c.order_number):
        inf = clause.inference
        if inf.is_input:
            lines.append(f"% c{clause.id}: input")
        else:
            parents = ", ".join(f"c{p}" for p in inf.parents)
            lines.append(f"% c{clause.id}: {inf.rule} from {parents}")
        lines.append(serialize_clause(clause))
    return lines


def cmd_solve(args) -> int:
    path = Path(args.problem)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read {path}: {exc}")
    root = os.environ.get("TPTP_ROOT") or path.parent
    try:
        parse_problem(text, directory_resolver(root), source=str(path))
    except TptpError as exc:
        return _fail(str(exc))
    library = ProblemLibrary({path.stem: text}, directory_resolver(root))
    try:
        model, featurizer, _ = _load_model(args.model, args.max_clauses)
        env = SaturationEnv(EnvConfig(args.step_limit, args.max_clauses, [path.stem], args.seed), library)
        outcome = agent.run_episode(env, model, 0.0, np.random.default_rng(args.seed), featurizer)
    except (EnvError, ValueError, OSError) as exc:
        return _fail(str(exc))
    if not outcome.solved:
        print(f"% no proof: {outcome.terminal_reason} after {len(outcome.steps)} steps")
        return 1
    print(f"% proof found in {len(outcome.steps)} steps")
    print("\n".join(_derivation_lines(env.state, outcome.proof_ids)))
    return 0


def cmd_evaluate(args) -> int:
    try:
        library, good, bad = _parseable_library(args.problems)
        model, featurizer, model_name = _load_model(args.model, args.max_clauses)
        env = SaturationEnv(EnvConfig(args.step_limit, args.max_clauses, good, args.seed), library)
        rng = np.random.default_rng(args.seed)
        results = agent.evaluate(env, good, model, featurizer, args.epsilon, rng)
    except (EnvError, ValueError, OSError) as exc:
        return _fail(str(exc))
    print(f"# model: {model_name}; epsilon: {args.epsilon}")
    print(f"{'problem':<32} {'solved':>6} {'steps':>6} {'clauses':>8}  terminal")
    for r in results:
        print(f"{r.problem_id:<32} {'yes' if r.solved else 'no':>6} {r.steps:>6} {r.clauses:>8}  {r.terminal_reason}")
    for pid in bad:
        print(f"{pid:<32} {'error':>6} {'-':>6} {'-':>8}  parse_error")
    solved = sum(r.solved for r in results)
    print(f"total: {len(results) + len(bad)} problems, {solved} solved, {len(bad)} errors")
    return 0


def cmd_serve(args) -> int:
    try:
        library, good, _ = _parseable_library(args.problems)
        config = EnvConfig(args.step_limit, args.max_clauses, good, args.seed)
    except (EnvError, OSError) as exc:
        return _fail(str(exc))

    def make_env() -> SaturationEnv:
        return SaturationEnv(config, library)

    if args.stdio:
        serve_stdio(make_env)
    else:
        serve_tcp(make_env, args.tcp, args.host, announce=lambda port: print(port, flush=True))
    return 0


def cmd_gen(args) -> int:
    try:
        path = write_chain(args.out, args.n, args.distractors, args.seed)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    print(path)
    return 0


COMMANDS = {
    "train": cmd_train,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
    "gen": cmd_gen,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
