"""Newline-delimited JSON sessions driving an environment over stdio or TCP.

Every request line gets exactly one response line, in order. Responses are
canonical: fixed key order, no whitespace, shortest round-trip floats.
"""

from __future__ import annotations

import io
import json
import logging
import socketserver
import sys
from typing import Any, Callable, Optional, TextIO

from .env import (
    ClauseProcessedError,
    EnvError,
    EpisodeOverError,
    InvalidActionError,
    NoEpisodeError,
    Observation,
    ProblemLoadError,
    SaturationEnv,
)

log = logging.getLogger(__name__)

BAD_REQUEST = "bad_request"
BAD_STATE = "bad_state"
BAD_ACTION = "bad_action"
UNKNOWN_PROBLEM = "unknown_problem"
ENV_ERROR = "env_error"

_FIELDS = {
    "reset": ({"op", "request_id"}, {"problem"}),
    "step": ({"op", "request_id", "action"}, set()),
    "close": ({"op", "request_id"}, set()),
}


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def observation_to_dict(obs: Observation) -> dict:
    return {
        "clauses": [
            {
                "id": c.id,
                "order_number": c.order_number,
                "text": c.text,
                "size": c.size,
                "processed": c.processed,
            }
            for c in obs.clauses
        ],
        "action_mask": list(obs.action_mask),
        "steps_taken": obs.steps_taken,
        "problem_id": obs.problem_id,
    }


class RequestError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class Session:
    """One protocol session owning one environment."""

    def __init__(self, env: SaturationEnv):
        self.env = env
        self.started = False
        self.closed = False

    def handle_line(self, line: str) -> str:
        request_id = None
        try:
            try:
                request = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RequestError(BAD_REQUEST, f"malformed JSON: {exc.msg}") from None
            if not isinstance(request, dict):
                raise RequestError(BAD_REQUEST, "request must be a JSON object")
            if _is_int(request.get("request_id")):
                request_id = request["request_id"]
            response = self._dispatch(request)
        except RequestError as exc:
            response = {"ok": False, "error": {"code": exc.code, "message": exc.message}}
        return canonical_json({"request_id": request_id, **response})

    def _dispatch(self, request: dict) -> dict:
        op = request.get("op")
        if op not in _FIELDS:
            raise RequestError(BAD_REQUEST, f"unknown op {op!r}")
        required, optional = _FIELDS[op]
        missing = required - request.keys()
        extra = request.keys() - required - optional
        if missing:
            raise RequestError(BAD_REQUEST, f"missing field(s): {', '.join(sorted(missing))}")
        if extra:
            raise RequestError(BAD_REQUEST, f"unexpected field(s) for {op}: {', '.join(sorted(extra))}")
        if not _is_int(request["request_id"]):
            raise RequestError(BAD_REQUEST, "request_id must be an integer")
        if op == "reset":
            return self._reset(request.get("problem"))
        if op == "step":
            return self._step(request["action"])
        self.closed = True
        return {"ok": True}

    def _reset(self, problem: Optional[str]) -> dict:
        if problem is not None and not isinstance(problem, str):
            raise RequestError(BAD_REQUEST, "problem must be a string")
        if problem is not None and problem not in self.env.library:
            raise RequestError(UNKNOWN_PROBLEM, f"unknown problem '{problem}'")
        try:
            obs = self.env.reset(problem)
        except ProblemLoadError as exc:
            raise RequestError(ENV_ERROR, str(exc)) from None
        except EnvError as exc:
            raise RequestError(ENV_ERROR, str(exc)) from None
        self.started = True
        return {
            "ok": True,
            "observation": observation_to_dict(obs),
            "reward": 0.0,
            "terminated": False,
            "truncated": False,
        }

    def _step(self, action) -> dict:
        if not _is_int(action):
            raise RequestError(BAD_REQUEST, "action must be an integer")
        try:
            result = self.env.step(action)
        except (NoEpisodeError, EpisodeOverError) as exc:
            raise RequestError(BAD_STATE, str(exc)) from None
        except (InvalidActionError, ClauseProcessedError) as exc:
            raise RequestError(BAD_ACTION, str(exc)) from None
        info = {"terminal_reason": result.info["terminal_reason"]}
        if "proof_clause_ids" in result.info:
            info["proof_clause_ids"] = result.info["proof_clause_ids"]
        return {
            "ok": True,
            "observation": observation_to_dict(result.observation),
            "reward": result.reward,
            "terminated": result.terminated,
            "truncated": result.truncated,
            "info": info,
        }


def run_session(env: SaturationEnv, infile: TextIO, outfile: TextIO) -> None:
    """Serve one session until ``close`` or end of input. Blank lines are ignored."""
    session = Session(env)
    for line in infile:
        if not line.strip():
            continue
        outfile.write(session.handle_line(line) + "\n")
        outfile.flush()
        if session.closed:
            break


def serve_stdio(make_env: Callable[[], SaturationEnv]) -> None:
    stdin = io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8")
    stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", newline="\n")
    run_session(make_env(), stdin, stdout)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        infile = io.TextIOWrapper(self.rfile, encoding="utf-8", newline="\n")
        outfile = io.TextIOWrapper(self.wfile, encoding="utf-8", newline="\n", write_through=True)
        try:
            run_session(self.server.make_env(), infile, outfile)
        except (ConnectionError, UnicodeDecodeError) as exc:
            log.warning("session from %s ended: %s", self.client_address, exc)


class SessionServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, make_env: Callable[[], SaturationEnv]):
        super().__init__(address, _Handler)
        self.make_env = make_env

    @property
    def port(self) -> int:
        return self.server_address[1]


def serve_tcp(make_env: Callable[[], SaturationEnv], port: int, host: str = "127.0.0.1", announce=print):
    """Serve sessions, one per connection, each with a fresh environment."""
    with SessionServer((host, port), make_env) as server:
        announce(server.port)
        server.serve_forever()
