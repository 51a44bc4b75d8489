"""Newline-delimited JSON reward service.

Each request line is an object::

    {"id": "r1", "direction": "g2t", "hypothesis": "...",
     "references": ["..."], "spec": [{"metric": "bleu", "weight": 1.0}]}

For ``t2g`` the hypothesis is a marker-linearized graph string and the
references are an array of ``[subject, predicate, object]`` triples. Every
line gets exactly one response line, either ``{"id", "reward", "components"}``
or ``{"id", "error"}``. Malformed input never stops the server.
"""

from __future__ import annotations

import json
import math
import socketserver
import sys
from typing import IO

from .codec import Direction
from .scst.rewards import IncompatibleSpec, RewardSpec, combine, reward_components

MAX_LINE_BYTES = 16 * 1024 * 1024
UNKNOWN_ID = "unknown"


class RequestError(ValueError):
    pass


def _parse_spec(raw, direction: Direction) -> RewardSpec:
    if not isinstance(raw, list) or not raw:
        raise RequestError("'spec' must be a non-empty array of {metric, weight}")
    comps = []
    for item in raw:
        if not isinstance(item, dict):
            raise RequestError("each spec entry must be an object")
        metric, weight = item.get("metric"), item.get("weight", 1.0)
        if not isinstance(metric, str):
            raise RequestError("spec entry needs a string 'metric'")
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or not math.isfinite(weight):
            raise RequestError("spec entry 'weight' must be a finite number")
        comps.append((metric, float(weight)))
    try:
        return RewardSpec(tuple(comps), direction)
    except ValueError as exc:  # unknown metric names surface as ValueError from the enum
        raise RequestError(str(exc)) from None


def _parse_references(raw, direction: Direction):
    if not isinstance(raw, list) or not raw:
        raise RequestError("'references' must be a non-empty array")
    if direction is Direction.G2T:
        if not all(isinstance(r, str) for r in raw):
            raise RequestError("g2t references must be strings")
        return tuple(raw)
    for r in raw:
        if not (isinstance(r, list) and len(r) == 3 and all(isinstance(x, str) for x in r)):
            raise RequestError("t2g references must be [subject, predicate, object] string triples")
    return [list(r) for r in raw]


def evaluate_request(req: dict) -> dict:
    """Score one decoded request; raises ``RequestError`` for bad payloads."""
    try:
        direction = Direction(req.get("direction"))
    except ValueError:
        raise RequestError("'direction' must be \"g2t\" or \"t2g\"") from None
    hyp = req.get("hypothesis")
    if not isinstance(hyp, str):
        raise RequestError("'hypothesis' must be a string")
    spec = _parse_spec(req.get("spec"), direction)
    refs = _parse_references(req.get("references"), direction)
    try:
        components = reward_components(hyp, refs, spec)
    except (IncompatibleSpec, ValueError) as exc:
        raise RequestError(str(exc)) from None
    return {"reward": combine(components, spec), "components": components}


def handle_line(line: bytes | str) -> dict:
    rid = UNKNOWN_ID
    try:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        req = json.loads(line)
        if not isinstance(req, dict):
            raise RequestError("request must be a JSON object")
        if isinstance(req.get("id"), str):
            rid = req["id"]
        else:
            raise RequestError("'id' must be a string")
        return {"id": rid, **evaluate_request(req)}
    except RecursionError:
        return {"id": rid, "error": "request nested too deeply"}
    except Exception as exc:  # noqa: BLE001 - the server must answer every line
        return {"id": rid, "error": f"{type(exc).__name__}: {exc}"}


def encode_response(resp: dict) -> bytes:
    return (json.dumps(resp, sort_keys=True, allow_nan=False) + "\n").encode("utf-8")


def _oversized() -> bytes:
    return encode_response({"id": UNKNOWN_ID, "error": f"request exceeds {MAX_LINE_BYTES} bytes"})


def serve_stream(inp: IO[bytes], out: IO[bytes]) -> int:
    """Answer every line of ``inp`` on ``out``; returns the number of requests."""
    n = 0
    while True:
        line = inp.readline(MAX_LINE_BYTES + 1)
        if not line:
            return n
        if len(line) > MAX_LINE_BYTES and not line.endswith(b"\n"):
            while True:  # discard the rest of the oversized line
                rest = inp.readline(MAX_LINE_BYTES)
                if not rest or rest.endswith(b"\n"):
                    break
            out.write(_oversized())
        elif line.strip():
            out.write(encode_response(handle_line(line)))
        else:
            continue
        out.flush()
        n += 1


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        try:
            serve_stream(self.rfile, self.wfile)
        except (ConnectionError, OSError):
            pass  # the client went away; other connections are unaffected


class RewardTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


def make_tcp_server(host: str = "127.0.0.1", port: int = 0) -> RewardTCPServer:
    return RewardTCPServer((host, port), _Handler)


def serve_rewards(transport: str | int = "stdio", host: str = "127.0.0.1") -> None:
    """Run until EOF (stdio) or until interrupted (``transport`` is a TCP port)."""
    if transport == "stdio":
        serve_stream(sys.stdin.buffer, sys.stdout.buffer)
        return
    with make_tcp_server(host, int(transport)) as server:
        print(f"listening on {server.server_address[0]}:{server.server_address[1]}", file=sys.stderr, flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
