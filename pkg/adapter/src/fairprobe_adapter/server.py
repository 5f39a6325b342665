"""Request loop: one JSON object per line, strictly alternating.

Responses are canonical: compact JSON with a fixed key order, one per line,
flushed immediately. Nothing but protocol lines ever goes to stdout;
diagnostics belong on stderr. Malformed requests get an error response with
code "protocol" and the loop continues.
"""

from __future__ import annotations

import json
import sys
from typing import IO

from .models import HostedModel


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _error(code: str, msg: str) -> str:
    return _dump({"ok": False, "error": {"code": code, "msg": msg}})


def _handle(model: HostedModel, line: str) -> str:
    try:
        request = json.loads(line)
    except json.JSONDecodeError:
        return _error("protocol", "invalid JSON")
    if not isinstance(request, dict):
        return _error("protocol", "request must be an object")
    op = request.get("op")
    if op == "handshake":
        return _dump(
            {
                "ok": True,
                "params": model.params,
                "alphabet": model.alphabet,
                "model": model.description,
            }
        )
    if op == "predict":
        rows = request.get("rows")
        if not isinstance(rows, list) or not all(
            isinstance(r, list) and all(isinstance(v, int) for v in r) for r in rows
        ):
            return _error("protocol", "rows must be a list of integer lists")
        if any(len(r) != model.params for r in rows):
            return _error("protocol", "row arity mismatch")
        return _dump({"ok": True, "labels": model.predict_rows(rows)})
    return _error("protocol", "unknown op")


def serve(model: HostedModel, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> None:
    """Serve until stdin closes. Blank lines are ignored."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(_handle(model, line) + "\n")
        stdout.flush()
