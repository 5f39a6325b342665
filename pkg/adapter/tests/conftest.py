"""Spawn helpers: drive the adapter over its real stdin/stdout pipes."""

import subprocess
import sys

import pytest


class AdapterProcess:
    def __init__(self, *args):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "fairprobe_adapter.cli", *[str(a) for a in args]],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )

    def send_line(self, line: str) -> str:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()
        return self.proc.stdout.readline().rstrip("\n")

    def request(self, obj) -> dict:
        import json

        return json.loads(self.send_line(json.dumps(obj)))

    def alive(self) -> bool:
        return self.proc.poll() is None

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.stdin.close()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


@pytest.fixture
def spawn():
    started = []

    def _spawn(*args):
        proc = AdapterProcess(*args)
        started.append(proc)
        return proc

    yield _spawn
    for proc in started:
        proc.close()
