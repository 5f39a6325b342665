"""Black-box predict interface: native trainable classifiers, a planted-bias
oracle with a known discriminatory fraction, and a client for out-of-process
models speaking a line-delimited wire protocol.

All native handles are immutable after training and safe for concurrent
predict; an external handle serializes access to its child process.
"""

from __future__ import annotations

import hashlib
import json
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .domain import InputDomain, LabeledDataset, PointInput
from .errors import (
    DomainError,
    ParseError,
    ProtocolError,
    TrainingError,
    TransportError,
)

MODEL_FORMAT_TAG = "fairprobe-model-v1"


class Model:
    """Deterministic labeler over integer input tuples."""

    kind: str = "abstract"
    alphabet: tuple[int, ...] = ()
    n_params: int = 0

    def predict(self, values: Sequence[int]) -> int:
        raise NotImplementedError

    def predict_batch(self, rows: Sequence[Sequence[int]]) -> list[int]:
        return [self.predict(r) for r in rows]


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------


class LogisticModel(Model):
    """Linear decision rule over min-max normalized features.

    Label is +1 when w . (x - lo) / span + b >= 0, else -1. The bounds used
    for normalization are frozen from the training domain.
    """

    kind = "logistic"

    def __init__(
        self,
        weights: np.ndarray,
        bias: float,
        lo: np.ndarray,
        span: np.ndarray,
    ):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = float(bias)
        self.lo = np.asarray(lo, dtype=np.float64)
        self.span = np.asarray(span, dtype=np.float64)
        self.n_params = len(self.weights)
        self.alphabet = (-1, 1)

    def _normalize(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.lo) / self.span

    def predict(self, values: Sequence[int]) -> int:
        x = self._normalize(np.asarray(values, dtype=np.float64))
        z = float(np.dot(x, self.weights)) + self.bias
        return 1 if z >= 0.0 else -1

    def predict_batch(self, rows: Sequence[Sequence[int]]) -> list[int]:
        x = self._normalize(np.asarray(rows, dtype=np.float64))
        z = x @ self.weights + self.bias
        return [1 if v >= 0.0 else -1 for v in z]


def logistic_loss_grad(
    weights: np.ndarray, bias: float, x: np.ndarray, y01: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Mean logistic loss and its analytic gradient for 0/1 targets."""
    z = x @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - y01 * z))
    p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    resid = p - y01
    grad_w = x.T @ resid / len(y01)
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def train_logistic(
    data: LabeledDataset,
    epochs: int = 2000,
    learning_rate: float = 5.0,
    seed: int = 0,
) -> LogisticModel:
    """Fit a binary logistic classifier by full-batch gradient descent.

    Features are min-max normalized to [0,1] using the domain bounds;
    training is deterministic given the seed.
    """
    if len(data) == 0:
        raise TrainingError("cannot train on an empty dataset")
    labels = data.labels()
    bad = set(labels.tolist()) - {-1, 1}
    if bad:
        raise TrainingError(f"logistic training expects labels in {{-1,+1}}, got {sorted(bad)}")

    domain = data.domain
    lo = np.array([p.min_value for p in domain.params], dtype=np.float64)
    span = np.array([max(p.size - 1, 1) for p in domain.params], dtype=np.float64)
    x = (data.features() - lo) / span
    y01 = (labels + 1) / 2.0

    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, 0.01, size=domain.n)
    bias = 0.0
    for _ in range(epochs):
        _, grad_w, grad_b = logistic_loss_grad(weights, bias, x, y01)
        weights = weights - learning_rate * grad_w
        bias = bias - learning_rate * grad_b
    return LogisticModel(weights, bias, lo, span)


# ---------------------------------------------------------------------------
# Decision tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeNode:
    """Either a split (param, threshold, children) or a leaf (label)."""

    label: int | None = None
    param: int | None = None
    threshold: int | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.label is not None


class TreeModel(Model):
    """Binary decision tree with axis-aligned integer-threshold splits."""

    kind = "tree"

    def __init__(self, root: TreeNode, n_params: int, alphabet: tuple[int, ...]):
        self.root = root
        self.n_params = n_params
        self.alphabet = alphabet

    def predict(self, values: Sequence[int]) -> int:
        node = self.root
        while not node.is_leaf:
            node = node.left if values[node.param] <= node.threshold else node.right
        return node.label


def _gini(counts: np.ndarray, total: int) -> float:
    if total == 0:
        return 0.0
    frac = counts / total
    return float(1.0 - np.sum(frac * frac))


def _majority(labels: np.ndarray) -> int:
    values, counts = np.unique(labels, return_counts=True)
    return int(values[np.argmax(counts)])  # ties go to the smallest label


def _best_split(
    x: np.ndarray, y: np.ndarray, classes: np.ndarray, min_leaf: int
) -> tuple[int, int] | None:
    """Scan all (param, threshold) splits; return the Gini-best or None.

    Ties in gain are broken by lowest parameter index, then lowest threshold:
    a later candidate must beat the incumbent by more than float noise.
    """
    n = len(y)
    total_counts = np.array([(y == c).sum() for c in classes], dtype=np.float64)
    parent = _gini(total_counts, n)
    best_gain = 1e-12
    best: tuple[int, int] | None = None
    left_sizes = np.arange(1, n, dtype=np.float64)
    right_sizes = n - left_sizes
    for j in range(x.shape[1]):
        col = x[:, j]
        order = np.argsort(col, kind="stable")
        cs = col[order]
        ys = y[order]
        cut = cs[:-1] != cs[1:]
        if min_leaf > 0:
            cut &= (left_sizes >= min_leaf) & (right_sizes >= min_leaf)
        if not cut.any():
            continue
        cum = np.stack([np.cumsum(ys == c) for c in classes]).astype(np.float64)
        left_counts = cum[:, :-1]
        right_counts = cum[:, -1:] - left_counts
        gini_left = 1.0 - np.sum((left_counts / left_sizes) ** 2, axis=0)
        gini_right = 1.0 - np.sum((right_counts / right_sizes) ** 2, axis=0)
        gain = parent - (left_sizes * gini_left + right_sizes * gini_right) / n
        gain[~cut] = -np.inf
        top = float(gain.max())
        if top > best_gain + 1e-12:
            k = int(np.nonzero(gain >= top - 1e-12)[0][0])
            best_gain = top
            best = (j, int(cs[k]))
    return best


def _grow(
    x: np.ndarray,
    y: np.ndarray,
    classes: np.ndarray,
    depth: int,
    max_depth: int,
    min_leaf: int,
) -> TreeNode:
    if depth >= max_depth or len(np.unique(y)) == 1 or len(y) < 2 * min_leaf:
        return TreeNode(label=_majority(y))
    split = _best_split(x, y, classes, min_leaf)
    if split is None:
        return TreeNode(label=_majority(y))
    param, threshold = split
    mask = x[:, param] <= threshold
    return TreeNode(
        param=param,
        threshold=threshold,
        left=_grow(x[mask], y[mask], classes, depth + 1, max_depth, min_leaf),
        right=_grow(x[~mask], y[~mask], classes, depth + 1, max_depth, min_leaf),
    )


def train_tree(
    data: LabeledDataset,
    max_depth: int = 6,
    min_leaf: int = 1,
    seed: int = 0,
) -> TreeModel:
    """Grow a Gini-impurity decision tree; fully deterministic.

    The seed is accepted for interface uniformity with the other trainers;
    greedy growth with specified tie-breaking has no random choices.
    """
    del seed
    if len(data) == 0:
        raise TrainingError("cannot train on an empty dataset")
    if max_depth < 0 or min_leaf < 1:
        raise TrainingError("max_depth must be >= 0 and min_leaf >= 1")
    x = data.features().astype(np.int64)
    y = data.labels()
    classes = np.unique(y)
    root = _grow(x, y, classes, 0, max_depth, min_leaf)
    return TreeModel(root, data.domain.n, tuple(int(c) for c in classes))


# ---------------------------------------------------------------------------
# Planted-bias oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlantedBiasSpec:
    """A rectangular biased region over non-protected parameters.

    `region` maps non-protected parameter indices to inclusive (lo, hi)
    sub-ranges; indices left out are unconstrained (full range). An empty
    mapping therefore covers the whole non-protected domain, while
    `region=None` declares no biased region at all. `biased_protected_value`
    is the protected value (or tuple of values, index order) that flips the
    label inside the region.
    """

    region: Mapping[int, tuple[int, int]] | None
    biased_protected_value: int | tuple[int, ...]


class PlantedModel(Model):
    """Synthetic classifier whose discriminatory fraction is known exactly."""

    kind = "planted"

    def __init__(
        self,
        domain: InputDomain,
        region: dict[int, tuple[int, int]] | None,
        biased: tuple[int, ...],
    ):
        self.n_params = domain.n
        self.alphabet = (-1, 1)
        self.protected_indices = domain.protected_indices
        self.region = region
        self.biased = biased
        self.bounds = tuple((p.min_value, p.max_value) for p in domain.params)
        self.protected_flags = tuple(p.protected for p in domain.params)
        self.rho = self._exact_fraction(domain)

    def _exact_fraction(self, domain: InputDomain) -> float:
        if self.region is None or domain.protected_cardinality < 2:
            return 0.0
        volume = 1
        for i in domain.free_indices:
            if i in self.region:
                lo, hi = self.region[i]
                volume *= hi - lo + 1
            else:
                volume *= domain.params[i].size
        return volume / domain.free_cardinality

    def _in_region(self, values: Sequence[int]) -> bool:
        if self.region is None:
            return False
        return all(lo <= values[i] <= hi for i, (lo, hi) in self.region.items())

    def predict(self, values: Sequence[int]) -> int:
        prot = tuple(values[i] for i in self.protected_indices)
        if prot == self.biased and self._in_region(values):
            return -1
        return 1


def make_planted(domain: InputDomain, spec: PlantedBiasSpec) -> PlantedModel:
    """Build the oracle model, validating the region against the domain."""
    biased = spec.biased_protected_value
    if isinstance(biased, int):
        biased = (biased,)
    biased = tuple(int(v) for v in biased)
    if len(biased) != len(domain.protected_indices):
        raise DomainError(
            f"biased_protected_value has {len(biased)} values, domain has "
            f"{len(domain.protected_indices)} protected parameters"
        )
    for idx, value in zip(domain.protected_indices, biased):
        p = domain.params[idx]
        if not p.min_value <= value <= p.max_value:
            raise DomainError(
                f"biased value {value} outside bounds of protected "
                f"parameter {p.name!r}"
            )
    region: dict[int, tuple[int, int]] | None = None
    if spec.region is not None:
        region = {}
        for idx, (lo, hi) in spec.region.items():
            if idx in domain.protected_indices:
                raise DomainError(
                    f"region constrains protected parameter index {idx}"
                )
            if not 0 <= idx < domain.n:
                raise DomainError(f"region index {idx} out of range")
            p = domain.params[idx]
            if lo > hi or lo < p.min_value or hi > p.max_value:
                raise DomainError(
                    f"region [{lo}, {hi}] outside bounds of parameter "
                    f"{p.name!r} [{p.min_value}, {p.max_value}]"
                )
            region[int(idx)] = (int(lo), int(hi))
    return PlantedModel(domain, region, biased)


# ---------------------------------------------------------------------------
# External models over the line-delimited wire protocol
# ---------------------------------------------------------------------------


class ExternalModel(Model):
    """Client handle for a model hosted by a child process.

    One JSON object per line on stdin/stdout; requests and responses strictly
    alternate, enforced with a lock (one in-flight request per handle).
    """

    kind = "external"

    def __init__(self, proc: subprocess.Popen, command: str):
        self._proc = proc
        self._lock = threading.Lock()
        self.command = command
        self.description = ""
        self.n_params = 0
        self.alphabet = ()

    def _roundtrip(self, request: dict) -> dict:
        with self._lock:
            if self._proc.poll() is not None:
                raise TransportError(
                    f"model process exited with status {self._proc.returncode}"
                )
            line = json.dumps(request, separators=(",", ":"))
            try:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise TransportError(f"cannot write to model process: {exc}") from exc
            raw = self._proc.stdout.readline()
        if raw == "":
            raise TransportError("model process closed its output stream")
        try:
            response = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"response is not valid JSON: {raw!r}") from exc
        if not isinstance(response, dict) or "ok" not in response:
            raise ProtocolError(f"response missing 'ok' field: {raw!r}")
        if response["ok"] is not True:
            err = response.get("error") or {}
            code, msg = err.get("code", ""), err.get("msg", "")
            if code == "protocol":
                raise ProtocolError(msg or "model rejected the request")
            raise TransportError(msg or "model reported an internal error")
        return response

    def predict(self, values: Sequence[int]) -> int:
        return self.predict_batch([values])[0]

    def predict_batch(self, rows: Sequence[Sequence[int]]) -> list[int]:
        payload = [[int(v) for v in row] for row in rows]
        response = self._roundtrip({"op": "predict", "rows": payload})
        labels = response.get("labels")
        if not isinstance(labels, list) or len(labels) != len(rows):
            raise ProtocolError(
                f"expected {len(rows)} labels, got {labels!r}"
            )
        out = []
        for label in labels:
            if not isinstance(label, int) or label not in self.alphabet:
                raise ProtocolError(
                    f"label {label!r} not in declared alphabet {self.alphabet}"
                )
            out.append(label)
        return out

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self) -> "ExternalModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def connect_external(launch_command: str, domain: InputDomain) -> ExternalModel:
    """Spawn an adapter process and validate its handshake against the domain."""
    argv = shlex.split(launch_command)
    try:
        proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except OSError as exc:
        raise TransportError(f"cannot spawn {launch_command!r}: {exc}") from exc
    handle = ExternalModel(proc, launch_command)
    try:
        hs = handle._roundtrip({"op": "handshake"})
        params = hs.get("params")
        alphabet = hs.get("alphabet")
        if not isinstance(params, int):
            raise ProtocolError(f"handshake 'params' must be an integer, got {params!r}")
        if params != domain.n:
            raise ProtocolError(
                f"model declares {params} parameters, domain has {domain.n}"
            )
        if (
            not isinstance(alphabet, list)
            or not alphabet
            or not all(isinstance(v, int) for v in alphabet)
        ):
            raise ProtocolError(f"handshake 'alphabet' must be nonempty ints, got {alphabet!r}")
        handle.n_params = params
        handle.alphabet = tuple(alphabet)
        handle.description = str(hs.get("model", ""))
    except Exception:
        handle.close()
        raise
    return handle


# ---------------------------------------------------------------------------
# Persistence: self-describing text serialization, versioned
# ---------------------------------------------------------------------------


def _floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in values)


def _tree_lines(node: TreeNode, out: list[str]) -> None:
    if node.is_leaf:
        out.append(f"leaf {node.label}")
    else:
        out.append(f"split {node.param} {node.threshold}")
        _tree_lines(node.left, out)
        _tree_lines(node.right, out)


def format_model(model: Model) -> str:
    lines = [
        MODEL_FORMAT_TAG,
        f"kind: {model.kind}",
        f"params: {model.n_params}",
        f"alphabet: {_ints(model.alphabet)}",
    ]
    if isinstance(model, LogisticModel):
        lines += [
            f"lo: {_floats(model.lo)}",
            f"span: {_floats(model.span)}",
            f"weights: {_floats(model.weights)}",
            f"bias: {repr(model.bias)}",
        ]
    elif isinstance(model, TreeModel):
        nodes: list[str] = []
        _tree_lines(model.root, nodes)
        lines.append(f"nodes: {len(nodes)}")
        lines += nodes
    elif isinstance(model, PlantedModel):
        bounds = [v for pair in model.bounds for v in pair]
        lines.append(f"bounds: {_ints(bounds)}")
        lines.append(f"protected: {_ints(model.protected_indices)}")
        lines.append(f"biased: {_ints(model.biased)}")
        if model.region is None:
            lines.append("region: none")
        else:
            triples = [
                v
                for idx in sorted(model.region)
                for v in (idx, *model.region[idx])
            ]
            lines.append(f"region: {_ints(triples)}")
    else:
        raise ParseError(f"model kind {model.kind!r} has no serialization")
    return "\n".join(lines) + "\n"


def save_model(model: Model, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(format_model(model))


def model_digest(model: Model) -> str:
    """Stable identity for report echoes; content hash for native models."""
    if isinstance(model, ExternalModel):
        blob = json.dumps(
            {
                "command": model.command,
                "params": model.n_params,
                "alphabet": list(model.alphabet),
                "model": model.description,
            },
            sort_keys=True,
        ).encode()
    else:
        blob = format_model(model).encode()
    return hashlib.sha256(blob).hexdigest()


def _parse_fields(text: str) -> tuple[dict[str, str], list[str]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_FORMAT_TAG:
        raise ParseError(f"model file does not start with {MODEL_FORMAT_TAG!r}")
    fields: dict[str, str] = {}
    extra: list[str] = []
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith(("split ", "leaf ")):
            extra.append(line)
        elif ":" in line:
            key, _, value = line.partition(":")
            fields[key.strip()] = value.strip()
        else:
            raise ParseError(f"unparseable model line: {line!r}")
    return fields, extra


def _parse_tree(node_lines: list[str], pos: int = 0) -> tuple[TreeNode, int]:
    parts = node_lines[pos].split()
    if parts[0] == "leaf":
        return TreeNode(label=int(parts[1])), pos + 1
    param, threshold = int(parts[1]), int(parts[2])
    left, pos = _parse_tree(node_lines, pos + 1)
    right, pos = _parse_tree(node_lines, pos)
    return TreeNode(param=param, threshold=threshold, left=left, right=right), pos


def parse_model(text: str) -> Model:
    fields, node_lines = _parse_fields(text)
    try:
        kind = fields["kind"]
        n_params = int(fields["params"])
        alphabet = tuple(int(v) for v in fields["alphabet"].split())
    except (KeyError, ValueError) as exc:
        raise ParseError(f"model file missing or malformed header field: {exc}") from exc

    if kind == "logistic":
        try:
            lo = np.array([float(v) for v in fields["lo"].split()])
            span = np.array([float(v) for v in fields["span"].split()])
            weights = np.array([float(v) for v in fields["weights"].split()])
            bias = float(fields["bias"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed logistic model: {exc}") from exc
        if len(weights) != n_params:
            raise ParseError("weight count does not match declared params")
        return LogisticModel(weights, bias, lo, span)

    if kind == "tree":
        if "nodes" not in fields or int(fields["nodes"]) != len(node_lines):
            raise ParseError("tree node count does not match node lines")
        root, consumed = _parse_tree(node_lines)
        if consumed != len(node_lines):
            raise ParseError("trailing tree nodes after preorder walk")
        return TreeModel(root, n_params, alphabet)

    if kind == "planted":
        from .domain import ParameterSpec  # local import avoids cycle at module load

        try:
            raw_bounds = [int(v) for v in fields["bounds"].split()]
            protected = {int(v) for v in fields["protected"].split()}
            biased = tuple(int(v) for v in fields["biased"].split())
            region_field = fields["region"]
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed planted model: {exc}") from exc
        if len(raw_bounds) != 2 * n_params:
            raise ParseError("bounds count does not match declared params")
        params = [
            ParameterSpec(
                name=f"p{i}",
                index=i,
                min_value=raw_bounds[2 * i],
                max_value=raw_bounds[2 * i + 1],
                protected=i in protected,
            )
            for i in range(n_params)
        ]
        domain = InputDomain(params)
        region: dict[int, tuple[int, int]] | None
        if region_field == "none":
            region = None
        else:
            triple = [int(v) for v in region_field.split()]
            if len(triple) % 3:
                raise ParseError("region must be (param, lo, hi) triples")
            region = {
                triple[i]: (triple[i + 1], triple[i + 2])
                for i in range(0, len(triple), 3)
            }
        return make_planted(domain, PlantedBiasSpec(region, biased))

    raise ParseError(f"unknown model kind {kind!r}")


def load_model(path: str) -> Model:
    with open(path) as fh:
        return parse_model(fh.read())
