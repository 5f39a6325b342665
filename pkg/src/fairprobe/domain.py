"""Discrete input domains, uniform sampling, protected-variant expansion, and CSV ingestion.

An input domain is an ordered list of integer parameters, each with inclusive
bounds and a protected flag. Concrete inputs are plain tuples of ints, ordered
by parameter index; all domain types are immutable after construction.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundError, DomainError, ParseError, SchemaError

PointInput = tuple[int, ...]


@dataclass(frozen=True)
class ParameterSpec:
    """One integer input parameter with inclusive bounds."""

    name: str
    index: int
    min_value: int
    max_value: int
    protected: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise DomainError("parameter name must be nonempty")
        if self.min_value > self.max_value:
            raise DomainError(
                f"parameter {self.name!r}: min_value {self.min_value} exceeds "
                f"max_value {self.max_value}"
            )

    @property
    def size(self) -> int:
        return self.max_value - self.min_value + 1


class InputDomain:
    """Ordered parameter specs plus the protected/non-protected split.

    Requires at least one protected and at least one non-protected parameter;
    indices must be 0..n-1 in order.
    """

    def __init__(self, params: Sequence[ParameterSpec]):
        params = tuple(params)
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise DomainError("parameter names must be unique")
        for i, p in enumerate(params):
            if p.index != i:
                raise DomainError(
                    f"parameter {p.name!r} has index {p.index}, expected {i}"
                )
        protected = tuple(p.index for p in params if p.protected)
        free = tuple(p.index for p in params if not p.protected)
        if not protected:
            raise DomainError("domain needs at least one protected parameter")
        if not free:
            raise DomainError("domain needs at least one non-protected parameter")
        self.params = params
        self.n = len(params)
        self.protected_indices = protected
        self.free_indices = free

    @property
    def cardinality(self) -> int:
        size = 1
        for p in self.params:
            size *= p.size
        return size

    @property
    def protected_cardinality(self) -> int:
        size = 1
        for i in self.protected_indices:
            size *= self.params[i].size
        return size

    @property
    def free_cardinality(self) -> int:
        size = 1
        for i in self.free_indices:
            size *= self.params[i].size
        return size

    def contains(self, values: Sequence[int]) -> bool:
        if len(values) != self.n:
            return False
        return all(
            p.min_value <= v <= p.max_value for p, v in zip(self.params, values)
        )

    def check_bounds(self, values: Sequence[int]) -> None:
        if len(values) != self.n:
            raise BoundError(
                f"input has {len(values)} values, domain has {self.n} parameters"
            )
        for p, v in zip(self.params, values):
            if not p.min_value <= v <= p.max_value:
                raise BoundError(
                    f"value {v} for parameter {p.name!r} outside "
                    f"[{p.min_value}, {p.max_value}]"
                )

    def __eq__(self, other: object) -> bool:
        return isinstance(other, InputDomain) and self.params == other.params

    def __repr__(self) -> str:
        return f"InputDomain({list(self.params)!r})"


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable rows of (input tuple, integer label) tied to a domain."""

    domain: InputDomain
    rows: tuple[tuple[PointInput, int], ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    def features(self) -> np.ndarray:
        return np.array([list(inp) for inp, _ in self.rows], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([lab for _, lab in self.rows], dtype=np.int64)

    def extend(self, extra: Iterable[tuple[PointInput, int]], source: str) -> "LabeledDataset":
        return LabeledDataset(self.domain, self.rows + tuple(extra), source)


def sample_uniform(domain: InputDomain, rng: np.random.Generator) -> PointInput:
    """Draw one input, each parameter independently uniform over its range."""
    return tuple(
        int(rng.integers(p.min_value, p.max_value + 1)) for p in domain.params
    )


def protected_variants(values: Sequence[int], domain: InputDomain) -> list[PointInput]:
    """Expand an input over every combination of protected-parameter values.

    Enumeration is lexicographic ascending over protected indices then values,
    so the order is deterministic and the original input is always included.
    """
    base = list(values)
    ranges = [
        range(domain.params[i].min_value, domain.params[i].max_value + 1)
        for i in domain.protected_indices
    ]
    out: list[PointInput] = []
    for combo in itertools.product(*ranges):
        variant = base.copy()
        for idx, val in zip(domain.protected_indices, combo):
            variant[idx] = val
        out.append(tuple(variant))
    return out


def load_csv(path: str, domain: InputDomain, label_column: str) -> LabeledDataset:
    """Parse a header+integer-cell CSV into a labeled dataset.

    Columns are matched by header name, so any column order produces the
    same dataset. Row order is preserved. Errors carry the 1-based file line.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        positions: dict[str, int] = {}
        for name in [p.name for p in domain.params] + [label_column]:
            if name not in header:
                raise SchemaError(f"{path}: missing column {name!r}")
            positions[name] = header.index(name)

        rows: list[tuple[PointInput, int]] = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            cells: dict[str, int] = {}
            for name, col in positions.items():
                raw = record[col].strip()
                try:
                    cells[name] = int(raw)
                except (ValueError, IndexError):
                    raise ParseError(
                        f"{path}: row {line_no}: cell {raw!r} in column "
                        f"{name!r} is not an integer"
                    ) from None
            values = tuple(cells[p.name] for p in domain.params)
            for p in domain.params:
                v = cells[p.name]
                if not p.min_value <= v <= p.max_value:
                    raise BoundError(
                        f"{path}: row {line_no}: value {v} in column "
                        f"{p.name!r} outside [{p.min_value}, {p.max_value}]"
                    )
            rows.append((values, cells[label_column]))
    return LabeledDataset(domain, tuple(rows), source=str(path))


def write_csv(dataset: LabeledDataset, path: str, label_column: str) -> None:
    """Write a dataset back out in index order; inverse of load_csv."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([p.name for p in dataset.domain.params] + [label_column])
        for values, label in dataset.rows:
            writer.writerow(list(values) + [label])


# Domain specification files: one parameter per block, blank-line separated,
# with exactly the keys name/min/max/protected. Lines starting with '#' are
# comments.

_DOMAIN_KEYS = {"name", "min", "max", "protected"}


def parse_domain(text: str) -> InputDomain:
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            if current:
                blocks.append(current)
                current = {}
            continue
        if stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ParseError(f"domain line {line_no}: expected 'key: value'")
        key, _, value = stripped.partition(":")
        key = key.strip()
        if key not in _DOMAIN_KEYS:
            raise SchemaError(f"domain line {line_no}: unknown key {key!r}")
        if key in current:
            raise SchemaError(f"domain line {line_no}: duplicate key {key!r}")
        current[key] = value.strip()
    if current:
        blocks.append(current)
    if not blocks:
        raise SchemaError("domain file declares no parameters")

    params = []
    for index, block in enumerate(blocks):
        missing = _DOMAIN_KEYS - set(block)
        if missing:
            raise SchemaError(
                f"domain parameter block {index}: missing key(s) "
                f"{sorted(missing)}"
            )
        flag = block["protected"].lower()
        if flag not in ("true", "false"):
            raise ParseError(
                f"domain parameter {block['name']!r}: protected must be "
                f"true or false, got {block['protected']!r}"
            )
        try:
            lo, hi = int(block["min"]), int(block["max"])
        except ValueError:
            raise ParseError(
                f"domain parameter {block['name']!r}: min/max must be integers"
            ) from None
        params.append(
            ParameterSpec(
                name=block["name"],
                index=index,
                min_value=lo,
                max_value=hi,
                protected=flag == "true",
            )
        )
    return InputDomain(params)


def format_domain(domain: InputDomain) -> str:
    blocks = []
    for p in domain.params:
        blocks.append(
            f"name: {p.name}\nmin: {p.min_value}\nmax: {p.max_value}\n"
            f"protected: {'true' if p.protected else 'false'}\n"
        )
    return "\n".join(blocks)


def load_domain(path: str) -> InputDomain:
    with open(path) as fh:
        return parse_domain(fh.read())


def save_domain(domain: InputDomain, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(format_domain(domain))
