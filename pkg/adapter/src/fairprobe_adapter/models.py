"""Model specs the adapter can host.

Spec grammar (colon-separated):
    const:<label>:<params>                 constant label, declared arity
    linear:<path>                          fairprobe-model-v1 logistic file
    sklearn:<kind>[:k=v[,k=v...]]          scikit-learn classifier, trained
                                           from --train CSV at startup

Training CSVs use a header row; every column except the last is an integer
parameter (in order), the last column is the label.
"""

from __future__ import annotations

import csv

import numpy as np

MODEL_FILE_TAG = "fairprobe-model-v1"

SKLEARN_KINDS = ("decision_tree", "random_forest", "mlpc", "svm")


class SpecError(ValueError):
    """The model spec or its training input is unusable."""


class HostedModel:
    """What the server needs: arity, alphabet, a description, and predict."""

    def __init__(self, params: int, alphabet: list[int], description: str):
        self.params = params
        self.alphabet = alphabet
        self.description = description

    def predict_rows(self, rows: list[list[int]]) -> list[int]:
        raise NotImplementedError


class ConstModel(HostedModel):
    def __init__(self, label: int, params: int):
        super().__init__(
            params,
            sorted({-1, 1} | {label}),
            f"const(label={label},params={params})",
        )
        self.label = label

    def predict_rows(self, rows):
        return [self.label for _ in rows]


class LinearModel(HostedModel):
    """Min-max-normalized linear threshold model from an exported file.

    Reproduces the file format's semantics exactly: label is +1 when
    w . (x - lo) / span + b >= 0, else -1, computed in float64.
    """

    def __init__(self, path: str):
        with open(path) as fh:
            lines = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
        if not lines or lines[0] != MODEL_FILE_TAG:
            raise SpecError(f"{path}: not a {MODEL_FILE_TAG} file")
        fields = {}
        for ln in lines[1:]:
            key, sep, value = ln.partition(":")
            if not sep:
                raise SpecError(f"{path}: unparseable line {ln!r}")
            fields[key.strip()] = value.strip()
        if fields.get("kind") != "logistic":
            raise SpecError(f"{path}: linear spec needs a logistic model file")
        try:
            self.lo = np.array([float(v) for v in fields["lo"].split()])
            self.span = np.array([float(v) for v in fields["span"].split()])
            self.weights = np.array([float(v) for v in fields["weights"].split()])
            self.bias = float(fields["bias"])
        except (KeyError, ValueError) as exc:
            raise SpecError(f"{path}: malformed logistic fields: {exc}") from exc
        super().__init__(
            len(self.weights), [-1, 1], f"linear({len(self.weights)} weights)"
        )

    def predict_rows(self, rows):
        x = (np.asarray(rows, dtype=np.float64) - self.lo) / self.span
        z = x @ self.weights + self.bias
        return [1 if v >= 0.0 else -1 for v in z]


class SklearnModel(HostedModel):
    def __init__(self, kind: str, options: dict, csv_path: str | None, seed: int):
        if kind not in SKLEARN_KINDS:
            raise SpecError(f"unsupported sklearn kind {kind!r}; pick one of {SKLEARN_KINDS}")
        if not csv_path:
            raise SpecError("sklearn specs need --train <csv>")
        x, y = _load_training_csv(csv_path)
        self._clf = _build_sklearn(kind, options, seed)
        self._clf.fit(x, y)
        alphabet = sorted(int(c) for c in self._clf.classes_)
        super().__init__(x.shape[1], alphabet, f"sklearn:{kind}")

    def predict_rows(self, rows):
        labels = self._clf.predict(np.asarray(rows, dtype=np.float64))
        return [int(v) for v in labels]


def _load_training_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpecError(f"{path}: empty training file") from None
        if len(header) < 2:
            raise SpecError(f"{path}: need at least one parameter column and a label")
        rows = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            try:
                rows.append([int(cell) for cell in record])
            except ValueError:
                raise SpecError(f"{path}: non-integer cell at row {line_no}") from None
            if len(rows[-1]) != len(header):
                raise SpecError(f"{path}: row {line_no} has wrong arity")
    if not rows:
        raise SpecError(f"{path}: no training rows")
    data = np.array(rows, dtype=np.float64)
    return data[:, :-1], data[:, -1].astype(int)


def _build_sklearn(kind: str, options: dict, seed: int):
    from sklearn.ensemble import RandomForestClassifier
    from sklearn.neural_network import MLPClassifier
    from sklearn.svm import SVC
    from sklearn.tree import DecisionTreeClassifier

    if kind == "decision_tree":
        return DecisionTreeClassifier(random_state=seed, **options)
    if kind == "random_forest":
        options.setdefault("n_estimators", 50)
        return RandomForestClassifier(random_state=seed, **options)
    if kind == "mlpc":
        options.setdefault("max_iter", 500)
        return MLPClassifier(random_state=seed, **options)
    return SVC(random_state=seed, **options)


def _parse_options(text: str) -> dict:
    options: dict = {}
    for pair in text.split(","):
        if not pair:
            continue
        key, sep, value = pair.partition("=")
        if not sep:
            raise SpecError(f"bad option {pair!r}, expected key=value")
        try:
            options[key] = int(value)
        except ValueError:
            try:
                options[key] = float(value)
            except ValueError:
                options[key] = value
    return options


def build_model(spec: str, train_csv: str | None, seed: int) -> HostedModel:
    head, _, rest = spec.partition(":")
    if head == "const":
        label_text, sep, params_text = rest.partition(":")
        try:
            label, params = int(label_text), int(params_text)
        except ValueError:
            raise SpecError(
                f"const spec must be const:<label>:<params>, got {spec!r}"
            ) from None
        if params < 1:
            raise SpecError("const spec needs at least one parameter")
        return ConstModel(label, params)
    if head == "linear":
        if not rest:
            raise SpecError("linear spec must be linear:<model-file>")
        return LinearModel(rest)
    if head == "sklearn":
        kind, _, option_text = rest.partition(":")
        return SklearnModel(kind, _parse_options(option_text), train_csv, seed)
    raise SpecError(f"unknown model spec {spec!r}; use const:, linear: or sklearn:")
