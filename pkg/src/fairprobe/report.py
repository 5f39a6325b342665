"""Machine-readable run reports.

One canonical serialization (JSON, sorted keys, two-space indent) so that
byte-level regression comparisons are meaningful; every document kind has a
published schema and unknown fields are rejected. The wall_time fields are
the only run-to-run nondeterminism, so comparisons strip them.
"""

from __future__ import annotations

import copy
import hashlib
import json

import jsonschema

from .errors import SchemaError
from .estimator import EstimationResult
from .fairness import Finding
from .retrain import RetrainReport
from .search import SearchConfig, TestSuite

REPORT_FORMAT_TAG = "fairprobe-report-v1"
DEFAULT_FINDINGS_CAP = 1000


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def digest_file(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _finding_json(f: Finding) -> dict:
    return {
        "input": [int(v) for v in f.input],
        "witness": [int(v) for v in f.witness],
        "label_input": int(f.label_input),
        "label_witness": int(f.label_witness),
        "origin": f.origin,
        "step": int(f.step),
    }


def finding_from_json(obj: dict) -> Finding:
    return Finding(
        input=tuple(obj["input"]),
        witness=tuple(obj["witness"]),
        label_input=obj["label_input"],
        label_witness=obj["label_witness"],
        origin=obj["origin"],
        step=obj["step"],
    )


def _suite_sections(suite: TestSuite, findings_cap: int) -> dict:
    return {
        "counters": {
            "inputs_generated": suite.inputs_generated,
            "discriminatory_count": suite.findings_count,
            "unique_discriminatory": len(suite.unique_inputs),
            "percent_discriminatory": float(suite.percent_discriminatory),
        },
        "phases": {
            "global": {"inputs": suite.global_inputs, "findings": suite.global_findings},
            "local": {"inputs": suite.local_inputs, "findings": suite.local_findings},
            "baseline": {
                "inputs": suite.baseline_inputs,
                "findings": suite.baseline_findings,
            },
        },
        "truncated": suite.truncated,
        "findings_sample": [
            _finding_json(f) for f in suite.findings[:findings_cap]
        ],
    }


def _estimation_json(result: EstimationResult) -> dict:
    return {
        "point_estimate": float(result.point_estimate),
        "ci_low": float(result.ci_low),
        "ci_high": float(result.ci_high),
        "trials": int(result.trials),
        "samples_per_trial": int(result.samples_per_trial),
        "per_trial": [float(v) for v in result.per_trial],
    }


def audit_config_echo(
    cfg: SearchConfig,
    domain_file: str,
    domain_digest: str,
    model_ref: str,
    model_digest: str,
    findings_cap: int,
) -> dict:
    return {
        "strategy": cfg.strategy,
        "gamma": float(cfg.gamma.gamma),
        "delta_v": float(cfg.delta_v),
        "delta_pr": float(cfg.delta_pr),
        "global_trials": int(cfg.global_trials),
        "local_trials": int(cfg.local_trials),
        "seed": int(cfg.seed),
        "max_findings": cfg.max_findings,
        "max_inputs": cfg.max_inputs,
        "time_budget": cfg.time_budget,
        "findings_cap": int(findings_cap),
        "domain_file": domain_file,
        "domain_digest": domain_digest,
        "model_ref": model_ref,
        "model_digest": model_digest,
    }


def build_audit_report(
    cfg: SearchConfig,
    suite: TestSuite,
    *,
    domain_file: str,
    domain_digest: str,
    model_ref: str,
    model_digest: str,
    findings_cap: int = DEFAULT_FINDINGS_CAP,
    error: str | None = None,
) -> dict:
    doc = {
        "format_version": REPORT_FORMAT_TAG,
        "kind": "audit",
        "config": audit_config_echo(
            cfg, domain_file, domain_digest, model_ref, model_digest, findings_cap
        ),
        "wall_time": float(suite.wall_time),
        **_suite_sections(suite, findings_cap),
    }
    if error is not None:
        doc["error"] = error
    return doc


def build_estimate_report(
    result: EstimationResult,
    *,
    gamma: float,
    seed: int,
    domain_file: str,
    domain_digest: str,
    model_ref: str,
    model_digest: str,
    wall_time: float,
) -> dict:
    m = result.samples_per_trial
    counts = [int(round(p * m / 100.0)) for p in result.per_trial]
    return {
        "format_version": REPORT_FORMAT_TAG,
        "kind": "estimate",
        "config": {
            "gamma": float(gamma),
            "m": int(m),
            "K": int(result.trials),
            "seed": int(seed),
            "domain_file": domain_file,
            "domain_digest": domain_digest,
            "model_ref": model_ref,
            "model_digest": model_digest,
        },
        "counters": {
            "inputs_generated": int(m * result.trials),
            "discriminatory_count": int(sum(counts)),
            "percent_discriminatory": float(result.point_estimate),
        },
        "estimation": _estimation_json(result),
        "wall_time": float(wall_time),
    }


def build_retrain_report(
    report: RetrainReport,
    *,
    model_kind: str,
    hyperparams: dict,
    m: int,
    K: int,
    gamma: float,
    seed: int,
    domain_file: str,
    domain_digest: str,
    csv_file: str,
    findings_file: str,
    final_model_digest: str,
    final_model_path: str,
    wall_time: float,
) -> dict:
    return {
        "format_version": REPORT_FORMAT_TAG,
        "kind": "retrain",
        "config": {
            "model_kind": model_kind,
            "hyperparams": {k: v for k, v in sorted(hyperparams.items())},
            "m": int(m),
            "K": int(K),
            "gamma": float(gamma),
            "seed": int(seed),
            "domain_file": domain_file,
            "domain_digest": domain_digest,
            "csv_file": csv_file,
            "findings_file": findings_file,
        },
        "retraining": {
            "iterations": [
                {
                    "index": it.index,
                    "p_percent": float(it.p_percent),
                    "rows_added": int(it.rows_added),
                    "estimate_before": float(it.estimate_before),
                    "estimate_after": float(it.estimate_after),
                    "accepted": bool(it.accepted),
                }
                for it in report.iterations
            ],
            "initial_estimate": float(report.initial_estimate),
            "final_estimate": float(report.final_estimate),
            "total_added": int(report.total_added),
            "percent_added": float(report.percent_added),
            "improvement_percent": float(report.improvement_percent),
            "final_model_digest": final_model_digest,
            "final_model_path": final_model_path,
        },
        "wall_time": float(wall_time),
    }


def build_compare_report(
    rows: list[dict],
    *,
    seeds: list[int],
    budget: int,
    gamma: float,
    global_fraction: float,
    domain_file: str,
    domain_digest: str,
    model_ref: str,
    model_digest: str,
    wall_time: float,
) -> dict:
    return {
        "format_version": REPORT_FORMAT_TAG,
        "kind": "compare",
        "config": {
            "seeds": [int(s) for s in seeds],
            "budget": int(budget),
            "gamma": float(gamma),
            "global_fraction": float(global_fraction),
            "domain_file": domain_file,
            "domain_digest": domain_digest,
            "model_ref": model_ref,
            "model_digest": model_digest,
        },
        "comparison": rows,
        "wall_time": float(wall_time),
    }


# ---------------------------------------------------------------------------
# Canonical serialization and parsing
# ---------------------------------------------------------------------------


def serialize_report(doc: dict) -> str:
    validate_report(doc)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"report is not valid JSON: {exc}") from exc
    validate_report(doc)
    return doc


def write_report(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_report(doc))


def load_report(path: str) -> dict:
    with open(path) as fh:
        return parse_report(fh.read())


def findings_from_report(doc: dict) -> list[Finding]:
    if "findings_sample" not in doc:
        raise SchemaError(f"report of kind {doc.get('kind')!r} carries no findings")
    return [finding_from_json(obj) for obj in doc["findings_sample"]]


def strip_wall_time(doc: dict) -> dict:
    """Copy of the document with every wall_time zeroed, for byte comparison."""
    out = copy.deepcopy(doc)

    def scrub(node) -> None:
        if isinstance(node, dict):
            for key, value in node.items():
                if key in ("wall_time", "median_wall_time") and isinstance(
                    value, (int, float)
                ):
                    node[key] = 0.0
                else:
                    scrub(value)
        elif isinstance(node, list):
            for item in node:
                scrub(item)

    scrub(out)
    return out


def comparison_bytes(doc: dict) -> bytes:
    return serialize_report(strip_wall_time(doc)).encode()


# ---------------------------------------------------------------------------
# Schemas
# ---------------------------------------------------------------------------


def _obj(properties: dict, required: list[str] | None = None) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": sorted(required if required is not None else properties),
        "additionalProperties": False,
    }


_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_STR = {"type": "string"}
_NULLABLE_NUMBER = {"type": ["number", "null"]}
_NULLABLE_INT = {"type": ["integer", "null"]}
_NULLABLE_STR = {"type": ["string", "null"]}

_FINDING_SCHEMA = _obj(
    {
        "input": {"type": "array", "items": _INT},
        "witness": {"type": "array", "items": _INT},
        "label_input": _INT,
        "label_witness": _INT,
        "origin": {"enum": ["global", "local", "baseline"]},
        "step": _INT,
    }
)

_PHASE = _obj({"inputs": _INT, "findings": _INT})

_AUDIT_COUNTERS = _obj(
    {
        "inputs_generated": _INT,
        "discriminatory_count": _INT,
        "unique_discriminatory": _INT,
        "percent_discriminatory": _NUMBER,
    }
)

_ESTIMATION = _obj(
    {
        "point_estimate": _NUMBER,
        "ci_low": _NUMBER,
        "ci_high": _NUMBER,
        "trials": _INT,
        "samples_per_trial": _INT,
        "per_trial": {"type": "array", "items": _NUMBER},
    }
)

_AUDIT_SCHEMA = _obj(
    {
        "format_version": {"const": REPORT_FORMAT_TAG},
        "kind": {"const": "audit"},
        "config": _obj(
            {
                "strategy": _STR,
                "gamma": _NUMBER,
                "delta_v": _NUMBER,
                "delta_pr": _NUMBER,
                "global_trials": _INT,
                "local_trials": _INT,
                "seed": _INT,
                "max_findings": _NULLABLE_INT,
                "max_inputs": _NULLABLE_INT,
                "time_budget": _NULLABLE_NUMBER,
                "findings_cap": _INT,
                "domain_file": _STR,
                "domain_digest": _STR,
                "model_ref": _STR,
                "model_digest": _STR,
            }
        ),
        "counters": _AUDIT_COUNTERS,
        "phases": _obj({"global": _PHASE, "local": _PHASE, "baseline": _PHASE}),
        "truncated": _NULLABLE_STR,
        "findings_sample": {"type": "array", "items": _FINDING_SCHEMA},
        "wall_time": _NUMBER,
        "error": _STR,
    },
    required=[
        "format_version",
        "kind",
        "config",
        "counters",
        "phases",
        "truncated",
        "findings_sample",
        "wall_time",
    ],
)

_ESTIMATE_SCHEMA = _obj(
    {
        "format_version": {"const": REPORT_FORMAT_TAG},
        "kind": {"const": "estimate"},
        "config": _obj(
            {
                "gamma": _NUMBER,
                "m": _INT,
                "K": _INT,
                "seed": _INT,
                "domain_file": _STR,
                "domain_digest": _STR,
                "model_ref": _STR,
                "model_digest": _STR,
            }
        ),
        "counters": _obj(
            {
                "inputs_generated": _INT,
                "discriminatory_count": _INT,
                "percent_discriminatory": _NUMBER,
            }
        ),
        "estimation": _ESTIMATION,
        "wall_time": _NUMBER,
        "error": _STR,
    },
    required=[
        "format_version",
        "kind",
        "config",
        "counters",
        "estimation",
        "wall_time",
    ],
)

_RETRAIN_SCHEMA = _obj(
    {
        "format_version": {"const": REPORT_FORMAT_TAG},
        "kind": {"const": "retrain"},
        "config": _obj(
            {
                "model_kind": _STR,
                "hyperparams": {"type": "object"},
                "m": _INT,
                "K": _INT,
                "gamma": _NUMBER,
                "seed": _INT,
                "domain_file": _STR,
                "domain_digest": _STR,
                "csv_file": _STR,
                "findings_file": _STR,
            }
        ),
        "retraining": _obj(
            {
                "iterations": {
                    "type": "array",
                    "items": _obj(
                        {
                            "index": _INT,
                            "p_percent": _NUMBER,
                            "rows_added": _INT,
                            "estimate_before": _NUMBER,
                            "estimate_after": _NUMBER,
                            "accepted": {"type": "boolean"},
                        }
                    ),
                },
                "initial_estimate": _NUMBER,
                "final_estimate": _NUMBER,
                "total_added": _INT,
                "percent_added": _NUMBER,
                "improvement_percent": _NUMBER,
                "final_model_digest": _STR,
                "final_model_path": _STR,
            }
        ),
        "wall_time": _NUMBER,
        "error": _STR,
    },
    required=["format_version", "kind", "config", "retraining", "wall_time"],
)

_COMPARE_SCHEMA = _obj(
    {
        "format_version": {"const": REPORT_FORMAT_TAG},
        "kind": {"const": "compare"},
        "config": _obj(
            {
                "seeds": {"type": "array", "items": _INT},
                "budget": _INT,
                "gamma": _NUMBER,
                "global_fraction": _NUMBER,
                "domain_file": _STR,
                "domain_digest": _STR,
                "model_ref": _STR,
                "model_digest": _STR,
            }
        ),
        "comparison": {
            "type": "array",
            "items": _obj(
                {
                    "strategy": _STR,
                    "median_percent_discriminatory": _NUMBER,
                    "median_wall_time": _NUMBER,
                    "per_seed": {
                        "type": "array",
                        "items": _obj(
                            {
                                "seed": _INT,
                                "inputs_generated": _INT,
                                "findings": _INT,
                                "percent_discriminatory": _NUMBER,
                                "wall_time": _NUMBER,
                            }
                        ),
                    },
                }
            ),
        },
        "wall_time": _NUMBER,
        "error": _STR,
    },
    required=["format_version", "kind", "config", "comparison", "wall_time"],
)

REPORT_SCHEMAS = {
    "audit": _AUDIT_SCHEMA,
    "estimate": _ESTIMATE_SCHEMA,
    "retrain": _RETRAIN_SCHEMA,
    "compare": _COMPARE_SCHEMA,
}


def validate_report(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("report must be a JSON object")
    kind = doc.get("kind")
    if kind not in REPORT_SCHEMAS:
        raise SchemaError(f"unknown report kind {kind!r}")
    try:
        jsonschema.validate(doc, REPORT_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"report does not match the {kind} schema: {exc.message}") from exc
