"""JSON persistence with exact floating-point round trips.

Floats are stored as C99 hex literals inside small tagged objects
(``{"~f": "0x1.8p+1"}``), complex numbers as tagged pairs, and arrays as
tagged nested lists.  Decoding restores bit-identical values, which the
replay and verification paths rely on.  Plain JSON numbers are accepted
everywhere on input so hand-written files stay pleasant to author.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .renorm import RenormReport
from .spaces import GrowthLaw
from .witness import WitnessCertificate, WitnessStage

CERT_SCHEMA = "semigroup-lab/cert/1"
REPORT_SCHEMA = "semigroup-lab/report/1"
CONFIG_SCHEMA = "semigroup-lab/config/1"


def encode(value):
    """Recursively encode a value into tagged, JSON-safe form."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return {"~f": float(value).hex()}
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        return {"~c": [z.real.hex(), z.imag.hex()]}
    if isinstance(value, np.ndarray):
        return {"~a": encode(value.tolist())}
    if isinstance(value, (list, tuple)):
        return [encode(x) for x in value]
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode(value):
    """Invert :func:`encode`; tagged arrays come back as nested lists."""
    if isinstance(value, dict):
        keys = set(value)
        if keys == {"~f"}:
            return float.fromhex(value["~f"])
        if keys == {"~c"}:
            return complex(float.fromhex(value["~c"][0]), float.fromhex(value["~c"][1]))
        if keys == {"~a"}:
            return decode(value["~a"])
        return {k: decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode(x) for x in value]
    return value


def dumps_canonical(payload: dict) -> str:
    """The canonical textual form: sorted keys, two-space indent."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def save_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(dumps_canonical(payload), encoding="utf-8")


def load_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def law_to_dict(law: GrowthLaw) -> dict:
    return {
        "kind": law.kind,
        "param": encode(law.param),
        "values": [encode(v) for v in law.values],
    }


def law_from_dict(data: dict) -> GrowthLaw:
    return GrowthLaw(
        kind=data["kind"],
        param=float(decode(data.get("param", 0.0))),
        values=tuple(decode(v) for v in data.get("values", [])),
    )


def _stage_to_dict(stage: WitnessStage) -> dict:
    return {
        "index": stage.index,
        "vector": encode(stage.vector),
        "generator_pairing": encode(stage.generator_pairing),
        "steps": stage.steps,
        "limit_error": encode(stage.limit_error),
        "stability_radius": encode(stage.stability_radius),
        "log_value": encode(stage.log_value),
        "bump_radius": encode(stage.bump_radius),
        "search_target": encode(stage.search_target),
        "direction_index": stage.direction_index,
    }


def _stage_from_dict(data: dict) -> WitnessStage:
    def opt_float(key):
        raw = data.get(key)
        return None if raw is None else float(decode(raw))

    return WitnessStage(
        index=int(data["index"]),
        vector=np.asarray(decode(data["vector"]), dtype=np.complex128),
        generator_pairing=complex(decode(data["generator_pairing"])),
        steps=int(data["steps"]),
        limit_error=float(decode(data["limit_error"])),
        stability_radius=float(decode(data["stability_radius"])),
        log_value=complex(decode(data["log_value"])),
        bump_radius=opt_float("bump_radius"),
        search_target=opt_float("search_target"),
        direction_index=data.get("direction_index"),
    )


def cert_to_dict(cert: WitnessCertificate) -> dict:
    return {
        "schema": CERT_SCHEMA,
        "eps": encode(cert.eps),
        "p": encode(cert.p),
        "law": None if cert.law is None else law_to_dict(cert.law),
        "dense_matrix": None if cert.dense_matrix is None else encode(cert.dense_matrix),
        "functional": encode(cert.functional),
        "initial": encode(cert.initial),
        "stages": [_stage_to_dict(st) for st in cert.stages],
        "witness": encode(cert.witness),
        "witness_log_values": [encode(v) for v in cert.witness_log_values],
        "witness_errors": [encode(v) for v in cert.witness_errors],
        "j_max": cert.j_max,
        "build_seed": cert.build_seed,
    }


def cert_from_dict(data: dict) -> WitnessCertificate:
    if data.get("schema") != CERT_SCHEMA:
        raise ValueError(f"not a certificate payload: schema {data.get('schema')!r}")
    dense = data.get("dense_matrix")
    return WitnessCertificate(
        eps=float(decode(data["eps"])),
        p=float(decode(data["p"])),
        law=None if data.get("law") is None else law_from_dict(data["law"]),
        dense_matrix=None if dense is None else np.asarray(decode(dense), dtype=np.complex128),
        functional=np.asarray(decode(data["functional"]), dtype=np.complex128),
        initial=np.asarray(decode(data["initial"]), dtype=np.complex128),
        stages=tuple(_stage_from_dict(st) for st in data["stages"]),
        witness=np.asarray(decode(data["witness"]), dtype=np.complex128),
        witness_log_values=tuple(complex(decode(v)) for v in data["witness_log_values"]),
        witness_errors=tuple(float(decode(v)) for v in data["witness_errors"]),
        j_max=int(data["j_max"]),
        build_seed=int(data["build_seed"]),
    )


def report_to_dict(report: RenormReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "kind": report.kind,
        "seed": report.seed,
        "vector_samples": report.vector_samples,
        "time_samples": report.time_samples,
        "parameters": encode(report.parameters),
        "summary": encode(report.summary),
        "lambdas": [encode(v) for v in report.lambdas],
        "violations": encode([list(row) for row in report.violations]),
        "passed": report.passed,
        "source": encode(report.source),
    }


def report_from_dict(data: dict) -> RenormReport:
    if data.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"not a report payload: schema {data.get('schema')!r}")
    return RenormReport(
        kind=data["kind"],
        seed=int(data["seed"]),
        vector_samples=int(data["vector_samples"]),
        time_samples=int(data["time_samples"]),
        parameters=decode(data["parameters"]),
        summary=decode(data["summary"]),
        lambdas=tuple(float(decode(v)) for v in data["lambdas"]),
        violations=tuple(tuple(row) for row in decode(data["violations"])),
        passed=bool(data["passed"]),
        source=decode(data.get("source", {})),
    )
