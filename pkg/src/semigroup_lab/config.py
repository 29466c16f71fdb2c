"""Experiment configuration files and the objects they describe.

Configs are JSON documents; every numeric field accepts a plain number,
a C99 hex-float string, or the tagged forms emitted by
:mod:`semigroup_lab.serialize`, so generated and hand-written configs
interoperate.  Parsing failures raise ConfigError with the offending
field path in the message.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .serialize import CONFIG_SCHEMA, decode
from .spaces import (
    CVec,
    Functional,
    Generator,
    GrowthLaw,
    dense_generator,
    diagonal_generator,
)


def _num(raw, where: str) -> float:
    raw = decode(raw)
    if isinstance(raw, bool) or raw is None:
        raise ConfigError(f"{where}: expected a number, got {raw!r}")
    if isinstance(raw, str):
        try:
            return float.fromhex(raw)
        except ValueError:
            if raw == "inf":
                return math.inf
            raise ConfigError(f"{where}: cannot read {raw!r} as a number") from None
    if isinstance(raw, (int, float)):
        return float(raw)
    raise ConfigError(f"{where}: expected a number, got {type(raw).__name__}")


def _cnum(raw, where: str) -> complex:
    raw = decode(raw)
    if isinstance(raw, complex):
        return raw
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ConfigError(f"{where}: complex entries are [re, im] pairs")
        return complex(_num(raw[0], where), _num(raw[1], where))
    return complex(_num(raw, where))


def _integer(raw, where: str) -> int:
    raw = decode(raw)
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(f"{where}: expected an integer, got {raw!r}")
    return raw


def _section(data: dict, key: str, required: bool = False) -> dict | None:
    raw = data.get(key)
    if raw is None:
        if required:
            raise ConfigError(f"missing required section {key!r}")
        return None
    if not isinstance(raw, dict):
        raise ConfigError(f"section {key!r} must be an object")
    return raw


@dataclass(frozen=True)
class WitnessParams:
    eps: float
    stages: int
    j_max: int
    margin: float
    validation_samples: int


@dataclass(frozen=True)
class RenormParams:
    kind: str
    omega: float | None
    vector_samples: int
    time_samples: int
    grid_points: int
    slack: float
    tol: float
    certificate: str | None


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed experiment description.

    Leaf specs (generator, functional, vector, projection) stay as
    dicts; the builder methods materialize them against the declared
    space so one config object serves every subcommand.
    """

    name: str
    seed: int
    tolerance: float
    dim: int
    p: float
    generator_spec: dict | None
    functional_spec: dict | None
    vector_spec: dict | None
    time: float
    j_min: int
    j_max: int
    witness_spec: dict | None
    renorm_spec: dict | None
    projection_spec: dict | None
    sweep_spec: dict | None

    def generator(self) -> Generator:
        spec = self.generator_spec
        if spec is None:
            raise ConfigError("config declares no generator")
        kind = spec.get("kind")
        if kind == "diagonal":
            law_raw = spec.get("law")
            if not isinstance(law_raw, dict):
                raise ConfigError("generator.law must be an object")
            try:
                law = _parse_law(law_raw)
                return diagonal_generator(law, self.dim)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"generator.law: {exc}") from exc
        if kind == "dense":
            rows = decode(spec.get("matrix"))
            if not isinstance(rows, list):
                raise ConfigError("generator.matrix must be a list of rows")
            try:
                matrix = np.array(
                    [[_cnum(v, "generator.matrix") for v in row] for row in rows],
                    dtype=np.complex128,
                )
                if matrix.shape != (self.dim, self.dim):
                    raise ConfigError(
                        f"generator.matrix is {matrix.shape}, space is {self.dim}"
                    )
                return dense_generator(matrix)
            except ValueError as exc:
                raise ConfigError(f"generator.matrix: {exc}") from exc
        raise ConfigError(f"generator.kind {kind!r} is not diagonal or dense")

    def functional(self) -> Functional:
        spec = self.functional_spec
        if spec is None:
            raise ConfigError("config declares no functional")
        kind = spec.get("kind")
        if kind == "geometric":
            scale = _num(spec.get("scale", 1.0), "functional.scale")
            base = _num(spec.get("base", 2.0), "functional.base")
            if base <= 1.0 or scale == 0.0:
                raise ConfigError("functional.geometric needs base > 1 and scale != 0")
            coords = scale * base ** (-np.arange(self.dim, dtype=np.float64))
            return Functional(coords, self.p)
        if kind == "values":
            values = spec.get("values")
            if not isinstance(values, list) or len(values) != self.dim:
                raise ConfigError(f"functional.values must list {self.dim} entries")
            coords = np.array(
                [_cnum(v, "functional.values") for v in values], dtype=np.complex128
            )
            return Functional(coords, self.p)
        raise ConfigError(f"functional.kind {kind!r} is not geometric or values")

    def vector(self, f: Functional | None = None) -> CVec:
        spec = self.vector_spec
        if spec is None:
            raise ConfigError("config declares no vector")
        kind = spec.get("kind")
        if kind == "basis":
            index = _integer(spec.get("index", 1), "vector.index")
            if not 1 <= index <= self.dim:
                raise ConfigError(f"vector.index {index} outside 1..{self.dim}")
            coords = np.zeros(self.dim, dtype=np.complex128)
            gauge = spec.get("gauge", True)
            if gauge:
                if f is None:
                    f = self.functional()
                weight = f.coords[index - 1]
                if weight == 0.0:
                    raise ConfigError(
                        f"vector.basis cannot gauge against functional zero at {index}"
                    )
                coords[index - 1] = 1.0 / weight
            else:
                coords[index - 1] = 1.0
            return CVec(coords, self.p)
        if kind == "values":
            values = spec.get("values")
            if not isinstance(values, list) or len(values) != self.dim:
                raise ConfigError(f"vector.values must list {self.dim} entries")
            coords = np.array(
                [_cnum(v, "vector.values") for v in values], dtype=np.complex128
            )
            return CVec(coords, self.p)
        raise ConfigError(f"vector.kind {kind!r} is not basis or values")

    def schedule(self) -> list[int]:
        return [2**j for j in range(self.j_min, self.j_max + 1)]

    def witness_params(self) -> WitnessParams:
        spec = self.witness_spec
        if spec is None:
            raise ConfigError("config declares no witness section")
        if "eps" not in spec:
            raise ConfigError("witness.eps is required")
        if "stages" not in spec:
            raise ConfigError("witness.stages is required")
        eps = _num(spec["eps"], "witness.eps")
        if not 0.0 < eps < 0.5:
            raise ConfigError(f"witness.eps must lie in (0, 1/2), got {eps}")
        stages = _integer(spec["stages"], "witness.stages")
        if stages < 0:
            raise ConfigError("witness.stages must be nonnegative")
        return WitnessParams(
            eps=eps,
            stages=stages,
            j_max=_integer(spec.get("j_max", 40), "witness.j_max"),
            margin=_num(spec.get("margin", 0.3), "witness.margin"),
            validation_samples=_integer(
                spec.get("validation_samples", 100), "witness.validation_samples"
            ),
        )

    def renorm_params(self) -> RenormParams:
        spec = self.renorm_spec
        if spec is None:
            raise ConfigError("config declares no renorm section")
        kind = spec.get("kind")
        if kind not in ("classical", "split"):
            raise ConfigError(f"renorm.kind {kind!r} is not classical or split")
        omega = None
        if kind == "classical":
            if "omega" not in spec:
                raise ConfigError("renorm.omega is required for the classical audit")
            omega = _num(spec["omega"], "renorm.omega")
        certificate = spec.get("certificate")
        if certificate is not None and not isinstance(certificate, str):
            raise ConfigError("renorm.certificate must be a path string")
        return RenormParams(
            kind=kind,
            omega=omega,
            vector_samples=_integer(
                spec.get("vector_samples", 1000), "renorm.vector_samples"
            ),
            time_samples=_integer(spec.get("time_samples", 8), "renorm.time_samples"),
            grid_points=_integer(spec.get("grid_points", 257), "renorm.grid_points"),
            slack=_num(spec.get("slack", 1e-10), "renorm.slack"),
            tol=_num(spec.get("tol", 1e-9), "renorm.tol"),
            certificate=certificate,
        )

    def projection(self, f: Functional | None = None, x: CVec | None = None):
        from .projections import DenseProjection, make_rank_one

        spec = self.projection_spec
        if spec is None:
            raise ConfigError("config declares no projection")
        kind = spec.get("kind")
        if kind == "rank_one":
            if f is None:
                f = self.functional()
            if x is None:
                x = self.vector(f)
            return make_rank_one(f, x)
        if kind == "dense":
            rows = decode(spec.get("matrix"))
            if not isinstance(rows, list):
                raise ConfigError("projection.matrix must be a list of rows")
            matrix = np.array(
                [[_cnum(v, "projection.matrix") for v in row] for row in rows],
                dtype=np.complex128,
            )
            if matrix.shape != (self.dim, self.dim):
                raise ConfigError(
                    f"projection.matrix is {matrix.shape}, space is {self.dim}"
                )
            try:
                return DenseProjection(matrix, self.p)
            except ValueError as exc:
                raise ConfigError(f"projection.matrix: {exc}") from exc
        raise ConfigError(f"projection.kind {kind!r} is not rank_one or dense")

    def with_overrides(
        self, seed: int | None = None, tolerance: float | None = None
    ) -> "ExperimentConfig":
        out = self
        if seed is not None:
            out = replace(out, seed=seed)
        if tolerance is not None:
            out = replace(out, tolerance=tolerance)
        return out


def _parse_law(raw: dict) -> GrowthLaw:
    kind = raw.get("kind")
    if not isinstance(kind, str):
        raise ConfigError("generator.law.kind must be a string")
    if kind == "table":
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            raise ConfigError("generator.law.table needs a values list")
        return GrowthLaw(
            kind="table",
            values=tuple(_cnum(v, "generator.law.values") for v in values),
        )
    param = _num(raw.get("param", 0.0), "generator.law.param")
    return GrowthLaw(kind=kind, param=param)


def parse_config(data: dict, name: str = "config") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    schema = data.get("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}")
    space = _section(data, "space", required=True)
    dim = _integer(space.get("dim"), "space.dim")
    if dim < 1:
        raise ConfigError("space.dim must be positive")
    p = _num(space.get("p", 2.0), "space.p")
    if p not in (1.0, 2.0, math.inf):
        raise ConfigError("space.p must be 1, 2, or inf")
    schedule = _section(data, "schedule") or {}
    j_min = _integer(schedule.get("j_min", 0), "schedule.j_min")
    j_max = _integer(schedule.get("j_max", 20), "schedule.j_max")
    if j_min < 0 or j_max < j_min:
        raise ConfigError("schedule needs 0 <= j_min <= j_max")
    return ExperimentConfig(
        name=name,
        seed=_integer(data.get("seed", 0), "seed"),
        tolerance=_num(data.get("tolerance", 1e-3), "tolerance"),
        dim=dim,
        p=p,
        generator_spec=_section(data, "generator"),
        functional_spec=_section(data, "functional"),
        vector_spec=_section(data, "vector"),
        time=_num(data.get("time", 1.0), "time"),
        j_min=j_min,
        j_max=j_max,
        witness_spec=_section(data, "witness"),
        renorm_spec=_section(data, "renorm"),
        projection_spec=_section(data, "projection"),
        sweep_spec=_section(data, "sweep"),
    )


def resolve_config_path(arg: str | Path) -> Path:
    """An existing config path, or the shipped config of that name."""
    path = Path(arg)
    if path.exists():
        return path
    arg = str(arg)
    if "/" not in arg and "\\" not in arg:
        shipped = resources.files("semigroup_lab").joinpath("configs")
        for candidate in (f"{arg}.config.json", arg):
            target = shipped.joinpath(candidate)
            if target.is_file():
                return Path(str(target))
    raise ConfigError(f"no config file at {arg!r} and no shipped config by that name")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a config from a path or from the shipped set by bare name."""
    path = resolve_config_path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    name = path.name
    for suffix in (".config.json", ".json"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return parse_config(data, name=name)
