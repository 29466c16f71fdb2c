"""Command-line front end.

Subcommands: limit-check (scalar product-formula schedules, optionally
against the bounded-limit oracle), witness (build and save a blow-up
certificate), renorm-audit (split or classical renorming audit), verify
(recheck certificates and reports from disk), and sweep (randomized
bounded-convergence trials, parallel across SEMIGROUP_LAB_THREADS).

Exit codes: 0 success, 2 configuration problems, 3 overflow with a
partial CSV written, 4 direction search exhausted the truncation,
5 stability radius underflow, 6 certificate or report verification
failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, resolve_config_path
from .errors import (
    ConfigError,
    InvalidCertificate,
    SemigroupOverflow,
    TruncationInsufficient,
    UnderflowRadius,
    WitnessBuildError,
)
from .projections import projection_norm, random_oblique_projection
from .renorm import quasi_contractivity_audit
from .serialize import (
    CERT_SCHEMA,
    REPORT_SCHEMA,
    cert_from_dict,
    cert_to_dict,
    law_to_dict,
    encode,
    load_json,
    report_from_dict,
    report_to_dict,
    save_json,
)
from .spaces import CVec, Generator, diagonal_generator, norm
from .trotter import bounded_limit_oracle, dense_trotter_apply, scalar_trotter_value
from .witness import build_certificate, verify_certificate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_TRUNCATION = 4
EXIT_UNDERFLOW = 5
EXIT_INVALID = 6

LIMIT_CSV_SCHEMA = "semigroup-lab/limit-csv/1"
SWEEP_CSV_SCHEMA = "semigroup-lab/sweep-csv/1"


def _resolve_config(arg: str) -> Path:
    return resolve_config_path(arg)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, schema: str, fields: list[str], rows: list[list]) -> None:
    lines = [f"# schema={schema}", ",".join(fields)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_limit_check(cfg: ExperimentConfig, out_dir: Path) -> int:
    a = cfg.generator()
    f = cfg.functional()
    x = cfg.vector(f)
    oracle_vec = None
    proj = None
    if cfg.projection_spec is not None:
        proj = cfg.projection(f, x)
        oracle_vec = bounded_limit_oracle(a, proj, cfg.time) @ x.coords
    fields = [
        "steps",
        "step_re",
        "step_im",
        "deriv_re",
        "deriv_im",
        "log_re",
        "log_im",
        "value_re",
        "value_im",
        "err_vs_limit",
        "path",
        "branch_ambiguous",
    ]
    if proj is not None:
        fields.append("product_gap")
    rows: list[list] = []
    code = EXIT_OK
    last_err = math.inf
    try:
        for n in cfg.schedule():
            rec = scalar_trotter_value(a, f, x, cfg.time, n)
            last_err = rec.err_vs_limit
            row = [
                rec.steps,
                rec.step_value.real,
                rec.step_value.imag,
                rec.derivative.real,
                rec.derivative.imag,
                rec.log_value.real,
                rec.log_value.imag,
                None if rec.value is None else rec.value.real,
                None if rec.value is None else rec.value.imag,
                rec.err_vs_limit,
                rec.path,
                rec.branch_ambiguous,
            ]
            if proj is not None:
                product = dense_trotter_apply(a, proj, x, cfg.time, n)
                row.append(norm(CVec(product.coords - oracle_vec, x.p)))
            rows.append(row)
    except (SemigroupOverflow, OverflowError) as exc:
        print(f"overflow after {len(rows)} rows: {exc}", file=sys.stderr)
        code = EXIT_OVERFLOW
    out_path = out_dir / f"{cfg.name}.limit.csv"
    _write_csv(out_path, LIMIT_CSV_SCHEMA, fields, rows)
    verdict = "within" if last_err <= cfg.tolerance else "above"
    print(
        f"limit-check {cfg.name}: {len(rows)} rows -> {out_path}; "
        f"final error {last_err:.3g} {verdict} tolerance {cfg.tolerance:.3g}"
    )
    return code


def _save_certificate(cert, path: Path) -> None:
    save_json(path, cert_to_dict(cert))


def run_witness(cfg: ExperimentConfig, out_dir: Path) -> int:
    a = cfg.generator()
    f = cfg.functional()
    z = cfg.vector(f)
    params = cfg.witness_params()
    cert_path = out_dir / f"{cfg.name}.cert.json"
    try:
        cert = build_certificate(
            a,
            f,
            z,
            eps=params.eps,
            stage_goal=params.stages,
            j_max=params.j_max,
            seed=cfg.seed,
            margin=params.margin,
            validation_samples=params.validation_samples,
        )
    except WitnessBuildError as failure:
        if failure.partial is not None:
            _save_certificate(failure.partial, cert_path)
            print(
                f"partial certificate ({len(failure.partial.stages)} stage(s)) "
                f"-> {cert_path}",
                file=sys.stderr,
            )
        print(f"witness build failed: {failure.cause}", file=sys.stderr)
        cause = failure.cause
        if isinstance(cause, TruncationInsufficient):
            return EXIT_TRUNCATION
        if isinstance(cause, UnderflowRadius):
            return EXIT_UNDERFLOW
        if isinstance(cause, SemigroupOverflow):
            return EXIT_OVERFLOW
        return EXIT_FAIL
    verify_certificate(cert)
    _save_certificate(cert, cert_path)
    for st in cert.stages:
        print(
            f"stage {st.index}: Re f(Ax) = {st.generator_pairing.real:.4f}, "
            f"steps = 2^{st.steps.bit_length() - 1}, "
            f"radius = {st.stability_radius:.3g}, error = {st.limit_error:.3g}"
        )
    print(
        f"witness {cfg.name}: {cert.stage_count} stages certified -> {cert_path}"
    )
    return EXIT_OK


def _generator_source(a: Generator) -> dict:
    if a.kind == "diagonal":
        if a.law is None:
            return {"kind": "diagonal", "entries": encode(a.entries)}
        return {"kind": "diagonal", "law": law_to_dict(a.law)}
    return {"kind": "dense", "matrix": encode(a.matrix)}


def run_renorm_audit(cfg: ExperimentConfig, out_dir: Path, config_dir: Path) -> int:
    params = cfg.renorm_params()
    if params.kind == "classical":
        a = cfg.generator()
        report = quasi_contractivity_audit(
            "classical",
            a=a,
            omega=params.omega,
            p=cfg.p,
            seed=cfg.seed,
            vector_samples=params.vector_samples,
            time_samples=params.time_samples,
            grid_points=params.grid_points,
            tol=params.tol,
        )
        report = replace(report, source={"generator": _generator_source(a)})
    else:
        if params.certificate is not None:
            cert_path = Path(params.certificate)
            if not cert_path.is_absolute():
                cert_path = config_dir / cert_path
            cert = cert_from_dict(load_json(cert_path))
        else:
            witness = cfg.witness_params()
            cert = build_certificate(
                cfg.generator(),
                cfg.functional(),
                cfg.vector(),
                eps=witness.eps,
                stage_goal=witness.stages,
                j_max=witness.j_max,
                seed=cfg.seed,
                margin=witness.margin,
                validation_samples=witness.validation_samples,
            )
        verify_certificate(cert)
        report = quasi_contractivity_audit(
            "split",
            cert=cert,
            seed=cfg.seed,
            vector_samples=params.vector_samples,
            slack=params.slack,
        )
        report = replace(report, source={"certificate": cert_to_dict(cert)})
    out_path = out_dir / f"{cfg.name}.report.json"
    save_json(out_path, report_to_dict(report))
    state = "passed" if report.passed else f"FAILED ({len(report.violations)} violations)"
    print(f"renorm-audit {cfg.name} [{report.kind}]: {state} -> {out_path}")
    if report.lambdas:
        gaps = ", ".join(f"{v:.4f}" for v in report.lambdas)
        print(f"growth exponent lower bounds: {gaps}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _rebuild_report(report):
    src = report.source
    if "certificate" in src:
        cert = cert_from_dict(src["certificate"])
        verify_certificate(cert)
        fresh = quasi_contractivity_audit(
            "split",
            cert=cert,
            seed=report.seed,
            vector_samples=report.vector_samples,
            slack=float(report.parameters["slack"]),
        )
    elif "generator" in src:
        desc = src["generator"]
        if desc.get("kind") == "diagonal" and "law" in desc:
            from .serialize import law_from_dict

            law = law_from_dict(desc["law"])
            a = diagonal_generator(law, int(report.parameters["dim"]))
        elif desc.get("kind") == "diagonal":
            from .serialize import decode as _dec
            from .spaces import diagonal_generator_from_entries

            a = diagonal_generator_from_entries(
                np.asarray(_dec(desc["entries"]), dtype=np.complex128)
            )
        else:
            from .serialize import decode as _dec
            from .spaces import dense_generator

            a = dense_generator(np.asarray(_dec(desc["matrix"]), dtype=np.complex128))
        fresh = quasi_contractivity_audit(
            "classical",
            a=a,
            omega=float(report.parameters["omega"]),
            p=float(report.parameters["p"]),
            seed=report.seed,
            vector_samples=report.vector_samples,
            time_samples=int(report.parameters["time_samples_requested"]),
            grid_points=int(report.parameters["grid_points"]),
            tol=float(report.parameters["tol"]),
        )
    else:
        raise InvalidCertificate(["report embeds no source to re-run"])
    return replace(fresh, source=src)


def run_verify(paths: list[str]) -> int:
    code = EXIT_OK
    for raw in paths:
        path = Path(raw)
        try:
            data = load_json(path)
        except Exception as exc:
            print(f"FAIL {path}: unreadable ({exc})")
            code = EXIT_INVALID
            continue
        schema = data.get("schema")
        try:
            if schema == CERT_SCHEMA:
                cert = cert_from_dict(data)
                verify_certificate(cert)
                print(
                    f"PASS {path}: certificate, {cert.stage_count} stages, "
                    f"eps = {cert.eps:g}"
                )
            elif schema == REPORT_SCHEMA:
                report = report_from_dict(data)
                fresh = _rebuild_report(report)
                if report_to_dict(fresh) != report_to_dict(report):
                    raise InvalidCertificate(["report does not reproduce from its source"])
                state = "passed" if report.passed else "recorded violations"
                print(f"PASS {path}: {report.kind} report reproduces ({state})")
            else:
                raise InvalidCertificate([f"unknown schema {schema!r}"])
        except InvalidCertificate as exc:
            print(f"FAIL {path}: {exc}")
            for line in exc.failures[:10]:
                print(f"  - {line}")
            code = EXIT_INVALID
        except Exception as exc:
            print(f"FAIL {path}: {exc}")
            code = EXIT_INVALID
    return code


def _thread_count() -> int:
    raw = os.environ.get("SEMIGROUP_LAB_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"SEMIGROUP_LAB_THREADS={raw!r} is not an integer")
        if value < 1:
            raise ConfigError("SEMIGROUP_LAB_THREADS must be at least 1")
        return value
    return min(8, os.cpu_count() or 1)


def run_sweep(cfg: ExperimentConfig, out_dir: Path) -> int:
    spec = cfg.sweep_spec
    if spec is None:
        raise ConfigError("config declares no sweep section")
    trials = int(spec.get("trials", 20))
    dim_lo = int(spec.get("dim_min", 2))
    dim_hi = int(spec.get("dim_max", 8))
    gen_scale = float(spec.get("generator_norm", 2.0))
    cap = float(spec.get("projection_norm_cap", 5.0))
    times = [float(t) for t in spec.get("times", [0.5, 1.0, 2.0])]
    steps = cfg.schedule()[-1]
    if not 2 <= dim_lo <= dim_hi:
        raise ConfigError("sweep needs 2 <= dim_min <= dim_max")

    def one_trial(trial: int):
        rng = np.random.default_rng([cfg.seed, trial])
        dim = int(rng.integers(dim_lo, dim_hi + 1))
        raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        matrix = raw * (gen_scale / np.linalg.norm(raw, 2))
        a = Generator(kind="dense", matrix=matrix)
        rank = int(rng.integers(1, dim))
        proj = random_oblique_projection(dim, rank, rng, norm_cap=cap)
        x = CVec(rng.standard_normal(dim) + 1j * rng.standard_normal(dim), 2.0)
        rows = []
        for t in times:
            target = bounded_limit_oracle(a, proj, t) @ x.coords
            try:
                product = dense_trotter_apply(a, proj, x, t, steps)
                gap = norm(CVec(product.coords - target, x.p))
                rows.append(
                    [trial, dim, rank, t, steps, gap, projection_norm(proj), gen_scale]
                )
            except SemigroupOverflow:
                return trial, rows, True
        return trial, rows, False

    overflowed = False
    results: dict[int, list[list]] = {}
    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        for trial, rows, bad in pool.map(one_trial, range(trials)):
            results[trial] = rows
            overflowed = overflowed or bad
    fields = [
        "trial",
        "dim",
        "rank",
        "time",
        "steps",
        "product_gap",
        "projection_norm",
        "generator_norm",
    ]
    merged = [row for trial in sorted(results) for row in results[trial]]
    out_path = out_dir / f"{cfg.name}.sweep.csv"
    _write_csv(out_path, SWEEP_CSV_SCHEMA, fields, merged)
    worst = max((row[5] for row in merged), default=math.nan)
    print(
        f"sweep {cfg.name}: {len(merged)} rows over {trials} trials -> {out_path}; "
        f"worst gap {worst:.3g} vs tolerance {cfg.tolerance:.3g}"
    )
    return EXIT_OVERFLOW if overflowed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="semigroup-lab",
        description="Product-formula limits, blow-up witnesses, renorming audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_common(p: argparse.ArgumentParser, tolerance: bool = True) -> None:
        p.add_argument("--config", required=True, help="config path or shipped config name")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if tolerance:
            p.add_argument(
                "--tolerance", type=float, default=None, help="override the config tolerance"
            )

    with_common(sub.add_parser("limit-check", help="scalar product schedule to CSV"))
    with_common(sub.add_parser("witness", help="build a blow-up certificate"), tolerance=False)
    with_common(sub.add_parser("renorm-audit", help="audit a renorming route"))
    verify_parser = sub.add_parser("verify", help="recheck certificates and reports")
    verify_parser.add_argument("paths", nargs="+", help="cert/report JSON files")
    with_common(sub.add_parser("sweep", help="randomized bounded-convergence trials"))

    args = parser.parse_args(argv)
    if args.command == "verify":
        return run_verify(args.paths)
    try:
        config_path = _resolve_config(args.config)
        cfg = load_config(config_path)
        cfg = cfg.with_overrides(
            seed=args.seed, tolerance=getattr(args, "tolerance", None)
        )
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "limit-check":
            return run_limit_check(cfg, out_dir)
        if args.command == "witness":
            return run_witness(cfg, out_dir)
        if args.command == "renorm-audit":
            return run_renorm_audit(cfg, out_dir, config_path.parent)
        if args.command == "sweep":
            return run_sweep(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
