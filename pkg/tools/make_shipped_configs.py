#!/usr/bin/env python3
"""Regenerate the shipped example configs under src/semigroup_lab/configs/.

The blow-up configs embed a tuned growth-law table produced by the
in-package designer; its values are written as tagged hex floats so a
rebuild replays the exact same ladder bit for bit.  Everything else is
plain JSON, edited here rather than by hand so the files stay in sync.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from semigroup_lab import CVec, Functional, design_blowup_law
from semigroup_lab.serialize import encode

OUT = Path(__file__).resolve().parents[1] / "src" / "semigroup_lab" / "configs"

SEED = 20260823


def write(name: str, payload: dict) -> None:
    path = OUT / f"{name}.config.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def blowup_law_values() -> list:
    dim = 7
    phi = Functional(0.01 * 2.0 ** (-np.arange(dim, dtype=float)), 2.0)
    z = CVec(np.eye(dim, dtype=complex)[0] / phi.coords[0], 2.0)
    law = design_blowup_law(phi, z, eps=0.1, stage_goal=5, j_max=160, seed=SEED)
    return [encode(v) for v in law.values]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)

    write(
        "two_point",
        {
            "schema": "semigroup-lab/config/1",
            "seed": SEED,
            "tolerance": 1e-3,
            "space": {"dim": 2, "p": 2},
            "generator": {"kind": "diagonal", "law": {"kind": "table", "values": [0.0, 2.0]}},
            "functional": {"kind": "values", "values": [0.5, 0.5]},
            "vector": {"kind": "values", "values": [1.0, 1.0]},
            "time": 1.0,
            "schedule": {"j_min": 0, "j_max": 20},
        },
    )

    write(
        "bounded_oracle",
        {
            "schema": "semigroup-lab/config/1",
            "seed": SEED,
            "tolerance": 1e-2,
            "space": {"dim": 4, "p": 2},
            "generator": {
                "kind": "dense",
                "matrix": [
                    [0.0, 2.0, 0.0, 0.0],
                    [0.0, 0.0, 2.0, 0.0],
                    [0.0, 0.0, 0.0, 2.0],
                    [2.0, 0.0, 0.0, 0.0],
                ],
            },
            "functional": {"kind": "values", "values": [0.4, 0.3, 0.2, 0.1]},
            "vector": {"kind": "values", "values": [1.0, 1.0, 1.0, 1.0]},
            "projection": {"kind": "rank_one"},
            "time": 1.0,
            "schedule": {"j_min": 0, "j_max": 16},
        },
    )

    law_values = blowup_law_values()
    blowup_common = {
        "schema": "semigroup-lab/config/1",
        "seed": SEED,
        "space": {"dim": 7, "p": 2},
        "generator": {"kind": "diagonal", "law": {"kind": "table", "values": law_values}},
        "functional": {"kind": "geometric", "scale": 0.01, "base": 2.0},
        "vector": {"kind": "basis", "index": 1},
        "witness": {"eps": 0.1, "stages": 5, "j_max": 160},
    }
    write("blowup_k5", blowup_common)

    write(
        "split_renorm",
        {
            **blowup_common,
            "renorm": {"kind": "split", "vector_samples": 10000},
        },
    )

    write(
        "bounded_contrapositive",
        {
            "schema": "semigroup-lab/config/1",
            "seed": SEED,
            "space": {"dim": 6, "p": 2},
            "generator": {
                "kind": "dense",
                "matrix": [
                    [0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
                    [2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    [0.0, 2.0, 0.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, 0.0, 2.0, 0.0, 0.0],
                    [0.0, 0.0, 0.0, 0.0, 2.0, 0.0],
                ],
            },
            "functional": {"kind": "geometric", "scale": 1.0, "base": 16.0},
            "vector": {"kind": "basis", "index": 1},
            "witness": {"eps": 0.1, "stages": 10, "j_max": 40},
        },
    )

    write(
        "classical_renorm",
        {
            "schema": "semigroup-lab/config/1",
            "seed": SEED,
            "space": {"dim": 6, "p": 2},
            "generator": {
                "kind": "diagonal",
                "law": {
                    "kind": "table",
                    "values": [
                        [0.0, 0.3],
                        [-0.25, 1.0],
                        [-0.5, 3.0],
                        [-0.75, 9.0],
                        [-1.0, 27.0],
                        [-1.25, 81.0],
                    ],
                },
            },
            "renorm": {
                "kind": "classical",
                "omega": 0.5,
                "vector_samples": 1000,
                "time_samples": 8,
                "grid_points": 257,
                "tol": 1e-9,
            },
        },
    )

    write(
        "sweep_bounded",
        {
            "schema": "semigroup-lab/config/1",
            "seed": SEED,
            "tolerance": 1e-2,
            "space": {"dim": 8, "p": 2},
            "schedule": {"j_min": 14, "j_max": 14},
            "sweep": {
                "trials": 12,
                "dim_min": 2,
                "dim_max": 8,
                "generator_norm": 2.0,
                "projection_norm_cap": 5.0,
                "times": [0.5, 1.0, 2.0],
            },
        },
    )


if __name__ == "__main__":
    main()
