"""Shared fixtures and a derandomized hypothesis profile."""

import pytest
from hypothesis import HealthCheck, settings

from semigroup_lab import build_certificate, load_config

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


def build_from_config(name):
    """Build a witness certificate exactly the way the CLI does."""
    cfg = load_config(name)
    f = cfg.functional()
    params = cfg.witness_params()
    return build_certificate(
        cfg.generator(),
        f,
        cfg.vector(f),
        eps=params.eps,
        stage_goal=params.stages,
        j_max=params.j_max,
        seed=cfg.seed,
        margin=params.margin,
        validation_samples=params.validation_samples,
    )


@pytest.fixture(scope="session")
def k5_certificate():
    # Shared across test modules; the build is deterministic, so reuse is safe.
    return build_from_config("blowup_k5")
