"""Shared fixtures for reconstruction round trips."""

from typing import NamedTuple

import numpy as np
import pytest

from phase_space_tomography.models.state import DensityMatrix
from phase_space_tomography.services import state_service


class ZooCase(NamedTuple):
    rho: DensityMatrix
    # Leading block every method must recover to the element tolerance
    block: int


THERMAL_BLOCK = 10


def _zoo_params():
    params = [
        pytest.param(
            lambda: ZooCase(state_service.coherent_state(12, 0.8, tail_tolerance=1e-11), 12),
            id="coherent-0.8",
        ),
        pytest.param(
            lambda: ZooCase(state_service.coherent_state(12, 0.5 + 0.5j), 12),
            id="coherent-0.5+0.5j",
        ),
        pytest.param(
            lambda: ZooCase(state_service.thermal_klambda_state(40, 0.5), THERMAL_BLOCK),
            id="thermal-40",
            marks=pytest.mark.slow,
        ),
    ]
    params += [
        pytest.param(lambda n=n: ZooCase(state_service.fock_state(8, n), 8), id=f"fock-{n}")
        for n in range(6)
    ]
    params += [
        pytest.param(
            lambda seed=seed: ZooCase(state_service.random_state(6, seed=seed), 6),
            id=f"random-{seed}",
        )
        for seed in (101, 202, 303, 404, 505)
    ]
    return params


@pytest.fixture(params=_zoo_params())
def zoo_case(request) -> ZooCase:
    return request.param()


@pytest.fixture
def flags_cover_errors():
    """Check that every element off by more than the report tolerance is flagged."""

    def check(report, rho: DensityMatrix) -> None:
        missed = []
        for e in report.elements:
            error = abs(e.value - rho.element(e.n + e.k, e.n))
            if error > report.tolerance and not e.flagged:
                missed.append((e.n + e.k, e.n, error))
        assert not missed, f"unflagged elements beyond {report.tolerance:g}: {missed}"

    return check


@pytest.fixture
def block_error():
    """Largest error over the leading block of a reconstruction."""

    def measure(report, rho: DensityMatrix, block: int) -> float:
        diff = report.matrix.elements[:block, :block] - rho.elements[:block, :block]
        return float(np.max(np.abs(diff)))

    return measure
