import sys
import warnings
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noisecomm.channels import (  # noqa: E402
    TrivialStructureWarning,
    build_collective,
    build_phase_damping,
    build_two_qubit_dephasing,
    build_zz_damping,
)
from noisecomm.structure import analyze  # noqa: E402


@lru_cache(maxsize=None)
def collective(n: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrivialStructureWarning)
        return build_collective(n)


@lru_cache(maxsize=None)
def collective_structure(n: int):
    return analyze(collective(n))


def builder_channels():
    """Every builder channel at a generic parameter value (desk scale)."""
    return [
        build_phase_damping(0.25),
        build_zz_damping(0.3),
        build_two_qubit_dephasing(0.2),
        collective(1),
        collective(2),
        collective(3),
        collective(4),
    ]


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
