"""Shared fixtures, reference implementations, and the acceptance summary.

``brute_force_collision`` is the oracle for every channel strategy: it
materializes the dense two-mode unitary, conjugates the product state, and
traces out the reservoir index explicitly.  The library must match it to
near machine precision regardless of which internal strategy it picked.
"""

import numpy as np
import pytest

from beamchain import DensityMatrix, beam_splitter_unitary

_ACCEPTANCE_FILE = "test_acceptance.py"
_acceptance_outcomes = {}


def brute_force_collision(rho, sigma, params) -> np.ndarray:
    """Tr_b S (rho x sigma) S^dagger via the dense joint space."""
    s_mat = beam_splitter_unitary(params)
    joint = s_mat @ np.kron(rho.entries, sigma.entries) @ s_mat.conj().T
    dim = rho.dim
    return joint.reshape(dim, dim, dim, dim).trace(axis1=1, axis2=3)


def random_density(rng, cutoff, support) -> DensityMatrix:
    """Random full-rank state confined to the lowest ``support`` levels.

    Confinement keeps every tail guard quiet, so these states are valid
    inputs for channels, moments, and characteristic functions alike.
    """
    block = rng.normal(size=(support, support)) + 1j * rng.normal(
        size=(support, support)
    )
    gram = block @ block.conj().T
    entries = np.zeros((cutoff.dim, cutoff.dim), dtype=np.complex128)
    entries[:support, :support] = gram / gram.trace()
    return DensityMatrix(entries, cutoff)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def pytest_runtest_logreport(report):
    if _ACCEPTANCE_FILE not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance_outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[nodeid]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{verdict}  {name}")
