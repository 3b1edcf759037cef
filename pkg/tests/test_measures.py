"""Purity, entropy, trace distance, QCS, and their collision-limit relations."""

import functools
import math

import numpy as np
import pytest

from beamchain import (
    ChannelParams,
    CutoffTooSmallError,
    DensityMatrix,
    FockCutoff,
    MeasureReport,
    ShapeError,
    UnphysicalStateError,
    coherent_state,
    fock_state,
    gaussian_from_moments,
    gaussian_qcs_squared,
    iterate_to_fixed_point,
    mean_photon_number,
    measure_report,
    purity,
    qcs_squared,
    tensor_product,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)


@functools.lru_cache(maxsize=4)
def weak_coupling_fixed_point(level, n_max):
    """Fixed point of a fock(level) reservoir at coupling 0.05 (shared)."""
    cutoff = FockCutoff(n_max)
    traj = iterate_to_fixed_point(
        fock_state(0, cutoff),
        fock_state(level, cutoff),
        ChannelParams(0.05, cutoff),
        tol=1e-9,
    )
    return traj.final


def test_purity_examples():
    mixed = DensityMatrix(np.eye(4) / 4.0, FockCutoff(3))
    assert purity(mixed) == pytest.approx(0.25, abs=1e-12)
    assert purity(fock_state(2, FockCutoff(5))) == pytest.approx(1.0, abs=1e-12)
    assert purity(thermal_state(1.0, FockCutoff(60))) == pytest.approx(
        math.tanh(0.5), abs=1e-9
    )


def test_entropy_examples():
    mixed = DensityMatrix(np.eye(4) / 4.0, FockCutoff(3))
    assert von_neumann_entropy(mixed) == pytest.approx(math.log(4.0), abs=1e-12)
    assert von_neumann_entropy(fock_state(1, FockCutoff(5))) == pytest.approx(
        0.0, abs=1e-12
    )
    beta = 1.0
    n_bar = 1.0 / (math.e - 1.0)
    expected = (n_bar + 1.0) * math.log(n_bar + 1.0) - n_bar * math.log(n_bar)
    assert von_neumann_entropy(thermal_state(beta, FockCutoff(60))) == pytest.approx(
        expected, abs=1e-9
    )
    tampered = DensityMatrix(np.diag([1.0 + 1e-7, -1e-7]), FockCutoff(1), validate=False)
    with pytest.raises(UnphysicalStateError):
        von_neumann_entropy(tampered)


def test_mean_photon_number():
    assert mean_photon_number(fock_state(3, FockCutoff(10))) == pytest.approx(3.0)
    assert mean_photon_number(thermal_state(1.0, FockCutoff(60))) == pytest.approx(
        1.0 / (math.e - 1.0), abs=1e-9
    )
    joint = tensor_product(fock_state(0, FockCutoff(3)), fock_state(0, FockCutoff(3)))
    with pytest.raises(ShapeError):
        mean_photon_number(joint)


def test_qcs_squared_examples():
    cutoff = FockCutoff(40)
    assert qcs_squared(fock_state(0, cutoff)) == pytest.approx(1.0, abs=1e-12)
    assert qcs_squared(fock_state(1, cutoff)) == pytest.approx(3.0, abs=1e-12)
    assert qcs_squared(fock_state(3, cutoff)) == pytest.approx(7.0, abs=1e-12)
    # classical references stay at or below 1
    assert qcs_squared(coherent_state(0.8 + 0.3j, cutoff)) == pytest.approx(
        1.0, abs=1e-10
    )
    assert qcs_squared(thermal_state(1.0, FockCutoff(60))) == pytest.approx(
        math.tanh(0.5), abs=1e-9
    )
    with pytest.raises(CutoffTooSmallError):
        qcs_squared(fock_state(38, cutoff))


def test_trace_distance_examples():
    cutoff = FockCutoff(10)
    a, b = fock_state(0, cutoff), fock_state(1, cutoff)
    assert trace_distance(a, b) == pytest.approx(1.0, abs=1e-12)
    assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-14)
    th = thermal_state(1.0, FockCutoff(60))
    vac = fock_state(0, FockCutoff(60))
    assert trace_distance(th, vac) == pytest.approx(math.exp(-1.0), abs=1e-9)
    assert trace_distance(th, vac) == pytest.approx(trace_distance(vac, th), abs=1e-14)
    with pytest.raises(ShapeError):
        trace_distance(a, fock_state(0, FockCutoff(12)))


def test_measure_report_bundles():
    vac = measure_report(fock_state(0, FockCutoff(20)))
    assert vac.purity == pytest.approx(1.0, abs=1e-12)
    assert vac.entropy == pytest.approx(0.0, abs=1e-12)
    assert vac.qcs_squared == pytest.approx(1.0, abs=1e-12)
    assert vac.mean_photon == pytest.approx(0.0, abs=1e-12)

    three = measure_report(fock_state(3, FockCutoff(20)))
    assert three.csv_row() == pytest.approx((1.0, 0.0, 7.0, 3.0), abs=1e-10)
    assert MeasureReport.FIELDS == ("purity", "entropy", "qcs_squared", "mean_photon")
    assert list(three.to_json_dict()) == list(MeasureReport.FIELDS)


def test_pure_state_iff_zero_entropy():
    for rho in (
        fock_state(2, FockCutoff(10)),
        coherent_state(0.5, FockCutoff(20)),
        thermal_state(1.0, FockCutoff(60)),
    ):
        report = measure_report(rho)
        assert (report.purity > 1.0 - 1e-9) == (report.entropy < 1e-8)


@pytest.mark.parametrize("level,n_max", [(1, 34), (2, 50)])
def test_weak_coupling_qcs_purity_relation(level, n_max):
    # pure single-level reservoirs: the limit QCS equals the squared limit
    # purity times the reservoir QCS, and the limit purity approaches that
    # of the thermal state with the same occupation
    final = weak_coupling_fixed_point(level, n_max)
    sigma = fock_state(level, FockCutoff(n_max))
    chained = purity(final) ** 2 * qcs_squared(sigma)
    assert qcs_squared(final) == pytest.approx(chained, rel=0.05)
    assert purity(final) == pytest.approx(1.0 / (2.0 * level + 1.0), abs=0.02)


def test_qcs_dominates_its_gaussian_match():
    cutoff = FockCutoff(40)
    for rho in (
        fock_state(1, cutoff),
        fock_state(2, cutoff),
        thermal_state(1.0, FockCutoff(60)),
        coherent_state(0.7, cutoff),
    ):
        assert qcs_squared(rho) >= gaussian_qcs_squared(gaussian_from_moments(rho)) - 1e-9
