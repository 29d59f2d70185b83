import math

import numpy as np
import pytest

import dechist
from dechist import qbm, twostate


def test_tensor_matches_numpy_kron():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(dechist.tensor(a, b), np.kron(a, b))


def test_partial_trace_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / math.sqrt(2.0)
    rho = np.outer(bell, bell.conj())
    reduced = dechist.partial_trace(rho, [2, 2], [0])
    assert np.allclose(reduced, np.eye(2) / 2.0)


def test_evolve_against_series():
    rng = np.random.default_rng(2)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = (g + g.conj().T) / 2.0
    u = dechist.evolve(h, 0.7)
    # Eigendecomposition oracle in numpy.
    energies, vectors = np.linalg.eigh(h)
    expected = vectors @ np.diag(np.exp(-1j * energies * 0.7)) @ vectors.conj().T
    assert np.allclose(u, expected, atol=1e-12)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


def test_purify_round_trip():
    rng = np.random.default_rng(3)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    psi = dechist.purify(rho)
    big = np.outer(psi, psi.conj())
    back = dechist.partial_trace(big, [3, 3], [0])
    assert np.allclose(back, rho, atol=1e-10)


def test_history_engine_measurement_model():
    # Detector qubit flips iff the system sits in |1>.
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    minus = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)
    h = math.pi * np.kron(p1, np.outer(minus, minus.conj()))

    eye2 = np.eye(2, dtype=complex)
    spec = dechist.HistorySpec(
        hamiltonian=h,
        times=[0.0, 1.0],
        families=[
            [np.kron(p0, eye2), np.kron(p1, eye2)],
            [np.kron(p0, eye2), np.kron(p1, eye2)],
        ],
        labels=[["s0", "s1"], ["f0", "f1"]],
    )
    psi = np.kron(np.array([0.6, 0.8], dtype=complex), np.array([1.0, 0.0], dtype=complex))
    rho = np.outer(psi, psi.conj())

    d = dechist.decoherence_matrix(spec, rho)
    assert dechist.decoherence_defect(d) <= 1e-12
    p, sum_rule_defect = dechist.probabilities(d)
    assert abs(sum(p) - 1.0) <= 1e-12
    assert sum_rule_defect <= 1e-12
    assert p[d.flat_index([0, 0])] == pytest.approx(0.36, abs=1e-12)
    assert p[d.flat_index([1, 1])] == pytest.approx(0.64, abs=1e-12)

    records = dechist.find_records(spec, psi, 1e-8)
    joint = dechist.joint_probability(spec, rho, records)
    best, _, defined = dechist.conditional_record_probability(joint)
    for value, ok in zip(best, defined):
        if ok:
            assert value == pytest.approx(1.0, abs=1e-10)


def test_record_capacity():
    assert dechist.record_capacity(2, 3) == (4, False)
    assert dechist.record_capacity(2, 65)[1] is True


def test_two_state_detection_probability():
    config = twostate.Config()
    config.grid_points = 64
    config.t_final = 0.1
    config.region_a = 0.375
    config.region_b = 0.625

    x = (np.arange(64) + 0.5) / 64.0
    psi = np.exp(-((x - 0.4) ** 2) / (4 * 0.07**2) + 1j * 30.0 * x)
    psi /= np.linalg.norm(psi)

    weight = float(np.sum(np.abs(psi[(x >= 0.375) & (x < 0.625)]) ** 2))
    assert twostate.detection_probability(config, psi) == pytest.approx(weight, abs=1e-12)

    d = twostate.decoherence_matrix(config, psi)
    assert dechist.decoherence_defect(d) <= 1e-12

    table = twostate.joint_prob_mixed(config, psi)
    assert table.conditional_record(0, 1) == pytest.approx(1.0, abs=1e-12)


def test_qbm_noise_action_identity():
    bath = qbm.OscillatorBath(
        [qbm.BathMode(1.0, 1.1, 0.6), qbm.BathMode(1.0, 2.3, 0.4)], temperature=0.5
    )
    x = qbm.random_smooth_path(seed=5, tau=2.0, knots=257)
    y = qbm.random_smooth_path(seed=6, tau=2.0, knots=257)
    mx = [qbm.fourier_modes(x, mode) for mode in bath.modes]
    my = [qbm.fourier_modes(y, mode) for mode in bath.modes]
    from_modes = qbm.im_w_fourier(mx, my, bath)
    from_grid = qbm.influence_phase(x, y, bath).imag
    assert from_modes == pytest.approx(from_grid, rel=1e-9)


def test_qbm_info_counts():
    mode = qbm.BathMode(1.0, 2.0, 0.5)
    info = qbm.info_counts(mode, temperature=0.0, box_length=1.0, tau=2.0)
    assert info.ratio == 1.0
    warm = qbm.info_counts(mode, temperature=1.3, box_length=1.0, tau=2.0)
    assert warm.ratio == pytest.approx(1.0 / math.tanh(2.0 / (2 * 1.3)), rel=1e-12)
    assert warm.n_d_max == pytest.approx(warm.ratio * warm.n_env, rel=1e-14)


def test_qbm_classical_response_matches_modes():
    mode = qbm.BathMode(1.2, 1.9, 0.7)
    x = qbm.random_smooth_path(seed=7, tau=2.0, knots=257)
    f = qbm.fourier_modes(x, mode)
    point = qbm.classical_response(x, mode, 0.0, 0.0)
    assert point.q == pytest.approx(-mode.coupling / (mode.mass * mode.omega) * f.x_sin, abs=1e-12)
    assert point.p == pytest.approx(-mode.coupling * f.x_cos, abs=1e-12)


def test_resonant_horizon_raises():
    mode = qbm.BathMode(1.0, math.pi, 0.5)
    x = qbm.random_smooth_path(seed=8, tau=1.0, knots=65)
    with pytest.raises(RuntimeError):
        qbm.propagator_coefficients(x, mode)


def test_validation_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        dechist.partial_trace(np.eye(6, dtype=complex), [2, 2], [0])
