import numpy as np
import pytest
from scipy.sparse.linalg import ArpackNoConvergence

from spikeesn.esn.encoder import EncoderParams
from spikeesn.esn.errors import ConvergenceError, DataError, DimensionError, WeightGenerationError
from spikeesn.esn.reservoir import (
    ReservoirConfig,
    ReservoirWeights,
    StateMatrix,
    build_weights,
    gen_internal_weights,
    run_drive,
    run_esn,
    run_spike,
    spectral_radius,
    spike_drives,
    update_state,
)
from spikeesn.esn.streams import EncoderStream, stream_rng


@pytest.mark.parametrize(
    "matrix, expected",
    [
        (np.diag([0.5, -0.9]), 0.9),
        (np.zeros((4, 4)), 0.0),
        (np.array([[0.0, 1.0], [-1.0, 0.0]]), 1.0),
        (np.diag([0.2, -0.7, 0.3, 0.1]), 0.7),
    ],
)
def test_spectral_radius_examples(matrix, expected):
    """Test hand-computed eigenvalue moduli"""
    assert np.isclose(spectral_radius(matrix), expected, rtol=0, atol=1e-9)


def test_spectral_radius_complex_pair():
    """Test a dominant complex-conjugate pair in a larger matrix"""
    rotation = 0.8 * np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    matrix = np.zeros((6, 6))
    matrix[:2, :2] = rotation
    matrix[2:, 2:] = np.diag([0.1, -0.2, 0.3, 0.05])
    assert np.isclose(spectral_radius(matrix), 0.8, atol=1e-9)


def test_spectral_radius_errors(monkeypatch):
    """Test shape checks and the non-convergence error"""
    with pytest.raises(DimensionError):
        spectral_radius(np.ones((2, 3)))
    with pytest.raises(DataError):
        spectral_radius(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def no_convergence(*args, **kwargs):  # noqa: ARG001
        raise ArpackNoConvergence("no convergence", np.array([0.5 + 0.1j]), None)

    monkeypatch.setattr("spikeesn.esn.reservoir.eigs", no_convergence)
    with pytest.raises(ConvergenceError) as excinfo:
        spectral_radius(np.eye(5) * 0.5, dense_limit=0)
    assert np.isclose(excinfo.value.estimate, abs(0.5 + 0.1j))


def test_spectral_radius_matches_dense_solver():
    """Test against numpy eigenvalues on 20 seeded reservoirs"""
    config = ReservoirConfig(n_res=100, rho=0.9, eta=0.1)
    for seed in range(20):
        w_res = gen_internal_weights(config, np.random.default_rng(seed))
        dense = np.max(np.abs(np.linalg.eigvals(w_res)))
        assert abs(dense - 0.9) < 1e-6
        assert abs(spectral_radius(w_res) - 0.9) < 1e-6


def test_spectral_radius_iterative_path():
    """Test the Arnoldi path finds the dominant eigenvalue of a known spectrum"""
    rng = np.random.default_rng(4)
    basis, _ = np.linalg.qr(rng.standard_normal((60, 60)))
    spectrum = np.linspace(-0.5, 0.9, 60)
    matrix = basis @ np.diag(spectrum) @ basis.T
    assert np.isclose(spectral_radius(matrix, dense_limit=0), 0.9, rtol=0, atol=1e-6)
    assert np.isclose(spectral_radius(matrix), 0.9, rtol=0, atol=1e-9)


def test_realized_radius_for_pipeline_streams():
    """Test reservoirs drawn from the seeded reservoir stream hit rho"""
    config = ReservoirConfig(n_res=100, rho=0.9, eta=0.1)
    for seed in range(20):
        weights = build_weights(config, 1, stream_rng(seed, "reservoir"))
        dense = np.max(np.abs(np.linalg.eigvals(weights.w_res)))
        assert abs(dense - 0.9) < 1e-6
        assert abs(weights.realized_radius - dense) < 1e-6


def test_sparsity_close_to_eta():
    """Test the fraction of nonzeros is near eta"""
    config = ReservoirConfig(n_res=100, rho=0.9, eta=0.1)
    weights = build_weights(config, 5, np.random.default_rng(1))
    assert abs(weights.realized_sparsity - 0.1) < 0.01
    assert abs(weights.realized_radius - 0.9) < 1e-6
    assert weights.w_in.shape == (100, 5)
    assert np.max(np.abs(weights.w_in)) <= 0.8


def test_full_density_small():
    """Test eta = 1 fills the matrix"""
    config = ReservoirConfig(n_res=2, rho=0.5, eta=1.0)
    w_res = gen_internal_weights(config, np.random.default_rng(0))
    assert np.count_nonzero(w_res) == 4
    assert np.isclose(spectral_radius(w_res), 0.5)


def test_weights_deterministic():
    """Test a fixed seed reproduces the matrices bit for bit"""
    config = ReservoirConfig(n_res=50, seed=12)
    first = build_weights(config, 3)
    second = build_weights(config, 3)
    assert np.array_equal(first.w_res, second.w_res)
    assert np.array_equal(first.w_in, second.w_in)
    third = build_weights(config, 3, stream_rng(12, "reservoir"))
    assert not np.array_equal(first.w_res, third.w_res)


def test_degenerate_draws(monkeypatch):
    """Test repeated all-zero draws give up"""
    monkeypatch.setattr("spikeesn.esn.reservoir.spectral_radius", lambda m: 0.0)
    with pytest.raises(WeightGenerationError):
        gen_internal_weights(ReservoirConfig(n_res=10, eta=0.5), np.random.default_rng(0))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_res=0),
        dict(rho=1.0),
        dict(rho=0.0),
        dict(eta=0.0),
        dict(eta=1.5),
        dict(n_res=3, eta=0.05),
        dict(input_scale=0.0),
    ],
)
def test_reservoir_config_validation(kwargs):
    """Test invalid reservoir parameters"""
    with pytest.raises(DataError):
        ReservoirConfig(**kwargs)


def _weights(w_in, w_res):
    w_in = np.atleast_2d(np.asarray(w_in, dtype=float))
    w_res = np.atleast_2d(np.asarray(w_res, dtype=float))
    return ReservoirWeights(w_in=w_in, w_res=w_res, realized_radius=0.0, realized_sparsity=0.0)


def test_update_state_examples():
    """Test zero fixed point and the scalar tanh value"""
    weights = _weights(np.ones((3, 4)), np.full((3, 3), 0.1))
    assert not np.any(update_state(np.zeros(3), np.zeros(4), weights))

    single = _weights([[1.0, 0.0, 0.0]], [[0.0]])
    assert np.isclose(update_state(np.zeros(1), np.array([1.0, 0.0, 0.0]), single)[0], 0.76159, atol=1e-5)

    big = _weights(np.full((3, 2), 50.0), np.full((3, 3), 50.0))
    x = update_state(np.ones(3), np.ones(2) * 10, big)
    assert np.all(np.abs(x) <= 1.0)

    with pytest.raises(DimensionError):
        update_state(np.zeros(2), np.zeros(4), weights)
    with pytest.raises(DimensionError):
        update_state(np.zeros(3), np.zeros(3), weights)


def test_update_state_identity_activation():
    """Test the matrix plumbing against explicit dot products on 3x3 instances"""
    rng = np.random.default_rng(4)
    for _ in range(20):
        weights = _weights(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        x_prev = rng.normal(size=3)
        drive = rng.normal(size=3)
        expected = np.array(
            [
                sum(weights.w_in[i, j] * drive[j] for j in range(3))
                + sum(weights.w_res[i, j] * x_prev[j] for j in range(3))
                for i in range(3)
            ]
        )
        assert np.allclose(update_state(x_prev, drive, weights, activation=lambda v: v), expected)


def test_run_drive_matches_update_state():
    """Test the batched recursion equals repeated single updates"""
    rng = np.random.default_rng(6)
    weights = build_weights(ReservoirConfig(n_res=20, eta=0.3), 4, rng)
    drives = rng.uniform(0, 3, size=(15, 4))
    states = run_drive(drives, weights)
    x = np.zeros(20)
    for t in range(15):
        x = update_state(x, drives[t], weights)
        assert np.allclose(states.matrix[:, t], x, rtol=0, atol=1e-12)
    assert states.count == 15
    assert states.n_res == 20


def test_echo_state_property(unit_norm):
    """Test two initial states forget their difference under the same recorded drive"""
    rng = np.random.default_rng(21)
    config = ReservoirConfig(n_res=100, rho=0.9, eta=0.1, input_scale=0.8)
    encoder = EncoderParams(n_sam=100, norm=unit_norm, psi=5000.0)
    weights = build_weights(config, encoder.n_sam, rng)
    drives = spike_drives(rng.uniform(0, 1, size=200), encoder, EncoderStream(21, "encoder/train"))
    x_a = rng.uniform(-1, 1, size=100)
    x_b = rng.uniform(-1, 1, size=100)
    final_a = run_drive(drives, weights, x0=x_a).matrix[:, -1]
    final_b = run_drive(drives, weights, x0=x_b).matrix[:, -1]
    assert np.linalg.norm(final_a - final_b) < 1e-3 * np.linalg.norm(x_a - x_b)


def test_run_spike_shape_and_determinism(unit_norm):
    """Test one state per input and identical reruns"""
    encoder = EncoderParams(n_sam=10, norm=unit_norm, psi=5.0)
    weights = build_weights(ReservoirConfig(n_res=15, eta=0.3), 10, np.random.default_rng(0))
    inputs = np.linspace(0, 1, 25)
    first = run_spike(inputs, encoder, weights, EncoderStream(3))
    second = run_spike(inputs, encoder, weights, EncoderStream(3))
    assert first.matrix.shape == (15, 25)
    assert np.array_equal(first.matrix, second.matrix)
    assert np.all(np.abs(first.matrix) < 1.0)
    with pytest.raises(DimensionError):
        run_spike(inputs, EncoderParams(n_sam=11, norm=unit_norm, psi=5.0), weights, EncoderStream(3))
    with pytest.raises(DataError):
        run_spike([], encoder, weights, EncoderStream(3))


def test_run_esn(unit_norm):
    """Test the plain recursion: zero input stays at zero, bounded input stays in (-1, 1)"""
    weights = build_weights(ReservoirConfig(n_res=15, eta=0.3), 1, np.random.default_rng(0))
    assert not np.any(run_esn(np.zeros(30), weights).matrix)
    states = run_esn(np.sin(np.arange(50)), weights)
    assert states.count == 50
    assert np.all(np.abs(states.matrix) < 1.0)
    with pytest.raises(DimensionError):
        run_esn(np.zeros(3), build_weights(ReservoirConfig(n_res=15, eta=0.3), 2, np.random.default_rng(0)))

    # a single sampling time still differs from the plain drive
    encoder = EncoderParams(n_sam=1, norm=unit_norm, psi=5000.0)
    inputs = np.linspace(0.1, 0.9, 30)
    spike_states = run_spike(inputs, encoder, weights, EncoderStream(1)).matrix
    assert not np.allclose(spike_states, run_esn(inputs, weights).matrix)


def test_state_matrix_helpers():
    """Test column slicing and the mean absolute state"""
    states = StateMatrix(np.array([[1.0, -2.0, 3.0], [-1.0, 0.0, 1.0]]))
    assert states.columns(1).count == 2
    assert np.array_equal(states.columns(0, 2).matrix, [[1.0, -2.0], [-1.0, 0.0]])
    assert np.isclose(states.mean_abs(), 8.0 / 6.0)
    assert StateMatrix(np.zeros((2, 0))).mean_abs() == 0.0
