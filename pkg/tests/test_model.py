import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import A3
from lcmstable import (
    AlphaMismatchError,
    InvalidArgumentError,
    LinearStableModel,
    ModelParseError,
    ModelValidationError,
    NormalizationError,
    StableParams,
    build_graph,
    check_convergence_conditions,
    load_model,
    normalize_unit_diagonal,
    save_model,
    spectral_radius,
)
from lcmstable.model import entrywise_abs_pow, entrywise_log_abs, model_from_dict, model_to_dict, signed_abs_pow

S = StableParams(1.5, 0.2, 1.0, 0.5)


def a3_model():
    laws = [StableParams(1.5, 0.1 * i, 1.0 + i, -i) for i in range(3)]
    return LinearStableModel(1.5, A3, laws, side="y", labels=["u1", "u2", "u3"])


# entrywise transforms

def test_entrywise_examples():
    np.testing.assert_allclose(entrywise_abs_pow([[-2, 0], [1, 4]], 0.5), [[math.sqrt(2), 0], [1, 2]])
    np.testing.assert_array_equal(signed_abs_pow([[-2]], 2), [[-4]])
    np.testing.assert_allclose(entrywise_log_abs([[math.e, 0]]), [[1, 0]])


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 4), elements=st.floats(-5, 5)), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_entrywise_power_laws(A, a, b):
    assert np.array_equal(entrywise_abs_pow(A, 1), np.abs(A))
    P = np.abs(A) + 0.1
    np.testing.assert_allclose(entrywise_abs_pow(entrywise_abs_pow(P, a), b), entrywise_abs_pow(P, a * b), rtol=1e-12)
    np.testing.assert_allclose(entrywise_abs_pow(P, a) * entrywise_abs_pow(P, b), entrywise_abs_pow(P, a + b), rtol=1e-12)


# spectral radius

def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-6)
    assert spectral_radius([[0, 0.1], [0.1, 0]]) == pytest.approx(0.1, abs=1e-6)
    assert spectral_radius(np.abs(np.eye(3) - A3)) == pytest.approx(0.9008, abs=1e-3)
    assert spectral_radius(np.zeros((4, 4))) == 0.0


def test_spectral_radius_complex_pair():
    R = np.eye(3) - A3
    assert spectral_radius(R) == pytest.approx(np.max(np.abs(np.linalg.eigvals(R))), abs=1e-6)
    rot = np.array([[0.0, -0.5], [0.5, 0.0]])
    assert spectral_radius(rot) == pytest.approx(0.5, abs=1e-6)


def test_spectral_radius_large_complex_pair():
    rng = np.random.default_rng(3)
    n = 30
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.zeros((n, n))
    d[:2, :2] = [[0.6, -0.8], [0.8, 0.6]]  # eigenvalues of modulus 1
    d[2:, 2:] = np.diag(rng.uniform(-0.5, 0.5, n - 2))
    assert spectral_radius(Q @ d @ Q.T) == pytest.approx(1.0, abs=1e-6)


def test_spectral_radius_is_deterministic():
    M = np.random.default_rng(1).standard_normal((12, 12))
    assert spectral_radius(M) == spectral_radius(M)


def test_spectral_radius_errors():
    with pytest.raises(InvalidArgumentError):
        spectral_radius(np.ones((2, 3)))
    with pytest.raises(InvalidArgumentError):
        spectral_radius([[np.nan]])


@settings(max_examples=40, deadline=None)
@given(arrays(float, (5, 5), elements=st.floats(-1, 1)), st.floats(-3, 3))
def test_spectral_radius_homogeneous(M, c):
    tol = 1e-6
    assert spectral_radius(c * M, tol) == pytest.approx(abs(c) * spectral_radius(M, tol), abs=2 * tol * (1 + abs(c)))


@settings(max_examples=40, deadline=None)
@given(arrays(float, (6, 6), elements=st.floats(-2, 2)))
def test_spectral_radius_triangular(M):
    T = np.triu(M)
    assert spectral_radius(T) == pytest.approx(np.max(np.abs(np.diag(T))), abs=1e-6 * (1 + np.max(np.abs(T))))


@settings(max_examples=30, deadline=None)
@given(st.integers(9, 40), st.integers(0, 10_000))
def test_spectral_radius_matches_eigvals(n, seed):
    M = np.random.default_rng(seed).standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(M)))
    assert spectral_radius(M, tol=1e-8) == pytest.approx(rho, abs=1e-6 * (1 + rho))


# normalization

def test_normalize_examples():
    An, D = normalize_unit_diagonal([[4, 2], [2, 4]])
    np.testing.assert_allclose(An, [[1, 0.5], [0.5, 1]])
    np.testing.assert_array_equal(D, np.diag([4.0, 4.0]))
    An, D = normalize_unit_diagonal(np.eye(3))
    np.testing.assert_array_equal(An, np.eye(3))
    np.testing.assert_array_equal(D, np.eye(3))
    with pytest.raises(NormalizationError):
        normalize_unit_diagonal([[1, 0], [0, -1]])


def test_normalize_idempotent(rng):
    A = rng.uniform(-1, 1, (5, 5)) + np.diag(rng.uniform(2, 5, 5))
    An, _ = normalize_unit_diagonal(A)
    An2, D2 = normalize_unit_diagonal(An)
    np.testing.assert_array_equal(An2, An)
    np.testing.assert_array_equal(D2, np.eye(5))


# convergence report

def test_convergence_report_a3():
    rep = check_convergence_conditions(LinearStableModel(1.5, A3, [S] * 3))
    assert rep.rho_absR_alpha == pytest.approx(0.6875, abs=1e-3)
    assert rep.rho_absR == pytest.approx(0.9008, abs=1e-3)
    assert rep.condition1_holds and rep.condition2_holds and rep.both_hold
    assert not rep.normalized


def test_convergence_report_identity_and_failure():
    rep = check_convergence_conditions(LinearStableModel(0.7, np.eye(4), [StableParams(0.7, 0, 1, 0)] * 4))
    assert rep.rho_R == 0 and rep.rho_absR_alpha == 0 and rep.both_hold
    G = StableParams(2, 0, 1, 0)
    rep = check_convergence_conditions(LinearStableModel(2, [[1, 2], [2, 1]], [G, G]))
    assert rep.rho_absR_alpha == pytest.approx(4.0, abs=1e-6)
    assert not rep.condition1_holds


def test_convergence_report_normalizes():
    G = StableParams(2, 0, 1, 0)
    rep = check_convergence_conditions(LinearStableModel(2, [[4, 2], [2, 4]], [G, G]))
    assert rep.normalized
    assert rep.rho_R == pytest.approx(0.5, abs=1e-6)


# graph

def test_build_graph():
    assert build_graph(np.eye(3)) == [[], [], []]
    assert build_graph(A3) == [[1, 2], [0, 2], [0, 1]]
    T = np.eye(4) + np.diag([0.5] * 3, 1) + np.diag([0.2] * 3, -1)
    assert build_graph(T) == [[1], [0, 2], [1, 3], [2]]
    # one-sided entries still link both ends
    assert build_graph([[1, 0], [3, 1]]) == [[1], [0]]


# model validation and files

def test_model_validation():
    with pytest.raises(ModelValidationError):
        LinearStableModel(1.5, [[1, 0], [0, 0]], [S, S])
    with pytest.raises(ModelValidationError):
        LinearStableModel(1.5, np.ones((2, 3)), [S, S])
    with pytest.raises(ModelValidationError):
        LinearStableModel(1.5, np.eye(2), [S])
    with pytest.raises(AlphaMismatchError):
        LinearStableModel(1.5, np.eye(2), [S, StableParams(1.2, 0, 1, 0)])
    with pytest.raises(ModelValidationError):
        LinearStableModel(1.5, np.eye(2), [S, S], labels=["a", "a"])
    with pytest.raises(ModelValidationError):
        LinearStableModel(1.5, [[1, np.inf], [0, 1]], [S, S])


def test_model_is_immutable():
    m = a3_model()
    with pytest.raises(ValueError):
        m.A[0, 0] = 5.0


def test_save_load_round_trip(tmp_path):
    m = a3_model()
    path = tmp_path / "a3.json"
    save_model(m, path)
    assert load_model(path) == m
    noisy = LinearStableModel(1.5, A3, [S] * 3, side="x", noise=[StableParams(1.5, 0.5, 1, 0)] * 3)
    save_model(noisy, path)
    assert load_model(path) == noisy


def test_round_trip_is_bit_exact(tmp_path, rng):
    A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    laws = [StableParams(0.5, rng.uniform(-1, 1), rng.uniform(0, 1), rng.standard_normal()) for _ in range(4)]
    m = LinearStableModel(0.5, A, laws)
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert np.array_equal(back.A, m.A) and back.params == m.params


def test_load_errors(tmp_path):
    d = model_to_dict(a3_model())

    bad = dict(d, params=[[1.5, 1, 0]] + d["params"][1:])
    with pytest.raises(ModelValidationError):
        model_from_dict(bad)

    short = dict(d, params=d["params"][:2])
    with pytest.raises(ModelParseError, match="row 2"):
        model_from_dict(short)

    both = dict(d, y_params=d["params"])
    with pytest.raises(ModelValidationError):
        model_from_dict(both)

    with pytest.raises(ModelParseError, match="'side'"):
        model_from_dict({k: v for k, v in d.items() if k != "side"})

    with pytest.raises(ModelValidationError):
        model_from_dict(dict(d, alpha=2.5))

    path = tmp_path / "broken.json"
    path.write_text('{\n "alpha": 1.5,\n "A": [[1, 0]\n}\n')
    with pytest.raises(ModelParseError, match="line 4"):
        load_model(path)

    with pytest.raises(OSError):
        load_model(tmp_path / "missing.json")


def test_model_file_format(tmp_path):
    save_model(a3_model(), tmp_path / "m.json")
    d = json.loads((tmp_path / "m.json").read_text())
    assert set(d) == {"alpha", "labels", "A", "side", "params"}
    assert d["params"][1] == [0.1, 2.0, -1.0]
