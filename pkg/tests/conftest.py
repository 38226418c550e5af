import numpy as np
import pytest

from lcmstable import LinearStableModel, StableParams, forward_params

A3 = np.array([[7.0, -1.0, 3.0], [-1.0, 7.0, 5.0], [3.0, -5.0, 7.0]]) / 7.0
ALPHAS = (0.5, 1.0, 1.5, 2.0)

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def random_laws(rng, alpha, n, skewed=True):
    betas = rng.uniform(-0.9, 0.9, n) if skewed and alpha != 2.0 else np.zeros(n)
    gammas = rng.uniform(0.5, 2.0, n)
    deltas = rng.uniform(-2.0, 2.0, n)
    return [StableParams(alpha, b, g, d) for b, g, d in zip(betas, gammas, deltas)]


def random_dd_matrix(rng, n, alpha, row_budget=0.7, symmetric=False, rescale=True):
    """Diagonally dominant A = D^{1/2} (I - R) D^{1/2}.

    Row sums of |R|^alpha and of |R| stay below ``row_budget`` so both
    convergence conditions hold for every alpha.
    """
    p = max(1.0, 1.0 / alpha)
    bound = (row_budget / max(n - 1, 1)) ** p
    R = rng.uniform(-bound, bound, (n, n))
    if symmetric:
        R = np.triu(R, 1)
        R = R + R.T
    np.fill_diagonal(R, 0.0)
    A = np.eye(n) - R
    if rescale:
        d = np.sqrt(rng.uniform(0.5, 2.0, n))
        A = A * d[:, None] * d[None, :]
    return A


def y_model_from_x(alpha, A, x_params, labels=None):
    y = forward_params(LinearStableModel(alpha, A, x_params, side="x"))
    return LinearStableModel(alpha, A, y, side="y", labels=labels)


def random_tree_matrix(rng, n, weight=0.5):
    A = np.eye(n) * rng.uniform(0.8, 1.5, n)
    for i in range(1, n):
        j = int(rng.integers(0, i))
        kind = rng.integers(0, 3)
        if kind in (0, 2):
            A[i, j] = rng.uniform(-weight, weight)
        if kind in (1, 2):
            A[j, i] = rng.uniform(-weight, weight)
        if A[i, j] == 0 and A[j, i] == 0:
            A[i, j] = weight / 2
    return A


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def a3():
    return A3.copy()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
