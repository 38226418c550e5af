"""The linear stable model Y = AX (+ Z), matrix helpers and diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphaMismatchError,
    InvalidArgumentError,
    ModelParseError,
    ModelValidationError,
    NormalizationError,
    SpectralEstimateUnconverged,
)
from .stable import StableParams

__all__ = [
    "LinearStableModel",
    "ConvergenceReport",
    "entrywise_abs_pow",
    "signed_abs_pow",
    "entrywise_log_abs",
    "spectral_radius",
    "normalize_unit_diagonal",
    "check_convergence_conditions",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
    "build_graph",
]


@dataclass(frozen=True, eq=False)
class LinearStableModel:
    """Y = AX (+ Z) with a common alpha.

    ``params`` holds the x-side laws (forward problems) or the y-side laws
    (inference problems) according to ``side``. ``noise`` is the optional
    per-row law of Z.
    """

    alpha: float
    A: np.ndarray
    params: list
    side: str = "y"
    noise: list | None = None
    labels: list | None = field(default=None)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ModelValidationError(f"A must be a non-empty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ModelValidationError("A has non-finite entries")
        n = A.shape[0]
        zero_rows = np.flatnonzero(~A.any(axis=1))
        zero_cols = np.flatnonzero(~A.any(axis=0))
        if zero_rows.size or zero_cols.size:
            raise ModelValidationError(
                f"A has all-zero rows {zero_rows.tolist()} / columns {zero_cols.tolist()}"
            )
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.side not in ("x", "y"):
            raise ModelValidationError(f"side must be 'x' or 'y', got {self.side!r}")
        params = list(self.params)
        if len(params) != n:
            raise ModelValidationError(f"expected {n} parameter rows, got {len(params)}")
        for i, p in enumerate(params):
            if p.alpha != self.alpha:
                raise AlphaMismatchError(f"params row {i}: alpha {p.alpha!r} != model alpha {self.alpha!r}")
        object.__setattr__(self, "params", params)
        if self.noise is not None:
            noise = list(self.noise)
            if len(noise) != n:
                raise ModelValidationError(f"expected {n} noise rows, got {len(noise)}")
            for i, p in enumerate(noise):
                if p.alpha != self.alpha and p.gamma != 0:
                    raise AlphaMismatchError(f"noise row {i}: alpha {p.alpha!r} != model alpha {self.alpha!r}")
            object.__setattr__(self, "noise", noise)
        labels = [str(i) for i in range(n)] if self.labels is None else [str(x) for x in self.labels]
        if len(labels) != n or len(set(labels)) != n:
            raise ModelValidationError("labels must be n distinct identifiers")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.A.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LinearStableModel):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and np.array_equal(self.A, other.A)
            and self.params == other.params
            and self.side == other.side
            and self.noise == other.noise
            and self.labels == other.labels
        )


# entrywise matrix transforms

def entrywise_abs_pow(A, alpha):
    """|A_ij|^alpha (zero entries stay zero)."""
    return np.abs(np.asarray(A, dtype=float)) ** alpha


def signed_abs_pow(A, alpha):
    """sign(A_ij) |A_ij|^alpha."""
    A = np.asarray(A, dtype=float)
    return np.sign(A) * np.abs(A) ** alpha


def entrywise_log_abs(A):
    """log|A_ij|, defined as 0 where A_ij = 0."""
    A = np.abs(np.asarray(A, dtype=float))
    out = np.zeros_like(A)
    np.log(A, out=out, where=A > 0)
    return out


# spectral radius

def _dense_radius(M):
    # Hessenberg QR eigenvalues; unlike characteristic-polynomial roots this
    # stays accurate for repeated eigenvalues
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def _block_power(M, block, seed, tol, max_iter):
    """Orthogonal iteration; the Ritz values of the block capture dominant
    eigenvalues that share a modulus (complex pairs, +/- pairs)."""
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, block)))
    prev = None
    for _ in range(max_iter):
        Z = M @ Q
        if not np.any(Z):
            return 0.0, True
        ritz = float(np.max(np.abs(np.linalg.eigvals(Q.T @ Z))))
        Q, _ = np.linalg.qr(Z)
        if prev is not None and abs(ritz - prev) <= 0.1 * tol * (1.0 + ritz):
            return ritz, True
        prev = ritz
    return prev, False


def spectral_radius(M, tol=1e-6, max_iter=10000):
    """Largest |eigenvalue| of ``M`` by seeded power (orthogonal) iteration.

    Up to three restarts with a new seed and a wider block are made when the
    iteration stagnates. For n <= 8 a dense eigenvalue solve cross-checks
    the estimate and is authoritative.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgumentError(f"spectral_radius needs a square matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidArgumentError("matrix has non-finite entries")
    n = M.shape[0]
    if n == 0 or not M.any():
        return 0.0
    estimate = None
    converged = False
    for attempt in range(4):
        block = min(n, 2 + attempt)
        estimate, converged = _block_power(M, block, seed=12345 + attempt, tol=tol, max_iter=max_iter)
        if converged:
            break
    if n <= 8:
        exact = _dense_radius(M)
        if not converged or abs(exact - estimate) > tol * (1.0 + exact):
            return exact
        return estimate
    if not converged:
        raise SpectralEstimateUnconverged(
            f"spectral radius estimate did not settle after {max_iter} iterations", estimate
        )
    return estimate


def normalize_unit_diagonal(A):
    """Return ``(D^{-1/2} A D^{-1/2}, D)`` with ``D = diag(A)``."""
    A = np.asarray(A, dtype=float)
    d = np.diag(A).copy()
    if np.any(d <= 0):
        bad = np.flatnonzero(d <= 0).tolist()
        raise NormalizationError(f"diagonal entries {bad} are not positive; cannot normalize")
    s = 1.0 / np.sqrt(d)
    An = A * s[:, None] * s[None, :]
    np.fill_diagonal(An, 1.0)
    return An, np.diag(d)


@dataclass(frozen=True)
class ConvergenceReport:
    """Spectral diagnostics of R = I - A on the unit-diagonal form of A.

    Condition 1 is rho(|R|^alpha) < 1 and condition 2 is rho(R) < 1.
    ``rho_absR`` (rho(|R|) < 1 is walk-summability) is reported for
    reference only.
    """

    rho_R: float
    rho_absR_alpha: float
    condition1_holds: bool
    condition2_holds: bool
    normalized: bool
    rho_absR: float = float("nan")

    @property
    def both_hold(self):
        return self.condition1_holds and self.condition2_holds


def check_convergence_conditions(model, tol=1e-6):
    """Spectral radii of R = I - A and |R|^alpha for the unit-diagonal form of A.

    ``normalized`` records whether A had to be rescaled first.
    """
    A = model.A
    normalized = not np.array_equal(np.diag(A), np.ones(model.n))
    if normalized:
        A, _ = normalize_unit_diagonal(A)
    R = np.eye(model.n) - A
    rho_R = spectral_radius(R, tol=tol)
    rho_abs = spectral_radius(entrywise_abs_pow(R, model.alpha), tol=tol)
    rho_abs1 = spectral_radius(np.abs(R), tol=tol)
    return ConvergenceReport(rho_R, rho_abs, rho_abs < 1.0, rho_R < 1.0, normalized, rho_abs1)


def build_graph(A):
    """Neighbor lists N(i) = {j != i : A_ij != 0 or A_ji != 0}."""
    A = np.asarray(A)
    nz = (A != 0) | (A.T != 0)
    np.fill_diagonal(nz, False)
    return [np.flatnonzero(row).tolist() for row in nz]


# serialization

def _rows(params):
    return [[p.beta, p.gamma, p.delta] for p in params]


def model_to_dict(model):
    d = {
        "alpha": model.alpha,
        "labels": list(model.labels),
        "A": model.A.tolist(),
        "side": model.side,
        "params": _rows(model.params),
    }
    if model.noise is not None:
        d["noise"] = _rows(model.noise)
    return d


def _parse_rows(rows, key, alpha, n):
    if not isinstance(rows, list):
        raise ModelParseError(f"field {key!r}: expected a list of [beta, gamma, delta] rows")
    if len(rows) < n:
        raise ModelParseError(f"field {key!r}: row {len(rows)} missing (expected {n} rows, got {len(rows)})")
    if len(rows) > n:
        raise ModelParseError(f"field {key!r}: expected {n} rows, got {len(rows)}")
    out = []
    for i, row in enumerate(rows):
        if not (isinstance(row, list) and len(row) == 3 and all(isinstance(x, (int, float)) for x in row)):
            raise ModelParseError(f"field {key!r}, row {i}: expected [beta, gamma, delta], got {row!r}")
        try:
            out.append(StableParams(alpha, *row))
        except InvalidArgumentError as exc:
            raise ModelValidationError(f"field {key!r}, row {i}: {exc}") from None
    return out


def model_from_dict(d):
    if not isinstance(d, dict):
        raise ModelParseError("model file must hold a JSON object")
    for key in ("alpha", "A", "side", "params"):
        if key not in d:
            raise ModelParseError(f"missing field {key!r}")
    if "x_params" in d or "y_params" in d:
        raise ModelValidationError("store one side only, under 'params' with 'side'")
    alpha = d["alpha"]
    if not isinstance(alpha, (int, float)) or not 0 < alpha <= 2:
        raise ModelValidationError(f"field 'alpha': must lie in (0, 2], got {alpha!r}")
    A = d["A"]
    if not (isinstance(A, list) and A and all(isinstance(r, list) for r in A)):
        raise ModelParseError("field 'A': expected row-major nested arrays")
    n = len(A)
    for i, row in enumerate(A):
        if len(row) != n or not all(isinstance(x, (int, float)) for x in row):
            raise ModelParseError(f"field 'A', row {i}: expected {n} numbers")
    params = _parse_rows(d["params"], "params", float(alpha), n)
    noise = d.get("noise")
    if noise is not None:
        noise = _parse_rows(noise, "noise", float(alpha), n)
    return LinearStableModel(float(alpha), np.array(A, dtype=float), params, d["side"], noise, d.get("labels"))


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return model_from_dict(d)
