"""Closed-form exact inference for the linear stable model.

Forward propagation maps source laws X to observation laws Y = AX + Z.
Posterior recovery inverts the map with three sequential linear solves in
transformed coordinates::

    |A|^alpha u              = gamma_y^alpha
    (sign(A) |A|^alpha) v    = beta_y gamma_y^alpha
    A delta                  = delta_y - xi(u, v)

``xi`` needs the first two solutions, so the order is fixed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AlphaMismatchError,
    InvalidArgumentError,
    NonphysicalScaleError,
    NonphysicalSkewError,
    SingularMatrixError,
    UnsupportedFeatureError,
)
from .model import entrywise_abs_pow, entrywise_log_abs, signed_abs_pow
from .stable import SKEW_TOL, StableParams, is_alpha_one, skew_factor

__all__ = [
    "PosteriorResult",
    "solve_linear",
    "forward_params",
    "posterior_params",
    "beta_gamma",
    "xi_vector",
    "laws_to_arrays",
]

PIVOT_TOL = 1e-12


@dataclass
class PosteriorResult:
    """Posterior laws of X given the observation laws.

    ``x_given_y[i]`` is ``None`` where the solve produced a nonphysical law
    (only possible with ``strict=False``); ``flags[i]`` then says why.
    ``transformed`` holds the raw (u, v, w) columns.
    """

    x_given_y: list
    transformed: np.ndarray
    flags: list = field(default_factory=list)
    solver_stats: dict = field(default_factory=dict)
    labels: list | None = None

    @property
    def ok(self):
        return not any(self.flags)


def _lu_solve(M, b):
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidArgumentError(f"solve_linear needs a square matrix, got {M.shape}")
    norm = np.max(np.sum(np.abs(M), axis=1)) if M.size else 0.0
    with warnings.catch_warnings():
        # exact zero pivots are reported through SingularMatrixError below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    pivots = np.abs(np.diag(lu))
    min_pivot = float(pivots.min())
    if norm == 0.0 or min_pivot < PIVOT_TOL * norm:
        raise SingularMatrixError(f"matrix is singular to working precision (min pivot {min_pivot:.3g})")
    x = scipy.linalg.lu_solve((lu, piv), b)
    residual = float(np.max(np.abs(M @ x - b))) if b.size else 0.0
    if residual > 1e-8 * (1.0 + float(np.max(np.abs(b)))):
        raise SingularMatrixError(f"linear solve residual {residual:.3g} too large; matrix ill-conditioned")
    return x, min_pivot, residual


def solve_linear(M, b):
    """Solve Mx = b by LU with partial pivoting."""
    return _lu_solve(M, b)[0]


def laws_to_arrays(params):
    """(beta, gamma, delta) columns of a list of laws."""
    arr = np.array([[p.beta, p.gamma, p.delta] for p in params], dtype=float).reshape(-1, 3)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def beta_gamma(u, v, alpha):
    """beta * gamma from transformed coordinates, ``v |u|^((1 - alpha)/alpha)``.

    Zero where u = 0. Defined for transiently negative u.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    au = np.abs(u)
    out = np.zeros_like(u)
    np.multiply(v, np.power(au, (1.0 - alpha) / alpha, where=au > 0, out=np.ones_like(au)), out=out, where=au > 0)
    return out


def _xlogx_abs(u):
    au = np.abs(u)
    out = np.zeros_like(au)
    np.log(au, out=out, where=au > 0)
    return out


def xi_vector(alpha, A, bg_y, gamma_y, u, v, A_log=None):
    """Shift correction xi of the delta system, evaluated at (u, v).

    alpha != 1: tan(pi alpha/2) [b_y g_y - A (b g)]
    alpha == 1: (2/pi) [b_y g_y log g_y - (A . log|A|)(b g) - A (b g log g)]

    where b g = beta*gamma of the unknowns. At alpha = 1, u = gamma.
    """
    bg = beta_gamma(u, v, alpha)
    if is_alpha_one(alpha):
        if A_log is None:
            A_log = A * entrywise_log_abs(A)
        return (2.0 / math.pi) * (bg_y * _xlogx_abs(gamma_y) - A_log @ bg - A @ (bg * _xlogx_abs(u)))
    return skew_factor(alpha) * (bg_y - A @ bg)


def _check_alpha(model, laws, what):
    for i, p in enumerate(laws):
        if p.alpha != model.alpha and p.gamma != 0:
            raise AlphaMismatchError(f"{what} row {i}: alpha {p.alpha!r} != model alpha {model.alpha!r}")


def forward_params(model, skew_power="alpha"):
    """Observation laws of Y = AX + Z from the source laws X (and noise Z).

    ``skew_power`` selects how skews are weighted when rows are combined:
    ``"alpha"`` (default) weights beta by gamma^alpha, which is what the
    summation rule implies; ``"one"`` is the literal beta*gamma weighting,
    kept for comparison only (it is not cf-consistent unless all gammas are
    0 or 1).
    """
    if model.side != "x":
        raise InvalidArgumentError("forward_params needs a model with x-side parameters")
    if skew_power not in ("alpha", "one"):
        raise InvalidArgumentError(f"skew_power must be 'alpha' or 'one', got {skew_power!r}")
    alpha, A = model.alpha, model.A
    n = model.n
    _check_alpha(model, model.params, "params")
    bx, gx, dx = laws_to_arrays(model.params)
    if model.noise is not None:
        _check_alpha(model, model.noise, "noise")
        bz, gz, dz = laws_to_arrays(model.noise)
    else:
        bz, gz, dz = np.zeros(n), np.zeros(n), np.zeros(n)
    ux, uz = gx**alpha, gz**alpha
    u_y = entrywise_abs_pow(A, alpha) @ ux + uz
    if skew_power == "alpha":
        v_y = signed_abs_pow(A, alpha) @ (bx * ux) + bz * uz
    else:
        v_y = signed_abs_pow(A, alpha) @ (bx * gx) + bz * gz
    beta_y = np.divide(v_y, u_y, out=np.zeros(n), where=u_y > 0)
    if np.any(np.abs(beta_y) > 1.0 + SKEW_TOL):
        raise NonphysicalSkewError(f"forward skew {beta_y} leaves [-1, 1]")
    beta_y = np.clip(beta_y, -1.0, 1.0)
    gamma_y = u_y ** (1.0 / alpha)
    bg_y = beta_y * gamma_y
    if is_alpha_one(alpha):
        A_log = A * entrywise_log_abs(A)
        xi = (2.0 / math.pi) * (
            bg_y * _xlogx_abs(gamma_y)
            - A_log @ (bx * gx)
            - A @ (bx * gx * _xlogx_abs(gx))
            - bz * gz * _xlogx_abs(gz)
        )
    else:
        xi = skew_factor(alpha) * (bg_y - A @ (bx * gx) - bz * gz)
    delta_y = A @ dx + dz + xi
    return [StableParams(alpha, b, g, d) for b, g, d in zip(beta_y, gamma_y, delta_y)]


def transformed_to_laws(alpha, u, v, w, atol):
    """Convert (u, v, w) columns to laws, collecting nonphysical rows."""
    laws, flags = [], []
    for ui, vi, wi in zip(u, v, w):
        if abs(ui) <= atol and abs(vi) <= atol:
            laws.append(StableParams(alpha, 0.0, 0.0, wi))
            flags.append("")
        elif ui <= 0:
            laws.append(None)
            flags.append(f"nonphysical-scale: gamma^alpha = {ui:.6g}")
        elif abs(vi / ui) > 1.0 + SKEW_TOL:
            laws.append(None)
            flags.append(f"nonphysical-skew: |beta| = {abs(vi / ui):.6g}")
        else:
            beta = min(1.0, max(-1.0, vi / ui))
            laws.append(StableParams(alpha, beta, ui ** (1.0 / alpha), wi))
            flags.append("")
    return laws, flags


def raise_on_flags(flags):
    for i, flag in enumerate(flags):
        if flag.startswith("nonphysical-scale"):
            raise NonphysicalScaleError(f"node {i}: {flag}; observations are inconsistent with any stable source")
        if flag.startswith("nonphysical-skew"):
            raise NonphysicalSkewError(f"node {i}: {flag}")


def posterior_params(model, strict=True):
    """Closed-form posterior laws of X given y-side observation laws.

    With ``strict=False`` nonphysical rows are flagged instead of raising.
    """
    if model.side != "y":
        raise InvalidArgumentError("posterior_params needs a model with y-side parameters")
    if model.noise is not None:
        raise UnsupportedFeatureError("posterior inference with a noise term is not supported")
    alpha, A = model.alpha, model.A
    _check_alpha(model, model.params, "params")
    by, gy, dy = laws_to_arrays(model.params)
    uy = gy**alpha

    u, piv_u, res_u = _lu_solve(entrywise_abs_pow(A, alpha), uy)
    v, piv_v, res_v = _lu_solve(signed_abs_pow(A, alpha), by * uy)
    xi = xi_vector(alpha, A, by * gy, gy, u, v)
    w, piv_w, res_w = _lu_solve(A, dy - xi)

    atol = 1e-12 * (1.0 + float(np.max(np.abs(u))))
    laws, flags = transformed_to_laws(alpha, u, v, w, atol)
    if strict:
        raise_on_flags(flags)
    stats = {
        "pivots": {"gamma": piv_u, "beta": piv_v, "delta": piv_w},
        "residuals": {"gamma": res_u, "beta": res_v, "delta": res_w},
    }
    return PosteriorResult(laws, np.column_stack([u, v, w]), flags, stats, list(model.labels))
