"""Closed-form parameter algebra for alpha-stable laws.

Parameters are in Nolan's S(alpha, beta, gamma, delta; 0) parameterization,
where a variable is built from a standardized one ``Z`` as::

    X = gamma * (Z - beta * tan(pi * alpha / 2)) + delta    (alpha != 1)
    X = gamma * Z + delta                                    (alpha == 1)

In this parameterization scalar multiplication and summation are exact for
every alpha, and the characteristic function reads::

    log phi(t) = -(gamma|t|)^alpha
                 + i beta tan(pi alpha/2) [sign(t) (gamma|t|)^alpha - gamma t]
                 + i delta t                                  (alpha != 1)
    log phi(t) = -gamma|t| - i beta (2/pi) gamma t log(gamma|t|) + i delta t
                                                              (alpha == 1)

Scales enter every linear relation through ``gamma**alpha``, so the solvers
work with the linearized coordinates ``(u, v, w) = (gamma**alpha,
beta * gamma**alpha, delta)`` (:class:`TransformedParams`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphaMismatchError,
    IllConditionedAlphaWarning,
    InvalidArgumentError,
    NonphysicalScaleError,
    NonphysicalSkewError,
)

ALPHA_ONE_TOL = 1e-12
SKEW_TOL = 1e-9

__all__ = [
    "StableParams",
    "TransformedParams",
    "is_alpha_one",
    "skew_factor",
    "make_gaussian",
    "make_cauchy",
    "make_levy",
    "scale_shift",
    "add",
    "cf_eval",
    "cf_eval_standard",
    "to_transformed",
    "from_transformed",
]


def is_alpha_one(alpha):
    return abs(alpha - 1.0) < ALPHA_ONE_TOL


def _check_alpha(alpha):
    if not (math.isfinite(alpha) and 0.0 < alpha <= 2.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 2], got {alpha!r}")
    if 0.99 < alpha < 1.01 and not is_alpha_one(alpha):
        warnings.warn(
            f"alpha={alpha!r} is close to 1; tan(pi*alpha/2) is ill-conditioned",
            IllConditionedAlphaWarning,
            stacklevel=3,
        )


def skew_factor(alpha):
    """tan(pi*alpha/2), with the Gaussian value pinned to an exact zero."""
    if alpha == 2.0:
        return 0.0
    return math.tan(math.pi * alpha / 2.0)


def _xlogx(x):
    # 0 * log 0 = 0
    return x * math.log(x) if x > 0 else 0.0


@dataclass(frozen=True)
class StableParams:
    """One stable marginal S(alpha, beta, gamma, delta).

    ``gamma == 0`` is a legal point mass at ``delta``.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)):
                raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
        if not 0.0 < self.alpha <= 2.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if abs(self.beta) > 1.0:
            raise InvalidArgumentError(f"beta must lie in [-1, 1], got {self.beta!r}")
        if self.gamma < 0.0:
            raise InvalidArgumentError(f"gamma must be >= 0, got {self.gamma!r}")

    @property
    def is_point_mass(self):
        return self.gamma == 0.0

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma, self.delta)

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "delta": self.delta}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["alpha"], d["beta"], d["gamma"], d["delta"])
        except KeyError as exc:
            raise InvalidArgumentError(f"missing stable parameter {exc.args[0]!r}") from None

    def __repr__(self):
        return f"S({self.alpha:g}, {self.beta:g}, {self.gamma:g}, {self.delta:g})"


@dataclass(frozen=True)
class TransformedParams:
    """Linearized coordinates u = gamma^alpha, v = beta*gamma^alpha, w = delta.

    ``u`` may be transiently negative inside iterative solvers.
    """

    u: float
    v: float
    w: float


def make_gaussian(mu, sigma):
    """N(mu, sigma^2) as S(2, 0, sigma/sqrt(2), mu)."""
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidArgumentError(f"sigma must be positive and finite, got {sigma!r}")
    return StableParams(2.0, 0.0, sigma / math.sqrt(2.0), mu)


def make_cauchy(gamma, delta):
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma!r}")
    return StableParams(1.0, 0.0, gamma, delta)


def make_levy(gamma, delta):
    """S(1/2, 1, gamma, delta).

    In the S0 parameterization used here this law is supported on
    ``[delta - gamma, inf)``: it is the classical Levy law with scale ``gamma``
    located at ``delta - gamma``.
    """
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma!r}")
    return StableParams(0.5, 1.0, gamma, delta)


def scale_shift(p, a, b=0.0):
    """Law of ``a*X + b`` for ``X ~ p``; exact for every alpha."""
    if a == 0:
        raise InvalidArgumentError("a must be nonzero (a*X would be a point mass)")
    return StableParams(p.alpha, math.copysign(1.0, a) * p.beta, abs(a) * p.gamma, a * p.delta + b)


def add(p1, p2):
    """Law of ``X1 + X2`` for independent ``X1 ~ p1``, ``X2 ~ p2``.

    Both laws must share alpha. A point mass (gamma = 0) is accepted with any
    nominal alpha and acts as a pure shift.
    """
    if p1.alpha != p2.alpha:
        if p1.is_point_mass:
            return StableParams(p2.alpha, p2.beta, p2.gamma, p2.delta + p1.delta)
        if p2.is_point_mass:
            return StableParams(p1.alpha, p1.beta, p1.gamma, p1.delta + p2.delta)
        raise AlphaMismatchError(f"cannot add stable laws with alpha {p1.alpha!r} and {p2.alpha!r}")
    alpha = p1.alpha
    u1, u2 = p1.gamma**alpha, p2.gamma**alpha
    u = u1 + u2
    if u == 0.0:
        return StableParams(alpha, 0.0, 0.0, p1.delta + p2.delta)
    beta = (p1.beta * u1 + p2.beta * u2) / u
    beta = min(1.0, max(-1.0, beta))
    gamma = u ** (1.0 / alpha)
    if is_alpha_one(alpha):
        xi = (2.0 / math.pi) * (
            beta * _xlogx(gamma) - p1.beta * _xlogx(p1.gamma) - p2.beta * _xlogx(p2.gamma)
        )
    else:
        xi = skew_factor(alpha) * (beta * gamma - p1.beta * p1.gamma - p2.beta * p2.gamma)
    return StableParams(alpha, beta, gamma, p1.delta + p2.delta + xi)


def _log_cf(alpha, beta, gamma, delta, t):
    t = np.asarray(t, dtype=float)
    at = gamma * np.abs(t)
    if is_alpha_one(alpha):
        with np.errstate(divide="ignore", invalid="ignore"):
            logterm = np.where(at > 0, np.log(np.where(at > 0, at, 1.0)), 0.0)
        return -at - 1j * beta * (2.0 / math.pi) * gamma * t * logterm + 1j * delta * t
    ata = at**alpha
    return -ata + 1j * beta * skew_factor(alpha) * (np.sign(t) * ata - gamma * t) + 1j * delta * t


def cf_eval(p, t):
    """Characteristic function E[exp(itX)] of ``X ~ p`` at ``t`` (scalar or array)."""
    _check_alpha(p.alpha)
    out = np.exp(_log_cf(p.alpha, p.beta, p.gamma, p.delta, t))
    return complex(out) if np.ndim(out) == 0 else out


def cf_eval_standard(alpha, beta, t):
    """Characteristic function of the standardized variable Z::

        exp(-|t|^alpha [1 - i beta tan(pi alpha/2) sign(t)])   alpha != 1
        exp(-|t| [1 + i beta (2/pi) sign(t) log|t|])           alpha == 1
    """
    if not (math.isfinite(alpha) and 0.0 < alpha <= 2.0):
        raise InvalidArgumentError(f"alpha must lie in (0, 2], got {alpha!r}")
    if not (math.isfinite(beta) and abs(beta) <= 1.0):
        raise InvalidArgumentError(f"beta must lie in [-1, 1], got {beta!r}")
    _check_alpha(alpha)
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    if is_alpha_one(alpha):
        with np.errstate(divide="ignore", invalid="ignore"):
            logterm = np.where(at > 0, np.log(np.where(at > 0, at, 1.0)), 0.0)
        out = np.exp(-at * (1 + 1j * beta * (2.0 / math.pi) * np.sign(t) * logterm))
    else:
        out = np.exp(-(at**alpha) * (1 - 1j * beta * skew_factor(alpha) * np.sign(t)))
    return complex(out) if np.ndim(out) == 0 else out


def to_transformed(p):
    u = p.gamma**p.alpha
    return TransformedParams(u, p.beta * u, p.delta)


def from_transformed(tp, alpha, atol=0.0):
    """Inverse of :func:`to_transformed`.

    ``atol`` snaps ``|u| <= atol`` (and the matching ``v``) to the point mass,
    for callers whose ``u`` carries round-off from a linear solve.
    """
    u, v, w = float(tp.u), float(tp.v), float(tp.w)
    if not all(math.isfinite(x) for x in (u, v, w)):
        raise NonphysicalScaleError(f"non-finite transformed parameters {tp!r}")
    if abs(u) <= atol:
        if abs(v) > atol:
            raise NonphysicalSkewError(f"zero scale with nonzero skew weight v={v!r}")
        return StableParams(alpha, 0.0, 0.0, w)
    if u < 0:
        raise NonphysicalScaleError(f"gamma^alpha = {u!r} is negative")
    beta = v / u
    if abs(beta) > 1.0 + SKEW_TOL:
        raise NonphysicalSkewError(f"|beta| = {abs(beta)!r} exceeds 1")
    beta = min(1.0, max(-1.0, beta))
    return StableParams(alpha, beta, u ** (1.0 / alpha), w)
