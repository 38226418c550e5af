"""Numeric Fourier machinery and brute-force oracles.

Densities are recovered from the characteristic function by direct
quadrature of the real inversion integral::

    f(x) = (1/pi) * int_0^T Re[exp(-i t x) phi(t)] dt

The oracles evaluate characteristic functions on fixed grids and never go
through the closed-form parameter algebra on the side they check.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import AlphaMismatchError, DegenerateDistributionError, InvalidArgumentError
from .stable import StableParams, add, cf_eval, is_alpha_one, skew_factor

__all__ = [
    "DensityGrid",
    "OracleReport",
    "truncation_frequency",
    "pdf_values",
    "pdf_from_cf",
    "convolution_oracle",
    "lcm_joint_cf",
    "slicing_oracle_2var",
]

CF_TAIL = 1e-10
RINGING_TOL = 1e-6
CONV_GRID = np.linspace(-10.0, 10.0, 401)  # step 0.05
SLICE_GRID = np.linspace(-5.0, 5.0, 101)  # step 0.1

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class DensityGrid:
    x0: float
    dx: float
    values: np.ndarray

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(len(self.values))

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["x", "density"])
        for xi, fi in zip(self.x, self.values):
            writer.writerow([f"{xi:.17g}", f"{fi:.17g}"])
        if fh is None:
            return out.getvalue()


@dataclass(frozen=True)
class OracleReport:
    max_abs_err: float
    argmax_t_or_x: float
    grid_spec: str

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def truncation_frequency(p):
    """T with |phi(T)| = exp(-(gamma T)^alpha) = exp(-24) < 1e-10."""
    return (math.ceil(-math.log(CF_TAIL)) / p.gamma**p.alpha) ** (1.0 / p.alpha)


def _quadrature(T, omega):
    """Gauss-Legendre nodes/weights on [0, T].

    Uniform panels resolve oscillations up to angular frequency ``omega``;
    panels shrink geometrically toward 0 where phi has a |t|^alpha cusp.
    """
    h = min(T, 4.0 * math.pi / max(omega, 1e-300))
    n_panels = max(1, math.ceil(T / h))
    edges = list(np.linspace(0.0, T, n_panels + 1))
    first = edges[1]
    graded = first * 0.5 ** np.arange(1, 50)
    edges = [0.0] + sorted(graded.tolist()) + edges[1:]
    edges = np.asarray(edges)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES[None, :]
    weights = half[:, None] * _GL_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def pdf_values(p, x):
    """Density of ``p`` at the points ``x`` by cf inversion (no clamping)."""
    if p.gamma == 0.0:
        raise DegenerateDistributionError("a point mass has no density")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    T = truncation_frequency(p)
    # bound on the phase drift of phi: |x - delta| plus the skew term's slope
    if is_alpha_one(p.alpha):
        skew = (2.0 / math.pi) * abs(p.beta) * (abs(math.log(p.gamma * T)) + 1.0)
    else:
        skew = abs(p.beta * skew_factor(p.alpha))
    omega = np.max(np.abs(x - p.delta)) + p.gamma * (1.0 + skew) + 1.0
    t, w = _quadrature(T, omega)
    phi = cf_eval(p, t)
    wr, wi = w * phi.real, w * phi.imag
    out = np.empty_like(x)
    chunk = max(1, 2_000_000 // len(t))
    for start in range(0, len(x), chunk):
        tx = np.outer(x[start:start + chunk], t)
        out[start:start + chunk] = np.cos(tx) @ wr + np.sin(tx) @ wi
    return out / math.pi


def pdf_from_cf(p, x_min, x_max, n):
    """Density samples of ``p`` on ``x_min + k*dx``, ``dx = (x_max - x_min)/n``.

    Ringing below ``-1e-6`` raises; smaller negative values are clamped to 0.
    """
    if not x_min < x_max:
        raise InvalidArgumentError("x_min must be below x_max")
    if n < 64 or n & (n - 1):
        raise InvalidArgumentError(f"n must be a power of two >= 64, got {n}")
    dx = (x_max - x_min) / n
    x = x_min + dx * np.arange(n)
    f = pdf_values(p, x)
    if f.min() < -RINGING_TOL:
        k = int(np.argmin(f))
        raise DegenerateDistributionError(
            f"inversion ringing {f[k]:.3g} at x={x[k]:.6g}; grid or truncation misconfigured"
        )
    return DensityGrid(float(x_min), float(dx), np.maximum(f, 0.0))


def _report(err, grid, spec):
    k = int(np.argmax(err))
    return OracleReport(float(err[k]), float(grid[k]), spec)


def convolution_oracle(p1, p2):
    """Max |phi_{add(p1,p2)}(t) - phi_1(t) phi_2(t)| over t in [-10, 10], step 0.05."""
    if p1.alpha != p2.alpha:
        raise AlphaMismatchError(f"alpha {p1.alpha!r} != {p2.alpha!r}")
    if p1.gamma <= 0 or p2.gamma <= 0:
        raise InvalidArgumentError("convolution oracle needs gamma > 0 on both sides")
    t = CONV_GRID
    err = np.abs(cf_eval(add(p1, p2), t) - cf_eval(p1, t) * cf_eval(p2, t))
    return _report(err, t, "t in [-10, 10], step 0.05 (401 points)")


def lcm_joint_cf(A, x_params, t, s):
    """Joint cf of (X, Y = AX) as the product of per-variable factors.

    Factor j is ``phi_{X_j}(t_j + sum_i A_ij s_i)``. ``t`` and ``s`` are
    arrays of shape ``(..., n)`` and ``(..., m)``.
    """
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    arg = t + s @ A
    out = np.ones(arg.shape[:-1], dtype=complex)
    for j, p in enumerate(x_params):
        out = out * cf_eval(p, arg[..., j])
    return out


def slicing_oracle_2var(alpha, A, x_params):
    """Check closed-form inference on a 2x2 model against sliced joint cfs.

    The joint cf of (X1, X2, Y1, Y2) is evaluated on 2-D grids over
    [-5, 5]^2. Slicing out each Y_i must reproduce the forward observation
    law, and slicing out each X_i must reproduce the posterior recovered from
    those observations. The report carries the worst deviation.
    """
    from .exact import forward_params, posterior_params
    from .model import LinearStableModel

    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise InvalidArgumentError("slicing oracle works on 2x2 models")
    x_params = list(x_params)
    if any(p.alpha != alpha for p in x_params):
        raise AlphaMismatchError("all source laws must share the model alpha")
    fwd = LinearStableModel(alpha, A, x_params, side="x")
    y_params = forward_params(fwd)
    post = posterior_params(LinearStableModel(alpha, A, y_params, side="y"))

    g = SLICE_GRID
    a, b = np.meshgrid(g, g, indexing="ij")
    pair = np.stack([a, b], axis=-1)
    zero = np.zeros_like(pair)
    joint_x = lcm_joint_cf(A, x_params, pair, zero)
    joint_y = lcm_joint_cf(A, x_params, zero, pair)
    mid = len(g) // 2  # g[mid] == 0
    worst = np.zeros(len(g))
    slices = [
        (joint_y[:, mid], y_params[0]),
        (joint_y[mid, :], y_params[1]),
        (joint_x[:, mid], post.x_given_y[0]),
        (joint_x[mid, :], post.x_given_y[1]),
    ]
    for sliced, law in slices:
        worst = np.maximum(worst, np.abs(sliced - cf_eval(law, g)))
    return _report(worst, g, "2-D grid [-5, 5]^2, step 0.1; slices of Y1, Y2, X1, X2")
