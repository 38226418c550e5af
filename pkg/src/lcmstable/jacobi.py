"""Stable-Jacobi: synchronous fixed-point iteration for the posterior laws.

The model is first rescaled to a unit diagonal (Y' = D^{-1/2} Y,
X' = D^{1/2} X). Each sweep then updates, from the previous iterate only::

    u_i <- gamma_{y_i}^alpha          - sum_{j != i} |A_ij|^alpha u_j
    v_i <- beta_{y_i} gamma_{y_i}^alpha - sum_{j != i} sign(A_ij) |A_ij|^alpha v_j
    w_i <- delta_{y_i} - sum_{j != i} A_ij w_j - xi_i

where xi_i reads the neighbours' previous (u_j, v_j) and node i's own
freshly updated (u_i, v_i).

The u and v recursions are plain Jacobi iterations for the first two
posterior systems; the w recursion is Jacobi for A delta = delta_y - xi.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergenceError,
    InvalidArgumentError,
    NotConvergedError,
    UnsupportedFeatureError,
)
from .exact import PosteriorResult, beta_gamma, laws_to_arrays, raise_on_flags, transformed_to_laws, xi_vector
from .model import (
    entrywise_abs_pow,
    entrywise_log_abs,
    normalize_unit_diagonal,
    signed_abs_pow,
    spectral_radius,
)
from .stable import is_alpha_one, skew_factor

__all__ = [
    "JacobiOptions",
    "JacobiTrace",
    "JacobiState",
    "JacobiSystem",
    "prepare",
    "jacobi_init",
    "jacobi_step",
    "jacobi_run",
    "equation_residuals",
    "iteration_rate",
]

DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class JacobiOptions:
    tol: float = 1e-8
    max_iter: int = 10000
    damping: float = 0.0
    record_trace: bool = True
    xi_form: str = "consistent"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")
        if not 0.0 <= self.damping <= 1.0:
            raise InvalidArgumentError("damping must lie in [0, 1]")
        if self.xi_form not in ("consistent", "printed"):
            raise InvalidArgumentError(f"xi_form must be 'consistent' or 'printed', got {self.xi_form!r}")


@dataclass
class JacobiTrace:
    residual_u: list = field(default_factory=list)
    residual_v: list = field(default_factory=list)
    residual_w: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_iterations: int = 0
    converged: bool = False

    @property
    def residual_inf(self):
        return [max(a, b, c) for a, b, c in zip(self.residual_u, self.residual_v, self.residual_w)]

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iteration", "residual_u", "residual_v", "residual_w"])
        for k, row in enumerate(zip(self.residual_u, self.residual_v, self.residual_w), start=1):
            writer.writerow([k] + [f"{r:.17g}" for r in row])
        if fh is None:
            return out.getvalue()


@dataclass
class JacobiState:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    iteration: int = 0

    def stacked(self):
        return np.column_stack([self.u, self.v, self.w])


def _log_abs(u):
    au = np.abs(u)
    out = np.zeros_like(au)
    np.log(au, out=out, where=au > 0)
    return out


def _matvec(M, x):
    # Correctly rounded row sums: independent of summation order, variable
    # ordering and BLAS threading.
    return np.fromiter((math.fsum(row) for row in M * x[None, :]), dtype=float, count=M.shape[0])


class JacobiSystem:
    """A y-side model rescaled to unit diagonal, with its sweep operators."""

    def __init__(self, model):
        if model.side != "y":
            raise InvalidArgumentError("Stable-Jacobi needs a model with y-side parameters")
        if model.noise is not None:
            raise UnsupportedFeatureError("posterior inference with a noise term is not supported")
        self.model = model
        self.alpha = alpha = model.alpha
        An, D = normalize_unit_diagonal(model.A)
        self.A = An
        self.scale = 1.0 / np.sqrt(np.diag(D))
        by, gy, dy = laws_to_arrays(model.params)
        gy = gy * self.scale
        dy = dy * self.scale
        self.gamma_y = gy
        self.bg_y = by * gy
        self.u_y = gy**alpha
        self.v_y = by * self.u_y
        self.w_y = dy

        def offdiag(M):
            M = M.copy()
            np.fill_diagonal(M, 0.0)
            return M

        self.U_off = offdiag(entrywise_abs_pow(An, alpha))
        self.S_off = offdiag(signed_abs_pow(An, alpha))
        self.A_off = offdiag(An)
        self.A_log = An * entrywise_log_abs(An)
        self.alpha_one = is_alpha_one(alpha)
        self.matvecs = 0

    @property
    def n(self):
        return self.A.shape[0]

    def matvec(self, M, x):
        self.matvecs += 1
        return _matvec(M, x)

    def _bg(self, u, v, form):
        if form == "printed":
            # literal reading: v * gamma^((1-alpha)/alpha) with gamma the scale
            g = np.abs(u) ** (1.0 / self.alpha)
            return np.where(g > 0, v * np.power(g, (1.0 - self.alpha) / self.alpha, where=g > 0, out=np.ones_like(g)), 0.0)
        return beta_gamma(u, v, self.alpha)

    def xi(self, old, new, form="consistent"):
        """Shift correction of node i from its neighbours' old (u, v) and its own new (u, v).

        The diagonal term is local to the node, so using the fresh value
        keeps the sweep synchronous across nodes.
        """
        bg_old = self._bg(old[0], old[1], form)
        bg_new = self._bg(new[0], new[1], form)
        if self.alpha_one:
            ylog = self.bg_y * np.log(np.where(self.gamma_y > 0, self.gamma_y, 1.0))
            # the diagonal of A_log is zero on the unit-diagonal form
            cross = ylog - self.matvec(self.A_log, bg_old)
            if form == "printed":
                return (2.0 / math.pi) * cross
            return (2.0 / math.pi) * (cross - self.matvec(self.A_off, bg_old * _log_abs(old[0])) - bg_new * _log_abs(new[0]))
        return skew_factor(self.alpha) * (self.bg_y - self.matvec(self.A_off, bg_old) - bg_new)

    def unscale(self, u, v, w):
        """Map unit-diagonal coordinates back to the original X."""
        s_a = self.scale**self.alpha
        return u * s_a, v * s_a, w * self.scale


def prepare(model):
    return model if isinstance(model, JacobiSystem) else JacobiSystem(model)


def jacobi_init(model):
    """All-zero transformed state: every message starts as S(alpha, 0, 0, 0)."""
    system = prepare(model)
    n = system.n
    return JacobiState(np.zeros(n), np.zeros(n), np.zeros(n), 0)


def jacobi_step(state, model, damping=0.0, xi_form="consistent"):
    """One synchronous sweep; every output coordinate reads the old state only."""
    system = prepare(model)
    if len(state.u) != system.n:
        raise InvalidArgumentError(f"state has {len(state.u)} entries, model has {system.n}")
    u = system.u_y - system.matvec(system.U_off, state.u)
    v = system.v_y - system.matvec(system.S_off, state.v)
    w = system.w_y - system.matvec(system.A_off, state.w) - system.xi((state.u, state.v), (u, v), xi_form)
    if damping:
        u = (1.0 - damping) * u + damping * state.u
        v = (1.0 - damping) * v + damping * state.v
        w = (1.0 - damping) * w + damping * state.w
    k = state.iteration + 1
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise DivergenceError(f"non-finite update at iteration {k}", iteration=k)
    return JacobiState(u, v, w, k)


def jacobi_run(model, options=None):
    """Iterate until the fixed-point residual ||F(x) - x||_inf <= tol.

    Returns the posterior laws and the convergence trace. Iteration k's
    residual is measured on the k-th iterate, which is the one returned.
    """
    opts = options or JacobiOptions()
    system = prepare(model)
    trace = JacobiTrace()
    x = jacobi_step(jacobi_init(system), system, opts.damping, opts.xi_form)
    first = None
    for k in range(1, opts.max_iter + 1):
        try:
            nxt = jacobi_step(x, system, opts.damping, opts.xi_form)
        except DivergenceError as exc:
            exc.trace = trace
            raise
        ru = float(np.max(np.abs(nxt.u - x.u)))
        rv = float(np.max(np.abs(nxt.v - x.v)))
        rw = float(np.max(np.abs(nxt.w - x.w)))
        trace.residual_u.append(ru)
        trace.residual_v.append(rv)
        trace.residual_w.append(rw)
        if opts.record_trace:
            trace.snapshots.append(x.stacked())
        trace.final_iterations = k
        r = max(ru, rv, rw)
        if first is None:
            first = r
        if r <= opts.tol:
            trace.converged = True
            break
        if first > 0 and r > DIVERGENCE_FACTOR * first:
            raise DivergenceError(f"residual grew to {r:.3g} at iteration {k}", iteration=k, trace=trace)
        x = nxt
    else:
        raise NotConvergedError(
            f"Stable-Jacobi did not reach tol={opts.tol:g} in {opts.max_iter} iterations "
            f"(last residual {trace.residual_inf[-1]:.3g})",
            trace=trace,
        )
    u, v, w = system.unscale(x.u, x.v, x.w)
    atol = 1e-12 * (1.0 + float(np.max(np.abs(u))))
    laws, flags = transformed_to_laws(system.alpha, u, v, w, atol)
    raise_on_flags(flags)
    stats = {"iterations": trace.final_iterations, "residual": trace.residual_inf[-1]}
    result = PosteriorResult(laws, np.column_stack([u, v, w]), flags, stats, list(system.model.labels))
    return result, trace


def equation_residuals(model, transformed):
    """Residuals of the three posterior linear systems at (u, v, w).

    Returned as ``(r_gamma, r_beta, r_delta)`` infinity norms.
    """
    alpha, A = model.alpha, model.A
    by, gy, dy = laws_to_arrays(model.params)
    uy = gy**alpha
    u, v, w = transformed[:, 0], transformed[:, 1], transformed[:, 2]
    r_u = entrywise_abs_pow(A, alpha) @ u - uy
    r_v = signed_abs_pow(A, alpha) @ v - by * uy
    r_w = A @ w - (dy - xi_vector(alpha, A, by * gy, gy, u, v))
    return tuple(float(np.max(np.abs(r))) for r in (r_u, r_v, r_w))


def iteration_rate(model, tol=1e-9):
    """Asymptotic contraction factor of a sweep.

    The linearized sweep is block triangular with diagonal blocks
    |R|^alpha, sign(R)|R|^alpha and R (R = I - A on the unit-diagonal form),
    so the rate is the largest of their spectral radii.
    """
    An, _ = normalize_unit_diagonal(model.A)
    R = np.eye(model.n) - An
    return max(
        spectral_radius(entrywise_abs_pow(R, model.alpha), tol=tol),
        spectral_radius(signed_abs_pow(R, model.alpha), tol=tol),
        spectral_radius(R, tol=tol),
    )
