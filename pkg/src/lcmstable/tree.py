"""Characteristic-slice-product message passing on tree-structured models.

Messages are exact Schur-complement eliminations of a subtree, carried in
additive coordinates ``z = (u, v, w')`` where ``w'`` removes the skew part of
the shift:

    alpha != 1:  w' = delta - tan(pi alpha/2) beta gamma
    alpha == 1:  w' = delta - (2/pi) beta gamma log gamma

In these coordinates summing independent laws is plain vector addition, so
the message product is a sum, and crossing an edge is a linear map built
from the edge weight (|A_ij|^alpha, sign(A_ij)|A_ij|^alpha, A_ij). Each
message carries that map's accumulated self-coupling (``gain``) and the
propagated evidence (``payload``).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NotATreeError, SingularMatrixError, UnsupportedFeatureError
from .exact import beta_gamma, laws_to_arrays, raise_on_flags, transformed_to_laws
from .model import build_graph, entrywise_log_abs
from .stable import TransformedParams, is_alpha_one, skew_factor

__all__ = ["TreeCheck", "Message", "check_tree", "csp_messages", "csp_run"]


@dataclass(frozen=True)
class TreeCheck:
    """Outcome of :func:`check_tree`.

    For a tree, ``order`` is a breadth-first order from ``root`` and
    ``parent[i]`` the parent of node i (-1 at the root). Otherwise ``cycle``
    lists the nodes of a found cycle, or is None when the graph is
    disconnected.
    """

    is_tree: bool
    root: int | None = None
    order: tuple = ()
    parent: tuple = ()
    cycle: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.is_tree


@dataclass(frozen=True)
class Message:
    source: int
    target: int
    gain: np.ndarray
    payload: TransformedParams


def _find_cycle(adj):
    n = len(adj)
    parent = [-1] * n
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        while stack:
            i = stack.pop()
            for j in adj[i]:
                if j == parent[i]:
                    continue
                if seen[j]:
                    # walk both ends up to their common ancestor
                    path_i, path_j = [i], [j]
                    anc_i = {i}
                    k = i
                    while parent[k] != -1:
                        k = parent[k]
                        path_i.append(k)
                        anc_i.add(k)
                    k = j
                    while k not in anc_i:
                        k = parent[k]
                        path_j.append(k)
                    meet = path_j[-1]
                    cycle = path_i[: path_i.index(meet) + 1] + path_j[-2::-1]
                    return tuple(cycle)
                seen[j] = True
                parent[j] = i
                stack.append(j)
    return None


def check_tree(A, root=0):
    """Is the graph of A (N(i) = {j != i: A_ij or A_ji nonzero}) a spanning tree?"""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"check_tree needs a square matrix, got {A.shape}")
    n = A.shape[0]
    adj = build_graph(A)
    edges = sum(len(a) for a in adj) // 2
    cycle = _find_cycle(adj)
    if cycle is not None:
        return TreeCheck(False, cycle=cycle, reason=f"cycle through nodes {list(cycle)}")
    if edges != n - 1:
        return TreeCheck(False, reason=f"graph is disconnected ({edges} edges on {n} nodes)")
    if not 0 <= root < n:
        raise InvalidArgumentError(f"root {root} out of range")
    parent = [-1] * n
    order = [root]
    queue = deque([root])
    seen = {root}
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                parent[j] = i
                order.append(j)
                queue.append(j)
    return TreeCheck(True, root, tuple(order), tuple(parent))


class _Blocks:
    """Per-edge 3x3 coefficient blocks of the additive-coordinate system."""

    def __init__(self, model):
        alpha, A = model.alpha, model.A
        self.alpha = alpha
        self.A = A
        self.absp = np.abs(A) ** alpha
        self.sgnp = np.sign(A) * self.absp
        self.alpha_one = is_alpha_one(alpha)
        self.L = A * entrywise_log_abs(A) if self.alpha_one else None
        by, gy, dy = laws_to_arrays(model.params)
        uy = gy**alpha
        if self.alpha_one:
            glog = np.zeros_like(gy)
            np.log(gy, out=glog, where=gy > 0)
            wy = dy - (2.0 / math.pi) * by * gy * glog
        else:
            wy = dy - skew_factor(alpha) * by * gy
        self.rhs = np.column_stack([uy, by * uy, wy])

    def __call__(self, i, j):
        B = np.zeros((3, 3))
        B[0, 0] = self.absp[i, j]
        B[1, 1] = self.sgnp[i, j]
        B[2, 2] = self.A[i, j]
        if self.alpha_one:
            B[2, 1] = -(2.0 / math.pi) * self.L[i, j]
        return B


def _solve3(P, rhs, where):
    try:
        x = np.linalg.solve(P, rhs)
    except np.linalg.LinAlgError:
        raise SingularMatrixError(f"singular elimination block at {where}") from None
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError(f"singular elimination block at {where}")
    return x


def csp_messages(model, root=0):
    """Run the two-phase schedule; returns ``(z, messages)``.

    ``z`` holds the additive coordinates of every marginal and ``messages``
    maps ``(source, target)`` to :class:`Message`; there are 2(n - 1).
    """
    if model.side != "y":
        raise InvalidArgumentError("tree inference needs a model with y-side parameters")
    if model.noise is not None:
        raise UnsupportedFeatureError("posterior inference with a noise term is not supported")
    tree = check_tree(model.A, root)
    if not tree:
        raise NotATreeError(f"model graph is not a tree: {tree.reason}", cycle=tree.cycle)
    adj = build_graph(model.A)
    blocks = _Blocks(model)
    messages = {}

    def incoming(k, exclude):
        gain = np.zeros((3, 3))
        ev = np.zeros(3)
        for l in adj[k]:
            if l != exclude:
                m = messages[(l, k)]
                gain = gain + m.gain
                ev = ev + np.array([m.payload.u, m.payload.v, m.payload.w])
        return gain, ev

    def send(k, i):
        gain, ev = incoming(k, i)
        P = blocks(k, k) - gain
        H = blocks.rhs[k] - ev
        Bik = blocks(i, k)
        sol = _solve3(P, np.column_stack([blocks(k, i), H]), f"edge {k}->{i}")
        messages[(k, i)] = Message(k, i, Bik @ sol[:, :3], TransformedParams(*(Bik @ sol[:, 3])))

    for k in reversed(tree.order[1:]):
        send(k, tree.parent[k])
    for i in tree.order:
        for k in adj[i]:
            if tree.parent[k] == i:
                send(i, k)

    z = np.empty((model.n, 3))
    for i in range(model.n):
        gain, ev = incoming(i, None)
        z[i] = _solve3(blocks(i, i) - gain, blocks.rhs[i] - ev, f"node {i}")
    return z, messages


def csp_run(model, root=0):
    """Exact posterior laws of a tree-structured model by message passing."""
    z, _ = csp_messages(model, root)
    alpha = model.alpha
    u, v, wp = z[:, 0], z[:, 1], z[:, 2]
    bg = beta_gamma(u, v, alpha)
    if is_alpha_one(alpha):
        au = np.abs(u)
        logu = np.zeros_like(au)
        np.log(au, out=logu, where=au > 0)
        w = wp + (2.0 / math.pi) * bg * logu
    else:
        w = wp + skew_factor(alpha) * bg
    atol = 1e-12 * (1.0 + float(np.max(np.abs(u))))
    laws, flags = transformed_to_laws(alpha, u, v, w, atol)
    raise_on_flags(flags)
    return laws
