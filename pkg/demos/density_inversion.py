"""Densities of stable laws from their characteristic functions.

Only three members of the family have a closed-form density. The grids
below invert the characteristic function numerically and compare with
those three; the skewed case at the end has no closed form at all.
"""

import math

import numpy as np

from lcmstable import StableParams, add, pdf_from_cf

cases = {
    "cauchy": (StableParams(1.0, 0.0, 1.0, 0.0), (-8, 8), lambda x: 1 / (math.pi * (1 + x**2))),
    "gauss": (StableParams(2.0, 0.0, 1 / math.sqrt(2), 0.0), (-8, 8), lambda x: np.exp(-x**2 / 2) / math.sqrt(2 * math.pi)),
}


def levy(x):
    # S(1/2, 1, 1, 0) is the classical Levy law located at -1
    z = x + 1.0
    out = np.zeros_like(x)
    out[z > 0] = np.exp(-1 / (2 * z[z > 0])) / (math.sqrt(2 * math.pi) * z[z > 0] ** 1.5)
    return out


cases["levy"] = (StableParams(0.5, 1.0, 1.0, 0.0), (-2, 20), levy)

for name, (p, (lo, hi), exact) in cases.items():
    grid = pdf_from_cf(p, lo, hi, 4096)
    err = np.max(np.abs(grid.values - exact(grid.x)))
    print(f"{name:7s} max abs error on [{lo}, {hi}]: {err:.2e}")

# %% a skewed sum: the parameters stay in closed form, the density does not
s = add(StableParams(1.5, 0.8, 1.0, 0.0), StableParams(1.5, -0.2, 0.5, 1.0))
grid = pdf_from_cf(s, -10, 10, 2048)
mode = grid.x[np.argmax(grid.values)]
print(f"sum law {s}")
print(f"mode near {mode:.3f}, mass on the grid {np.sum(grid.values) * grid.dx:.4f}")
