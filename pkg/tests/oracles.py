"""Independent reference computations used by the tests.

Nothing here imports the package under test.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.special import roots_jacobi, roots_legendre


class MLSeries:
    """``E_{q,a}(z)`` for ``|z| <= xmax`` by the power series at high precision.

    Reciprocal gammas are precomputed once; each evaluation is a Horner sweep.
    """

    def __init__(self, q: float, a: float, xmax: float, digits: int = 25) -> None:
        self.q, self.a = q, a
        lx = math.log(max(xmax, 1.0))
        # size of the largest term decides the working precision
        peak, k = 0.0, 0
        tol = -(digits + 5) * math.log(10)
        while True:
            lt = k * lx - math.lgamma(q * k + a)
            peak = max(peak, lt)
            # results can be as small as exp(-peak) when q = 1
            if k > 5 and lt < tol - peak:
                break
            k += 1
        self.K = k + 1
        self.dps = int(2 * peak / math.log(10)) + digits + 10
        with mp.workdps(self.dps):
            self.c = [mp.rgamma(mp.mpf(q) * j + mp.mpf(a)) for j in range(self.K)]

    def __call__(self, z: float) -> float:
        with mp.workdps(self.dps):
            zz = mp.mpf(z)
            s = mp.mpf(0)
            for c in reversed(self.c):
                s = s * zz + c
            return float(s)


@lru_cache(maxsize=None)
def ml_series(q: float, a: float, xmax: float) -> MLSeries:
    return MLSeries(q, a, xmax)


def ml_ref(q: float, a: float, z: float) -> float:
    return ml_series(q, a, max(abs(z), 1.0))(z)


@lru_cache(maxsize=None)
def duhamel_constant_ref(lam: float, q: float, t: float, panels: int = 48, order: int = 24) -> float:
    """``int_0^t (t-s)^(q-1) E_{q,q}(lam (t-s)^q) ds`` by graded-mesh quadrature.

    In ``u = t - s`` the mesh is ``u_j = t (j/M)^3``. The first panel carries the
    ``u^(q-1)`` singularity and uses Gauss-Jacobi; the rest use Gauss-Legendre.
    """
    E = MLSeries(q, q, abs(lam) * t**q)
    u = t * (np.arange(panels + 1) / panels) ** 3
    total = []
    # Gauss-Jacobi on [0, u1] with weight u^(q-1)
    xj, wj = roots_jacobi(order, 0.0, q - 1.0)
    h = u[1]
    nodes = 0.5 * h * (xj + 1.0)
    weights = wj * (0.5 * h) ** q
    total += [w * E(lam * s**q) for s, w in zip(nodes, weights)]
    xl, wl = roots_legendre(order)
    for a, b in zip(u[1:-1], u[2:]):
        nodes = 0.5 * (b - a) * xl + 0.5 * (a + b)
        weights = 0.5 * (b - a) * wl
        total += [w * s ** (q - 1) * E(lam * s**q) for s, w in zip(nodes, weights)]
    return math.fsum(total)


def gauss_legendre_1d(f, a: float, b: float, panels: int = 64, order: int = 20) -> float:
    xl, wl = roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    acc = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (hi - lo) * xl + 0.5 * (hi + lo)
        acc.extend(0.5 * (hi - lo) * wl * f(x))
    return math.fsum(acc)


def gauss_legendre_2d(f, panels: int = 16, order: int = 12) -> float:
    """Composite tensor Gauss-Legendre on the unit square."""
    xl, wl = roots_legendre(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * xl + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * wl)
    x, w = np.concatenate(xs), np.concatenate(ws)
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return math.fsum((W * f(X, Y)).ravel())


def gamma_ref(x: float) -> float:
    with mp.workdps(30):
        return float(mp.gamma(x))
