r"""Mild solutions in spectral coordinates.

Nothing is time-stepped. The homogeneous part of each mode is
``E_q(lambda t^q) c`` and a forced mode adds the Duhamel term

.. math::

    \int_0^t (t-s)^{q-1} E_{q,q}(\lambda (t-s)^q) f(s)\, ds .

For piecewise-constant forcing the integral over each subinterval is a
difference of the exact antiderivative ``K(tau) = tau^q E_{q,q+1}(lambda tau^q)``,
so the kernel singularity at ``s = t`` never meets a quadrature rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridError
from .mlf import DEFAULT_POLICY, MLEvalPolicy, ml1, ml2
from .spectral import Family, SpectralSystem

__all__ = [
    "Trajectory",
    "ForcingKind",
    "ForcingSignal",
    "default_time_grid",
    "evolve_homogeneous",
    "evolve_forced_mode",
    "kernel_antiderivative",
    "refine_grid",
    "state_norm",
    "gradient_norm",
    "sample_field",
    "sample_gradient_field",
]


def _check_grid(times) -> np.ndarray:
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("time grid is empty")
    if t[0] < 0:
        raise ValueError("times must be nonnegative")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    return t


def default_time_grid(t_max: float, step: float = 0.1, n_early: int = 40, geometric_early: bool = True) -> np.ndarray:
    """``0`` plus geometric points up to ``1``, then a uniform grid to ``t_max``.

    Uniform points are rounded to 12 decimals so that instants such as ``15``
    land exactly on the grid.
    """
    if t_max <= 0 or step <= 0:
        raise ValueError("t_max and step must be positive")
    if geometric_early:
        early = np.concatenate([[0.0], np.geomspace(1e-4, min(1.0, t_max), n_early - 1)])
    else:
        early = np.round(np.arange(0.0, min(1.0, t_max) + 0.5 * step, step), 12)
    if t_max <= 1.0:
        return np.unique(np.append(early[early <= t_max], t_max))
    count = int(round((t_max - 1.0) / step))
    late = np.round(1.0 + step * np.arange(1, count + 1), 12)
    late = late[late < t_max - 1e-12]
    return np.concatenate([early, late, [float(t_max)]])


@dataclass(frozen=True)
class Trajectory:
    """Coefficients ``a_n(t)``: ``coeffs[i, n]`` is mode ``n`` at ``times[i]``."""

    times: np.ndarray
    coeffs: np.ndarray
    q: float

    def __post_init__(self) -> None:
        if self.coeffs.shape[0] != self.times.shape[0]:
            raise ValueError("coeffs must have one row per time")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("trajectory has non-finite coefficients")

    def state_norms(self, system: SpectralSystem) -> np.ndarray:
        return np.array([state_norm(system, row) for row in self.coeffs])

    def gradient_norms(self, system: SpectralSystem) -> np.ndarray:
        return np.array([gradient_norm(system, row) for row in self.coeffs])

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[i], t, rel_tol=1e-12, abs_tol=1e-12):
            raise KeyError(f"time {t} is not on the trajectory grid")
        return self.coeffs[i]


def evolve_homogeneous(
    system: SpectralSystem,
    c0,
    q: float,
    times,
    policy: MLEvalPolicy = DEFAULT_POLICY,
) -> Trajectory:
    """``a_n(t) = E_q(lambda_n t^q) c_n`` on every grid time."""
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    t = _check_grid(times)
    c = np.asarray(c0, dtype=float)
    if c.shape != (system.N,):
        raise ValueError(f"initial coefficients must have length {system.N}")
    lam = system.eigenvalues
    tq = t**q
    out = np.zeros((t.size, system.N))
    for n in np.flatnonzero(c):
        out[:, n] = [ml1(q, lam[n] * s, policy) for s in tq]
        out[:, n] *= c[n]
    return Trajectory(t, out, float(q))


class ForcingKind(enum.Enum):
    SAMPLED_SCALAR = "sampled_scalar"
    CLOSED_LOOP_MODAL = "closed_loop_modal"


@dataclass(frozen=True)
class ForcingSignal:
    """Piecewise-constant forcing: ``values[i]`` on ``[grid[i], grid[i+1]]``."""

    grid: np.ndarray
    values: np.ndarray
    kind: ForcingKind = ForcingKind.SAMPLED_SCALAR

    def __post_init__(self) -> None:
        g = _check_grid(self.grid)
        v = np.asarray(self.values, dtype=float).ravel()
        if g.size < 2:
            raise ValueError("forcing grid needs at least one subinterval")
        if v.size != g.size - 1:
            raise ValueError("need one forcing value per subinterval")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, grid) -> "ForcingSignal":
        g = np.asarray(grid, dtype=float)
        return cls(g, np.zeros(g.size - 1))

    @classmethod
    def constant(cls, grid, value: float) -> "ForcingSignal":
        g = np.asarray(grid, dtype=float)
        return cls(g, np.full(g.size - 1, float(value)))

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], grid, kind=ForcingKind.SAMPLED_SCALAR) -> "ForcingSignal":
        """Sample ``f`` at subinterval midpoints."""
        g = _check_grid(grid)
        mid = 0.5 * (g[:-1] + g[1:])
        return cls(g, np.asarray(f(mid), dtype=float), kind)


def refine_grid(times, factor: int) -> np.ndarray:
    """Split every subinterval of ``times`` into ``factor`` equal pieces."""
    t = _check_grid(times)
    if factor < 1:
        raise ValueError("factor must be at least 1")
    if t[0] > 0:
        t = np.concatenate([[0.0], t])
    frac = np.arange(factor) / factor
    inner = (t[:-1, None] + np.diff(t)[:, None] * frac).ravel()
    return np.append(inner, t[-1])


def kernel_antiderivative(lam: float, q: float, tau: float, policy: MLEvalPolicy = DEFAULT_POLICY) -> float:
    """``K(tau) = int_0^tau s^(q-1) E_{q,q}(lam s^q) ds = tau^q E_{q,q+1}(lam tau^q)``."""
    if tau <= 0.0:
        return 0.0
    tq = tau**q
    return tq * ml2(q, q + 1.0, lam * tq, policy)


def evolve_forced_mode(
    lam: float,
    q: float,
    c0: float,
    forcing: ForcingSignal,
    times,
    policy: MLEvalPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Coefficient path of one mode driven by piecewise-constant forcing.

    Every output time must be a node of ``forcing.grid``, and the forcing grid
    must start at ``0``.
    """
    if not 0 < q <= 1:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    t = _check_grid(times)
    g = forcing.grid
    if g[0] != 0.0:
        raise GridError("forcing grid must start at t = 0")
    right = np.clip(np.searchsorted(g, t), 1, g.size - 1)
    pos = np.where(np.abs(g[right] - t) < np.abs(g[right - 1] - t), right, right - 1)
    ok = np.abs(g[pos] - t) <= 1e-12 * max(1.0, g[-1])
    if not np.all(ok):
        bad = t[~ok][0]
        raise GridError(f"output time {bad} is not a node of the forcing grid")

    cache: dict[float, float] = {}

    def K(tau: float) -> float:
        if tau not in cache:
            cache[tau] = kernel_antiderivative(lam, q, tau, policy)
        return cache[tau]

    out = np.empty(t.size)
    active = np.flatnonzero(forcing.values)
    tq = t**q
    for j, (sq, pj) in enumerate(zip(tq, pos)):
        hom = ml1(q, lam * sq, policy) * c0 if c0 != 0.0 else 0.0
        # s_{i+1} <= t_j for i < pj; the node of t_j itself is g[pj]
        terms = [
            forcing.values[i] * (K(g[pj] - g[i]) - K(g[pj] - g[i + 1]))
            for i in active[active < pj]
        ]
        out[j] = hom + math.fsum(terms)
    return out


def state_norm(system: SpectralSystem, coeffs) -> float:
    """L2 norm of the state, by Parseval in the orthonormal eigenbasis."""
    a = np.asarray(coeffs, dtype=float)
    if a.shape != (system.N,):
        raise ValueError(f"coefficient vector must have length {system.N}")
    return math.sqrt(math.fsum(a * a))


def gradient_norm(system: SpectralSystem, coeffs) -> float:
    """L2 norm of the state gradient, ``sqrt(a^T G a)`` with the gradient Gram ``G``."""
    a = np.asarray(coeffs, dtype=float)
    if a.shape != (system.N,):
        raise ValueError(f"coefficient vector must have length {system.N}")
    if system.grad_gram is None:
        return math.sqrt(math.fsum(a * a * system.grad_sq_norms))
    quad = math.fsum((system.grad_gram @ a) * a)
    return math.sqrt(max(quad, 0.0))


def sample_field(system: SpectralSystem, coeffs, points) -> np.ndarray:
    """Pointwise ``sum_n a_n phi_n(x)``; 2D points are rows ``(x1, x2)``."""
    a = np.asarray(coeffs, dtype=float)
    return system.eigenfunctions(points) @ a


def sample_gradient_field(system: SpectralSystem, coeffs, points) -> np.ndarray:
    """Pointwise ``sum_n a_n grad phi_n(x)``; shape ``(P,)`` in 1D and ``(P, 2)`` in 2D."""
    a = np.asarray(coeffs, dtype=float)
    g = system.eigenfunction_gradients(points)
    if system.family is Family.SINE_2D:
        return np.einsum("pnd,n->pd", g, a)
    return g @ a
