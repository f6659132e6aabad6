"""Spectral models of the state operator.

The operator ``A`` is represented only through its eigenpairs: eigenvalues,
and for each eigenfunction the squared L2 norm of its gradient. Analytic
families (Dirichlet sine bases on the unit interval and unit square) also know
how to evaluate their eigenfunctions, which is needed to project initial
states and to sample fields.

Coefficient vectors are positional: entry ``i`` always belongs to
``system.modes[i]``. Builders sort modes by nonincreasing eigenvalue;
:func:`closed_loop` keeps the positions unchanged so coefficient vectors stay
aligned with the open-loop system.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import GapError, ResolutionError

__all__ = [
    "Family",
    "Mode",
    "SpectralSystem",
    "SpectrumPartition",
    "VerdictKind",
    "StabilityVerdict",
    "Decomposition",
    "Support",
    "FeedbackLaw",
    "Polynomial",
    "SampledGrid",
    "build_sine_1d",
    "build_sine_2d",
    "load_custom_table",
    "custom_system",
    "project_initial_state",
    "partition_spectrum",
    "classify_stability",
    "decompose",
    "closed_loop",
]

#: threshold below which a tabulated gradient norm counts as vanishing
GRAD_NULL_TOL = 1e-14


class Family(enum.Enum):
    SINE_1D = "sine1d"
    SINE_2D = "sine2d"
    CUSTOM_TABLE = "custom"


@dataclass(frozen=True)
class Mode:
    """One eigenpair: ``index`` is ``n`` (1D, custom) or ``(n, m)`` (2D)."""

    index: Union[int, tuple[int, int]]
    eigenvalue: float
    grad_sq_norm: float
    grad_vanishes: bool = False
    coeff_formula: str | None = None

    def __post_init__(self) -> None:
        if not self.grad_sq_norm >= 0:
            raise ValueError(f"grad_sq_norm must be nonnegative, got {self.grad_sq_norm}")
        if self.grad_vanishes and self.grad_sq_norm != 0:
            raise ValueError("grad_vanishes requires grad_sq_norm == 0")


@dataclass(frozen=True)
class SpectralSystem:
    family: Family
    modes: tuple[Mode, ...]
    shift: float = 0.0
    grad_gram: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.modes) == 0:
            raise ValueError("a spectral system needs at least one mode")
        if self.grad_gram is not None:
            if self.family is not Family.CUSTOM_TABLE:
                raise ValueError("a full gradient Gram matrix is only allowed for custom tables")
            g = np.asarray(self.grad_gram, dtype=float)
            if g.shape != (len(self.modes), len(self.modes)):
                raise ValueError("grad_gram shape must match the number of modes")
            if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
                raise ValueError("grad_gram must be symmetric")
            if not np.allclose(np.diag(g), self.grad_sq_norms):
                raise ValueError("grad_gram diagonal must equal the per-mode grad_sq_norm")
            g.setflags(write=False)
            object.__setattr__(self, "grad_gram", g)

    @property
    def N(self) -> int:
        return len(self.modes)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([m.eigenvalue for m in self.modes])

    @property
    def grad_sq_norms(self) -> np.ndarray:
        return np.array([m.grad_sq_norm for m in self.modes])

    @property
    def indices(self) -> list:
        return [m.index for m in self.modes]

    def gradient_gram(self) -> np.ndarray:
        """Full Gram matrix of the eigenfunction gradients."""
        if self.grad_gram is not None:
            return np.array(self.grad_gram)
        return np.diag(self.grad_sq_norms)

    def subsystem(self, positions: Sequence[int]) -> "SpectralSystem":
        positions = list(positions)
        gram = None
        if self.grad_gram is not None:
            gram = self.grad_gram[np.ix_(positions, positions)]
        return replace(self, modes=tuple(self.modes[i] for i in positions), grad_gram=gram)

    # -- eigenfunctions of the analytic families --------------------------------

    def eigenfunctions(self, points) -> np.ndarray:
        """Values ``phi_i(points)``, shape ``(len(points), N)``."""
        pts = np.asarray(points, dtype=float)
        if self.family is Family.SINE_1D:
            n = np.array(self.indices, dtype=float)
            return math.sqrt(2.0) * np.sin(np.pi * np.outer(pts, n))
        if self.family is Family.SINE_2D:
            pts = pts.reshape(-1, 2)
            nm = np.array(self.indices, dtype=float)
            return 2.0 * np.sin(np.pi * np.outer(pts[:, 0], nm[:, 0])) * np.sin(
                np.pi * np.outer(pts[:, 1], nm[:, 1])
            )
        raise ValueError("custom tables carry no eigenfunction values")

    def eigenfunction_gradients(self, points) -> np.ndarray:
        """Gradients of the eigenfunctions.

        Shape ``(len(points), N)`` in 1D and ``(len(points), N, 2)`` in 2D.
        """
        pts = np.asarray(points, dtype=float)
        if self.family is Family.SINE_1D:
            n = np.array(self.indices, dtype=float)
            return math.sqrt(2.0) * np.pi * n * np.cos(np.pi * np.outer(pts, n))
        if self.family is Family.SINE_2D:
            pts = pts.reshape(-1, 2)
            nm = np.array(self.indices, dtype=float)
            ax, ay = np.pi * np.outer(pts[:, 0], nm[:, 0]), np.pi * np.outer(pts[:, 1], nm[:, 1])
            gx = 2.0 * np.pi * nm[:, 0] * np.cos(ax) * np.sin(ay)
            gy = 2.0 * np.pi * nm[:, 1] * np.sin(ax) * np.cos(ay)
            return np.stack([gx, gy], axis=-1)
        raise ValueError("custom tables carry no eigenfunction values")


def build_sine_1d(shift: float, N: int) -> SpectralSystem:
    """Dirichlet Laplacian on (0, 1) plus ``shift``.

    Eigenvalues ``-n^2 pi^2 + shift`` with ``phi_n = sqrt(2) sin(n pi x)``; the
    gradients ``sqrt(2) n pi cos(n pi x)`` are mutually orthogonal with squared
    norm ``n^2 pi^2``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    pi2 = math.pi**2
    modes = tuple(
        Mode(
            index=n,
            eigenvalue=-(n * n) * pi2 + shift,
            grad_sq_norm=n * n * pi2,
            coeff_formula="sqrt(2)*sin(n*pi*x)",
        )
        for n in range(1, N + 1)
    )
    return SpectralSystem(Family.SINE_1D, modes, shift=float(shift))


def build_sine_2d(N: int) -> SpectralSystem:
    """Sine family on the unit square with eigenvalues ``-(n+m)^2 pi^2``.

    The eigenvalue formula is kept exactly as used in the worked 2D example.
    Eigenfunctions are normalized to unit L2 norm, ``2 sin(n pi x) sin(m pi y)``,
    so ``||grad phi_nm||^2 = (n^2 + m^2) pi^2``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    pi2 = math.pi**2
    pairs = sorted(
        ((n, m) for n in range(1, N + 1) for m in range(1, N + 1)),
        key=lambda nm: (nm[0] + nm[1], nm[0]),
    )
    modes = tuple(
        Mode(
            index=(n, m),
            eigenvalue=-((n + m) ** 2) * pi2,
            grad_sq_norm=(n * n + m * m) * pi2,
            coeff_formula="2*sin(n*pi*x1)*sin(m*pi*x2)",
        )
        for n, m in pairs
    )
    return SpectralSystem(Family.SINE_2D, modes)


def custom_system(modes: Sequence[Mode], grad_gram=None) -> SpectralSystem:
    """Custom table system, sorted stably by nonincreasing eigenvalue."""
    order = sorted(range(len(modes)), key=lambda i: -modes[i].eigenvalue)
    gram = None
    if grad_gram is not None:
        gram = np.asarray(grad_gram, dtype=float)[np.ix_(order, order)]
    return SpectralSystem(Family.CUSTOM_TABLE, tuple(modes[i] for i in order), grad_gram=gram)


_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


def load_custom_table(source, grad_gram=None) -> SpectralSystem:
    """Read a whitespace table ``index eigenvalue grad_sq_norm grad_vanishes``.

    ``source`` is a path or the table text itself. ``#`` starts a comment.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        text = Path(source).read_text()
    else:
        text = str(source)
    modes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        index, lam, g2, flag = parts
        flag = flag.lower()
        if flag not in _TRUE | _FALSE:
            raise ValueError(f"line {lineno}: grad_vanishes must be a boolean, got {flag!r}")
        g2 = float(g2)
        vanishes = flag in _TRUE or g2 < GRAD_NULL_TOL
        if flag in _TRUE and g2 >= GRAD_NULL_TOL:
            raise ValueError(f"line {lineno}: grad_vanishes is set but grad_sq_norm = {g2}")
        modes.append(
            Mode(index=int(index), eigenvalue=float(lam), grad_sq_norm=0.0 if vanishes else g2, grad_vanishes=vanishes)
        )
    if not modes:
        raise ValueError("custom table has no modes")
    return custom_system(modes, grad_gram)


# -- initial states -------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Polynomial on (0, 1) given by ascending coefficients, ``x^2(x-1) -> [0, 0, -1, 1]``."""

    coeffs: tuple[float, ...]

    def __init__(self, coeffs) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def derivative(self) -> "Polynomial":
        return Polynomial(np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else [0.0])


@dataclass(frozen=True)
class SampledGrid:
    """State sampled on a 1D grid covering [0, 1]."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.shape != v.shape or x.ndim != 1 or x.size < 3:
            raise ValueError("x and values must be matching 1D arrays with at least 3 samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sample grid must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)


def _sine_moments(degree: int, n: int) -> np.ndarray:
    """``int_0^1 x^k sin(n pi x) dx`` for k = 0..degree, by integration by parts."""
    a = n * math.pi
    cos_a = -1.0 if n % 2 else 1.0
    sin_int = np.empty(degree + 1)
    cos_int = np.empty(degree + 1)
    sin_int[0] = (1.0 - cos_a) / a
    cos_int[0] = 0.0
    for k in range(1, degree + 1):
        sin_int[k] = -cos_a / a + k / a * cos_int[k - 1]
        cos_int[k] = -k / a * sin_int[k - 1]
    return sin_int


def _gauss_legendre_2d(f: Callable, panels: int, order: int = 16):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)[:, None]
    nodes = (edges[:-1, None] + 0.5 * h * (xg + 1.0)).ravel()
    weights = (0.5 * h * wg).ravel()
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    return X.ravel(), Y.ravel(), np.outer(weights, weights).ravel()


def project_initial_state(system: SpectralSystem, y0) -> np.ndarray:
    """Expansion coefficients ``<y0, phi_n>`` of an initial state.

    ``y0`` may be a coefficient array of length ``N`` (returned as is), a
    :class:`Polynomial` (closed form against the 1D sine modes), a
    :class:`SampledGrid` (composite Simpson rule) or a callable (Gauss-Legendre).
    """
    if isinstance(y0, np.ndarray) or isinstance(y0, (list, tuple)):
        c = np.asarray(y0, dtype=float)
        if c.shape != (system.N,):
            raise ValueError(f"coefficient vector must have length {system.N}")
        return c.copy()

    if system.family is Family.CUSTOM_TABLE:
        raise ValueError("custom tables need initial states given as coefficient vectors")

    if isinstance(y0, Polynomial) and system.family is Family.SINE_1D:
        deg = len(y0.coeffs) - 1
        coeffs = np.asarray(y0.coeffs)
        return np.array(
            [math.sqrt(2.0) * float(np.dot(coeffs, _sine_moments(deg, n))) for n in system.indices]
        )

    if isinstance(y0, SampledGrid):
        if system.family is not Family.SINE_1D:
            raise ValueError("sampled grids are supported for the 1D family only")
        x = y0.x
        if x[0] > 1e-12 or x[-1] < 1 - 1e-12:
            raise ResolutionError("sample grid must span [0, 1]")
        n_max = max(system.indices)
        # ten samples per half-wavelength 1/n_max of the highest mode
        if np.max(np.diff(x)) > 1.0 / (10 * n_max) + 1e-12:
            raise ResolutionError(
                f"sample spacing {np.max(np.diff(x)):.3g} too coarse for mode {n_max}; "
                f"need at most {1.0 / (10 * n_max):.3g}"
            )
        phi = system.eigenfunctions(x)
        return integrate.simpson(phi * y0.values[:, None], x=x, axis=0)

    if callable(y0):
        if system.family is Family.SINE_1D:
            n_max = max(system.indices)
            xg, wg = np.polynomial.legendre.leggauss(16)
            panels = max(8, 2 * n_max)
            edges = np.linspace(0.0, 1.0, panels + 1)
            h = np.diff(edges)[:, None]
            x = (edges[:-1, None] + 0.5 * h * (xg + 1.0)).ravel()
            w = (0.5 * h * wg).ravel()
            return system.eigenfunctions(x).T @ (w * np.asarray(y0(x), dtype=float))
        n_max = max(max(i) for i in system.indices)
        X, Y, W = _gauss_legendre_2d(y0, max(4, n_max))
        vals = np.asarray(y0(X, Y), dtype=float)
        return system.eigenfunctions(np.column_stack([X, Y])).T @ (W * vals)

    raise TypeError(f"unsupported initial state descriptor {type(y0).__name__}")


# -- stability ------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumPartition:
    omega1: tuple[float, ...]
    omega2: tuple[float, ...]
    gradient_null: tuple[float, ...]


def partition_spectrum(system: SpectralSystem) -> SpectrumPartition:
    """Split the distinct eigenvalues into omega_1, omega_2 and the gradient-null set.

    An eigenvalue is gradient-null only when every stored eigenfunction sharing
    it has a vanishing gradient, i.e. its eigenspace lies in ``N(grad* grad)``.
    """
    groups: dict[float, bool] = {}
    for m in system.modes:
        groups[m.eigenvalue] = groups.get(m.eigenvalue, True) and m.grad_vanishes
    omega1, omega2, null = [], [], []
    for lam in sorted(groups, reverse=True):
        if groups[lam]:
            null.append(lam)
        elif lam >= 0:
            omega1.append(lam)
        else:
            omega2.append(lam)
    return SpectrumPartition(tuple(omega1), tuple(omega2), tuple(null))


class VerdictKind(enum.Enum):
    MITTAG_LEFFLER_STABLE = "MittagLefflerStable"
    STRONGLY_STABLE = "StronglyStable"
    CRITERIA_NOT_SATISFIED = "CriteriaNotSatisfied"


@dataclass(frozen=True)
class StabilityVerdict:
    """Outcome of the sufficient spectral criteria.

    For a stable verdict ``||grad y(t)|| <= C E_q(-xi t^q)^b ||y0||`` holds on the
    stored truncation.
    """

    kind: VerdictKind
    xi: float | None = None
    C: float | None = None
    b: float = 1.0
    witness: float | None = None
    partition: SpectrumPartition | None = None

    @property
    def stable(self) -> bool:
        return self.kind is not VerdictKind.CRITERIA_NOT_SATISFIED


def classify_stability(system: SpectralSystem) -> StabilityVerdict:
    """Check ``omega_1 = {}`` and ``sup omega_2 < 0``.

    The criteria are sufficient only, so ``CriteriaNotSatisfied`` does not prove
    instability. ``C`` is ``sqrt(sum ||grad phi_n||^2)`` over the truncation,
    which bounds ``sum c_n^2 ||grad phi_n||^2 <= C^2 ||y0||^2``. A system whose
    every eigenspace is gradient-null has an identically zero gradient; that case
    is reported as ``StronglyStable`` since no decay rate is singled out.
    """
    part = partition_spectrum(system)
    if part.omega1:
        return StabilityVerdict(VerdictKind.CRITERIA_NOT_SATISFIED, witness=part.omega1[0], partition=part)
    if not part.omega2:
        return StabilityVerdict(VerdictKind.STRONGLY_STABLE, C=0.0, partition=part)
    sup = part.omega2[0]
    if not sup < 0:
        return StabilityVerdict(VerdictKind.CRITERIA_NOT_SATISFIED, witness=sup, partition=part)
    C = math.sqrt(math.fsum(system.grad_sq_norms))
    return StabilityVerdict(VerdictKind.MITTAG_LEFFLER_STABLE, xi=-sup, C=C, partition=part)


# -- decomposition and feedback -------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """Split of the spectrum at the gap ``(-beta, 0)``.

    ``unstable_positions``/``stable_positions`` index into ``system.modes``.
    """

    system: SpectralSystem
    beta: float
    unstable_positions: tuple[int, ...]
    stable_positions: tuple[int, ...]

    @property
    def l(self) -> int:
        return len(self.unstable_positions)

    @property
    def unstable(self) -> SpectralSystem | None:
        return self.system.subsystem(self.unstable_positions) if self.l else None

    @property
    def stable(self) -> SpectralSystem | None:
        return self.system.subsystem(self.stable_positions) if self.stable_positions else None

    def project_unstable(self, coeffs) -> np.ndarray:
        """``P c``: zero out the stable coordinates."""
        c = np.asarray(coeffs, dtype=float)
        out = np.zeros_like(c)
        idx = list(self.unstable_positions)
        out[..., idx] = c[..., idx]
        return out

    def project_stable(self, coeffs) -> np.ndarray:
        """``(I - P) c``: zero out the unstable coordinates."""
        c = np.asarray(coeffs, dtype=float)
        out = np.zeros_like(c)
        idx = list(self.stable_positions)
        out[..., idx] = c[..., idx]
        return out


def decompose(system: SpectralSystem, beta: float) -> Decomposition:
    if not beta > 0:
        raise ValueError("beta must be positive")
    lam = system.eigenvalues
    inside = lam[(lam > -beta) & (lam < 0)]
    if inside.size:
        raise GapError(f"eigenvalue {inside.max():.12g} lies in (-{beta:.12g}, 0)")
    unstable = tuple(int(i) for i in np.flatnonzero(lam >= 0))
    stable = tuple(int(i) for i in np.flatnonzero(lam < 0))
    return Decomposition(system, float(beta), unstable, stable)


class Support(enum.Enum):
    ALL_MODES = "all"
    UNSTABLE_ONLY = "unstable_only"


@dataclass(frozen=True)
class FeedbackLaw:
    """Diagonal action of ``L D`` in the eigenbasis: ``gamma_n = lambda_n + d_n``.

    With ``Support.UNSTABLE_ONLY`` the gains act on the first ``l`` positions of
    the system and vanish on the rest.
    """

    gains: np.ndarray
    support: Support = Support.ALL_MODES
    l: int | None = None

    def __post_init__(self) -> None:
        g = np.array(self.gains, dtype=float)
        if g.ndim != 1:
            raise ValueError("gains must be a 1D array")
        if not np.all(np.isfinite(g)):
            raise ValueError("gains must be finite")
        if self.support is Support.UNSTABLE_ONLY:
            if self.l is None or not 0 <= self.l <= g.size:
                raise ValueError("UnstableOnly feedback needs 0 <= l <= len(gains)")
            if np.any(g[self.l :] != 0):
                raise ValueError("UnstableOnly feedback must have zero gains beyond l")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @classmethod
    def uniform(cls, N: int, gain: float, L_scale: float = 1.0) -> "FeedbackLaw":
        """``L = L_scale I`` and ``D = gain I``: every mode is shifted by ``L_scale*gain``."""
        return cls(np.full(N, L_scale * gain))

    @classmethod
    def unstable_only(cls, N: int, gains, L_scale: float = 1.0) -> "FeedbackLaw":
        head = L_scale * np.atleast_1d(np.asarray(gains, dtype=float))
        full = np.zeros(N)
        full[: head.size] = head
        return cls(full, Support.UNSTABLE_ONLY, head.size)

    @classmethod
    def zero(cls, N: int) -> "FeedbackLaw":
        return cls(np.zeros(N))


def closed_loop(system: SpectralSystem, fb: FeedbackLaw) -> SpectralSystem:
    """System with eigenvalues ``lambda_n + d_n`` and unchanged eigenfunctions."""
    if fb.gains.size != system.N:
        raise ValueError(f"feedback defines {fb.gains.size} gains for {system.N} modes")
    modes = tuple(replace(m, eigenvalue=m.eigenvalue + float(d)) for m, d in zip(system.modes, fb.gains))
    return replace(system, modes=modes)
