r"""Mittag-Leffler and Gamma functions for real arguments.

The two-parameter Mittag-Leffler function is

.. math::

    E_{q,\alpha}(z) = \sum_{k=0}^{\infty} \frac{z^k}{\Gamma(qk + \alpha)},

with :math:`E_q = E_{q,1}`. Only real :math:`z` and :math:`0 < q \le 1` are
supported. Three regimes are used and each one reports an error estimate, so a
regime is accepted only when it can certify the requested accuracy:

* the power series, for :math:`|z|` up to ``series_radius`` provided the
  alternating cancellation stays below the target accuracy;
* the algebraic asymptotic expansion on the negative axis,
  :math:`E_{q,\alpha}(-x) \sim \sum_{k\ge1} (-1)^{k+1} x^{-k}/\Gamma(\alpha - qk)`,
  for :math:`x` above ``asymptotic_threshold`` or wherever its truncation
  error already meets the target;
* a Laplace-type integral on :math:`[0, \infty)` for everything in between.

The case :math:`q = 1` is routed to exponential identities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from .errors import AccuracyError, DomainError, PoleError

__all__ = [
    "MLEvalPolicy",
    "DEFAULT_POLICY",
    "gamma",
    "rgamma",
    "ml1",
    "ml2",
    "ml1_neg_bounds",
]

_EPS = 2.220446049250313e-16
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class MLEvalPolicy:
    """Accuracy target and regime thresholds for Mittag-Leffler evaluation."""

    target_rel_accuracy: float = 1e-12
    series_radius: float = 5.0
    asymptotic_threshold: float = 50.0
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not self.target_rel_accuracy > 0:
            raise ValueError("target_rel_accuracy must be positive")
        if not 0 < self.series_radius <= self.asymptotic_threshold:
            raise ValueError("need 0 < series_radius <= asymptotic_threshold")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_POLICY = MLEvalPolicy()


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function; raises :class:`PoleError` at nonpositive integers."""
    x = float(x)
    if _is_pole(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def _log_rgamma(y: float) -> tuple[float, float]:
    """Return ``(sign, log|1/Gamma(y)|)``; sign is 0 at the poles."""
    if _is_pole(y):
        return 0.0, -math.inf
    if y > 0:
        return 1.0, -math.lgamma(y)
    # Gamma alternates sign between consecutive negative integers
    sign = -1.0 if math.floor(-y) % 2 == 0 else 1.0
    return sign, -math.lgamma(y)


def rgamma(y: float) -> float:
    """Reciprocal Gamma ``1/Gamma(y)``, an entire function (zero at the poles)."""
    y = float(y)
    if _is_pole(y):
        return 0.0
    if abs(y) < 170.0:
        return 1.0 / math.gamma(y)
    sign, logval = _log_rgamma(y)
    return sign * math.exp(logval)


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q <= 1.0:
        raise DomainError(f"fractional order q must lie in (0, 1], got {q}")
    return q


# --- regimes -----------------------------------------------------------------
# Each returns (value, estimated absolute error) or None when not applicable.


def _series(q: float, alpha: float, z: float, policy: MLEvalPolicy):
    logz = math.log(abs(z))
    negative = z < 0
    terms = [rgamma(alpha)]
    abs_weighted = abs(terms[0])
    running = terms[0]
    prev = math.inf
    for k in range(1, policy.max_terms):
        logt = k * logz - math.lgamma(q * k + alpha)
        if logt > 709.0:
            return None
        mag = math.exp(logt) if logt > -745.0 else 0.0
        t = -mag if (negative and k % 2) else mag
        terms.append(t)
        running += t
        # a rounding of size eps*|log t| enters through exp(lgamma)
        abs_weighted += mag * (4.0 + abs(logt))
        if mag < prev and mag <= 0.25 * _EPS * abs(running):
            value = math.fsum(terms)
            return value, _EPS * abs_weighted + mag
        prev = mag
    return None


def _asymptotic_negative(q: float, alpha: float, x: float, policy: MLEvalPolicy):
    """Algebraic expansion of E_{q,alpha}(-x), x > 0."""
    logx = math.log(x)
    terms = []
    running = 0.0
    prev_env = math.inf
    # for q > 2/3 the integrand of the Laplace form has poles close enough to the
    # real axis to leave an exponentially small term the expansion cannot see
    theta = math.pi * (1.0 - q) / q
    if theta < 0.5 * math.pi:
        log_pole = math.log(2.0 / q) + (1.0 - alpha) / q * logx - x ** (1.0 / q) * math.cos(theta)
        pole = math.exp(log_pole) if log_pole > -745.0 else 0.0
    else:
        pole = 0.0
    for k in range(1, policy.max_terms + 1):
        y = alpha - q * k
        # |1/Gamma(y)| <= Gamma(1-y)/pi for y < 1 (reflection formula)
        if y < 1.0:
            log_env = -k * logx + math.lgamma(1.0 - y) - _LOG_PI
        else:
            log_env = -k * logx - math.lgamma(y)
        env = math.exp(log_env) if log_env > -745.0 else 0.0
        if env > prev_env:
            return math.fsum(terms), prev_env + pole
        sign, logr = _log_rgamma(y)
        if sign != 0.0:
            logt = -k * logx + logr
            mag = math.exp(logt) if logt > -745.0 else 0.0
            t = mag * sign * (1.0 if k % 2 else -1.0)
            terms.append(t)
            running += t
        if running != 0.0 and env <= 0.25 * _EPS * abs(running):
            return math.fsum(terms), env + pole
        prev_env = env
    return None


def _quad(f, a, b, rtol, **kwargs):
    with warnings.catch_warnings():
        # the returned error estimate is what decides acceptance
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        rtol = max(rtol, 50.0 * _EPS)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400, **kwargs)


def _laplace_negative(q: float, alpha: float, x: float, policy: MLEvalPolicy):
    """Integral representation of E_{q,alpha}(-x) for 0 < q < 1, 0 < alpha <= 1.

    E(-x) = 1/(q pi) * int_0^inf r^((1-alpha)/q) exp(-r^(1/q))
                          * (r sin(pi(1-alpha)) + x sin(pi(1-alpha+q)))
                          / (r^2 + 2 r x cos(q pi) + x^2) dr
    """
    s1 = math.sin(math.pi * (1.0 - alpha))
    s2 = math.sin(math.pi * (1.0 - alpha + q))
    c = math.cos(q * math.pi)
    p = (1.0 - alpha) / q
    inv_q = 1.0 / q
    scale = 1.0 / (q * math.pi)

    def integrand(r: float) -> float:
        return (
            scale
            * r**p
            * math.exp(-(r**inv_q))
            * (r * s1 + x * s2)
            / (r * r + 2.0 * r * x * c + x * x)
        )

    r_max = 745.0**q
    points = {1.0}
    if c < 0:
        # near-resonance of the denominator when q > 1/2
        points.add(-x * c)
    points = sorted(pt for pt in points if 0.0 < pt < r_max)
    edges = [0.0, *points, r_max]
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = _quad(integrand, a, b, 0.05 * policy.target_rel_accuracy)
        total += val
        err += e
    return total, err + 16 * _EPS * abs(total)


def _negative_q_lt_1(q: float, alpha: float, x: float, policy: MLEvalPolicy):
    if alpha <= 1.0:
        return _laplace_negative(q, alpha, x, policy)
    # E_{q,a}(z) = (E_{q,a-q}(z) - 1/Gamma(a-q)) / z
    inner, err = _negative_q_lt_1(q, alpha - q, x, policy)
    r = rgamma(alpha - q)
    return (r - inner) / x, (err + _EPS * abs(r)) / x


def _negative_q_eq_1(alpha: float, x: float, policy: MLEvalPolicy):
    rtol = 0.05 * policy.target_rel_accuracy
    if alpha > 1.0:
        # Gamma(a-1) E_{1,a}(-x) = int_0^1 exp(-x u) (1-u)^(a-2) du
        val, err = _quad(lambda u: math.exp(-x * u), 0.0, 1.0, rtol, weight="alg", wvar=(0.0, alpha - 2.0))
        r = rgamma(alpha - 1.0)
        return val * r, abs(err * r) + _EPS * abs(val * r)
    # E_{1,a}(-x) = (exp(-x) - x int_0^1 exp(-x w) ((1-w)^(a-1) - 1) dw) / Gamma(a),
    # the exact part of the kernel is integrated in closed form to avoid cancellation
    kernel = lambda w: math.exp(-x * w) * math.expm1((alpha - 1.0) * math.log1p(-w))  # noqa: E731
    split = min(0.5, 1.0 / x)
    v1, e1 = _quad(kernel, 0.0, split, rtol)
    # the endpoint singularity at w = 1 is handled either by extrapolation or by an
    # algebraic weight; the second suffers cancellation when alpha is close to 1
    v2, e2 = _quad(kernel, split, 1.0, rtol)
    w2, f2 = _quad(lambda w: math.exp(-x * w), split, 1.0, rtol, weight="alg", wvar=(0.0, alpha - 1.0))
    w3 = (math.exp(-x * split) - math.exp(-x)) / x
    f2 += _EPS * (abs(w2) + abs(w3))
    if f2 < e2:
        v2, e2 = w2 - w3, f2
    val = v1 + v2
    err = e1 + e2
    r = rgamma(alpha)
    value = (math.exp(-x) - x * val) * r
    return value, (x * err + 4 * _EPS * abs(value)) * abs(r)


def _accept(result, policy: MLEvalPolicy) -> bool:
    if result is None:
        return False
    value, err = result
    return math.isfinite(value) and err <= policy.target_rel_accuracy * abs(value)


def ml2(q: float, alpha: float, z: float, policy: MLEvalPolicy = DEFAULT_POLICY) -> float:
    """Two-parameter Mittag-Leffler function ``E_{q,alpha}(z)`` for real ``z``.

    Raises :class:`AccuracyError` when no regime certifies
    ``policy.target_rel_accuracy``.
    """
    q = _check_q(q)
    alpha = float(alpha)
    z = float(z)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z}")
    if z == 0.0:
        return rgamma(alpha)

    if q == 1.0 and alpha in (1.0, 2.0):
        try:
            return math.exp(z) if alpha == 1.0 else math.expm1(z) / z
        except OverflowError as exc:
            raise AccuracyError(f"E_{{1,{alpha}}}({z}) overflows") from exc

    x = abs(z)
    if x <= policy.series_radius or z > 0:
        result = _series(q, alpha, z, policy)
        if _accept(result, policy):
            return result[0]
        if z > 0:
            raise AccuracyError(
                f"power series for E_{{{q},{alpha}}}({z}) did not reach "
                f"{policy.target_rel_accuracy:g} within {policy.max_terms} terms"
            )

    # the expansion certifies itself, so it is tried below the threshold too
    result = _asymptotic_negative(q, alpha, x, policy)
    if not _accept(result, policy):
        if q == 1.0:
            result = _negative_q_eq_1(alpha, x, policy)
        else:
            result = _negative_q_lt_1(q, alpha, x, policy)
    if not _accept(result, policy):
        raise AccuracyError(
            f"E_{{{q},{alpha}}}({z}) could not be certified to "
            f"{policy.target_rel_accuracy:g} relative accuracy"
        )
    return result[0]


def ml1(q: float, z: float, policy: MLEvalPolicy = DEFAULT_POLICY) -> float:
    """One-parameter Mittag-Leffler function ``E_q(z) = E_{q,1}(z)``."""
    return ml2(q, 1.0, z, policy)


def ml1_neg_bounds(q: float, t: float) -> tuple[float, float]:
    r"""Two-sided bound on :math:`E_q(-t^q)` for :math:`0 < q < 1`, :math:`t > 0`.

    .. math::

        \frac{1}{1 + \Gamma(1-q) t^q} \le E_q(-t^q)
            \le \frac{1}{1 + t^q / \Gamma(1+q)}
    """
    q = float(q)
    t = float(t)
    if not 0.0 < q < 1.0:
        raise DomainError(f"bounds hold for q in (0, 1) only, got {q}")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    tq = t**q
    lower = 1.0 / (1.0 + math.gamma(1.0 - q) * tq)
    upper = 1.0 / (1.0 + tq / math.gamma(1.0 + q))
    return lower, upper
