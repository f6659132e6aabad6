# %% [markdown]
# # Evaluating the Mittag-Leffler function
#
# `E_q(-x)` replaces `exp(-x)` when the time derivative has fractional order q.
# The evaluator picks between a power series, an algebraic expansion and an
# integral representation, and accepts a value only when its own error
# estimate meets the target accuracy (1e-12 relative by default).

# %%
import math

import numpy as np
from scipy.special import erfcx

from gradstab import MLEvalPolicy, ml1, ml1_neg_bounds, ml2
from gradstab.errors import AccuracyError

# %% [markdown]
# Two closed forms make good sanity checks: `E_1(z) = exp(z)` and
# `E_{1/2}(-x) = exp(x^2) erfc(x)`.

# %%
for x in (0.5, 3.0, 30.0, 300.0):
    v = ml1(0.5, -x)
    print(f"E_0.5(-{x:<5}) = {v:.15e}   rel. err vs erfcx: {abs(v - erfcx(x)) / erfcx(x):.1e}")

print("E_1(-1) =", ml1(1.0, -1.0), " exp(-1) =", math.exp(-1.0))

# %% [markdown]
# The two-parameter function feeds the forced response. At `z = 0` only the
# first term of the series survives, giving `1/Gamma(alpha)`.

# %%
print("E_{0.5,0.5}(-1) =", ml2(0.5, 0.5, -1.0))
print("E_{0.7,2.5}(0)  =", ml2(0.7, 2.5, 0.0), "= 1/Gamma(2.5) =", 1 / math.gamma(2.5))

# %% [markdown]
# ## Sandwich bounds
#
# For 0 < q < 1, `1/(1 + Gamma(1-q) t^q) <= E_q(-t^q) <= 1/(1 + t^q/Gamma(1+q))`.
# The decay is algebraic, like `t^-q`, which is why fractional systems
# stabilize much more slowly than their q = 1 counterparts.

# %%
t = np.geomspace(1e-2, 1e3, 8)
print(f"{'t':>10} {'lower':>12} {'E_q(-t^q)':>12} {'upper':>12}   (q = 0.4)")
for s in t:
    lo, hi = ml1_neg_bounds(0.4, s)
    print(f"{s:10.3g} {lo:12.6g} {ml1(0.4, -(s**0.4)):12.6g} {hi:12.6g}")

# %% [markdown]
# ## When accuracy cannot be certified
#
# Asking for more digits than double precision carries raises instead of
# returning a silently wrong number.

# %%
try:
    ml1(0.5, -20.0, MLEvalPolicy(target_rel_accuracy=1e-18))
except AccuracyError as exc:
    print("AccuracyError:", exc)
