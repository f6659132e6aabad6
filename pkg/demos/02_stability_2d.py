# %% [markdown]
# # Spectral stability test on the unit square
#
# The classifier only needs eigenvalues and, per eigenfunction, whether its
# gradient vanishes. It sorts the distinct eigenvalues into
#
# * omega_1: nonnegative eigenvalues whose eigenfunctions have a gradient,
# * omega_2: negative ones with a gradient,
# * gradient-null: eigenvalues whose eigenspace has zero gradient.
#
# Empty omega_1 and `sup omega_2 < 0` give gradient Mittag-Leffler stability
# with rate `xi = -sup omega_2`.

# %%
import math

from gradstab import (
    Mode,
    build_sine_1d,
    build_sine_2d,
    classify_stability,
    partition_spectrum,
)
from gradstab.spectral import custom_system

sq = build_sine_2d(12)
part = partition_spectrum(sq)
verdict = classify_stability(sq)
print("modes stored:", sq.N, " distinct eigenvalues:", len(part.omega2))
print("omega_1:", part.omega1)
print("largest eigenvalue / pi^2:", part.omega2[0] / math.pi**2)
print(verdict.kind.value, "xi / pi^2 =", verdict.xi / math.pi**2)

# %% [markdown]
# Shifting the 1D Dirichlet Laplacian by `pi^2` moves the first eigenvalue to 0.
# Its eigenfunction has a nonzero gradient, so 0 lands in omega_1 and the
# criteria fail with witness 0. That does not prove instability; the test is
# only sufficient.

# %%
v = classify_stability(build_sine_1d(math.pi**2, 64))
print(v.kind.value, "witness =", v.witness)

# %% [markdown]
# A zero eigenvalue with a constant eigenfunction (as for Neumann conditions)
# is gradient-null and does not block the verdict.

# %%
neumann_like = custom_system([Mode(0, 0.0, 0.0, grad_vanishes=True), Mode(1, -math.pi**2, math.pi**2)])
print(partition_spectrum(neumann_like))
print(classify_stability(neumann_like).kind.value)
